use num_complex::Complex64;

use crate::dictionary::UniformGrid;
use crate::{Error, Result};

/// One recovered harmonic tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportEntry {
    pub index: usize,
    pub f1: f64,
    pub f2: f64,
    pub amplitude: Complex64,
}

/// Entries of `ĉ` with `|ĉ_l| >= fraction · max|ĉ|`, mapped to grid tuples
/// (`l1 = l mod L1`, `l2 = l / L1`) and sorted by decreasing magnitude.
pub fn extract_support(
    c_hat: &[Complex64],
    grid1: &UniformGrid,
    grid2: &UniformGrid,
    threshold_fraction: f64,
) -> Result<Vec<SupportEntry>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "threshold fraction must lie in (0, 1), got {threshold_fraction}"
        )));
    }
    let l1n = grid1.len();
    if c_hat.len() != l1n * grid2.len() {
        return Err(Error::invalid(format!(
            "estimate length {} does not match grid size {}",
            c_hat.len(),
            l1n * grid2.len()
        )));
    }
    let peak = c_hat.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Vec::new());
    }
    let cutoff = threshold_fraction * peak;
    let mut entries: Vec<SupportEntry> = c_hat
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() >= cutoff)
        .map(|(index, &amplitude)| SupportEntry {
            index,
            f1: grid1.frequency(index % l1n),
            f2: grid2.frequency(index / l1n),
            amplitude,
        })
        .collect();
    entries.sort_by(|a, b| b.amplitude.norm().total_cmp(&a.amplitude.norm()).then(a.index.cmp(&b.index)));
    Ok(entries)
}
