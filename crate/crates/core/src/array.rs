//! Array geometry and single-snapshot signal synthesis.
//!
//! Elements sit on a half-wavelength grid: element `(m1, m2)` is at
//! `(m1·λ/2, m2·λ/2, 0)`. All flattened vectors use the scan order
//! `m1 + m2·M1` (first dimension fastest), so occupied elements are
//! visited with `m2` in the outer loop and `m1` in the inner loop.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Occupancy of a sparse planar array drawn from an `m1_count × m2_count` URA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayGeometry {
    m1_count: usize,
    m2_count: usize,
    // indexed m1 + m2 * m1_count
    occupancy: Vec<bool>,
    element_count: usize,
}

impl ArrayGeometry {
    /// Fully occupied uniform rectangular array.
    pub fn ura(m1_count: usize, m2_count: usize) -> Result<Self> {
        if m1_count == 0 || m2_count == 0 {
            return Err(Error::invalid(format!(
                "URA dimensions must be positive, got {m1_count}x{m2_count}"
            )));
        }
        let total = m1_count
            .checked_mul(m2_count)
            .ok_or_else(|| Error::invalid("URA dimensions overflow"))?;
        Ok(ArrayGeometry {
            m1_count,
            m2_count,
            occupancy: vec![true; total],
            element_count: total,
        })
    }

    /// Geometry from an explicit list of occupied grid positions.
    pub fn from_elements(
        m1_count: usize,
        m2_count: usize,
        elements: &[(usize, usize)],
    ) -> Result<Self> {
        let mut geometry = Self::ura(m1_count, m2_count)?;
        geometry.occupancy.fill(false);
        for &(m1, m2) in elements {
            if m1 >= m1_count || m2 >= m2_count {
                return Err(Error::invalid(format!(
                    "element ({m1}, {m2}) lies outside the {m1_count}x{m2_count} grid"
                )));
            }
            let slot = &mut geometry.occupancy[m1 + m2 * m1_count];
            if *slot {
                return Err(Error::invalid(format!("element ({m1}, {m2}) listed twice")));
            }
            *slot = true;
        }
        if elements.is_empty() {
            return Err(Error::invalid("a geometry needs at least one element"));
        }
        geometry.element_count = elements.len();
        Ok(geometry)
    }

    /// Randomly keeps `m` elements of a full URA while preserving both apertures.
    ///
    /// One element is drawn on each extremal line (`m1 = 0`, `m1 = M1-1`,
    /// `m2 = 0`, `m2 = M2-1`); the remaining elements are drawn uniformly
    /// without replacement from the unused positions.
    pub fn subsample_preserving_aperture(&self, m: usize, seed: u64) -> Result<Self> {
        if self.element_count != self.occupancy.len() {
            return Err(Error::invalid("aperture-preserving subsampling needs a full URA"));
        }
        if m < 4 || m > self.element_count {
            return Err(Error::invalid(format!(
                "element count {m} must lie in [4, {}]",
                self.element_count
            )));
        }
        let (m1n, m2n) = (self.m1_count, self.m2_count);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut occupancy = vec![false; self.occupancy.len()];

        let anchors = [
            (0, rng.random_range(0..m2n)),
            (m1n - 1, rng.random_range(0..m2n)),
            (rng.random_range(0..m1n), 0),
            (rng.random_range(0..m1n), m2n - 1),
        ];
        let mut chosen = 0;
        for (m1, m2) in anchors {
            let slot = &mut occupancy[m1 + m2 * m1n];
            if !*slot {
                *slot = true;
                chosen += 1;
            }
        }

        let free: Vec<usize> = (0..occupancy.len()).filter(|&i| !occupancy[i]).collect();
        for pick in index::sample(&mut rng, free.len(), m - chosen) {
            occupancy[free[pick]] = true;
        }

        Ok(ArrayGeometry {
            m1_count: m1n,
            m2_count: m2n,
            occupancy,
            element_count: m,
        })
    }

    pub fn m1_count(&self) -> usize {
        self.m1_count
    }

    pub fn m2_count(&self) -> usize {
        self.m2_count
    }

    /// Number of occupied positions, `M`.
    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn is_occupied(&self, m1: usize, m2: usize) -> bool {
        m1 < self.m1_count && m2 < self.m2_count && self.occupancy[m1 + m2 * self.m1_count]
    }

    /// Occupied positions `(m1, m2)` in scan order.
    pub fn elements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m1n = self.m1_count;
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(move |(i, _)| (i % m1n, i / m1n))
    }

    /// True when the first and last row and column each hold an element,
    /// i.e. the apertures match the parent URA.
    pub fn preserves_aperture(&self) -> bool {
        let (mut row0, mut row_last, mut col0, mut col_last) = (false, false, false, false);
        for (m1, m2) in self.elements() {
            row0 |= m1 == 0;
            row_last |= m1 == self.m1_count - 1;
            col0 |= m2 == 0;
            col_last |= m2 == self.m2_count - 1;
        }
        row0 && row_last && col0 && col_last
    }
}

/// A far-field source: harmonic tuple and complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub f1: f64,
    pub f2: f64,
    pub amplitude: Complex64,
}

impl Target {
    /// Validated constructor; both harmonics must lie in `[-1/2, 1/2)`.
    pub fn new(f1: f64, f2: f64, amplitude: Complex64) -> Result<Self> {
        let target = Target { f1, f2, amplitude };
        target.validate()?;
        Ok(target)
    }

    fn validate(&self) -> Result<()> {
        for f in [self.f1, self.f2] {
            if !(-0.5..0.5).contains(&f) {
                return Err(Error::invalid(format!("harmonic {f} outside [-1/2, 1/2)")));
            }
        }
        if !(self.amplitude.re.is_finite() && self.amplitude.im.is_finite()) {
            return Err(Error::invalid("target amplitude must be finite"));
        }
        Ok(())
    }
}

/// Single-snapshot measurement on a sparse array.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub values: Vec<Complex64>,
    pub geometry: ArrayGeometry,
    pub noise_variance: f64,
}

/// `exp(-j2π f m)` for `m = 0..m_count`.
pub fn steering_vector(f: f64, m_count: usize) -> Vec<Complex64> {
    (0..m_count)
        .map(|m| Complex64::from_polar(1.0, -TAU * f * m as f64))
        .collect()
}

/// Maps azimuth `phi ∈ [-π, π)` and elevation `theta ∈ [0, π/2)` to the
/// harmonic tuple of a half-wavelength array.
pub fn angles_to_harmonics(phi: f64, theta: f64) -> Result<(f64, f64)> {
    if !(-PI..PI).contains(&phi) {
        return Err(Error::invalid(format!("azimuth {phi} outside [-pi, pi)")));
    }
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(Error::invalid(format!("elevation {theta} outside [0, pi/2)")));
    }
    let s = theta.sin();
    Ok((0.5 * phi.cos() * s, 0.5 * phi.sin() * s))
}

/// Inverse of [`angles_to_harmonics`]. Returns `phi = 0` at broadside,
/// where the azimuth is undefined.
pub fn harmonics_to_angles(f1: f64, f2: f64) -> Result<(f64, f64)> {
    let radius_sq = 4.0 * (f1 * f1 + f2 * f2);
    if !radius_sq.is_finite() || radius_sq > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain(format!(
            "harmonic pair ({f1}, {f2}) is not physically realizable"
        )));
    }
    let sin_theta = radius_sq.sqrt().min(1.0);
    let theta = sin_theta.asin();
    if sin_theta == 0.0 {
        return Ok((0.0, theta));
    }
    let mut phi = f2.atan2(f1);
    if phi >= PI {
        phi -= TAU;
    }
    Ok((phi, theta))
}

/// Noise variance giving `snr_db` for the summed source power `Σ|c_k|²`.
pub fn snr_to_noise_variance(targets: &[Target], snr_db: f64) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::invalid("SNR needs at least one target"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid("SNR must be finite"));
    }
    let power: f64 = targets.iter().map(|t| t.amplitude.norm_sqr()).sum();
    Ok(power / 10f64.powf(snr_db / 10.0))
}

/// Synthesizes `y_s = Σ c_k a(f_k) + n` on the occupied elements.
///
/// Noise is circular complex Gaussian with variance `noise_variance`
/// (each of the real and imaginary parts carries half of it).
pub fn synthesize_snapshot(
    geometry: &ArrayGeometry,
    targets: &[Target],
    noise_variance: f64,
    seed: u64,
) -> Result<Snapshot> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::invalid(format!("noise variance {noise_variance} must be finite and >= 0")));
    }
    if targets.is_empty() && noise_variance == 0.0 {
        return Err(Error::invalid("need at least one target or positive noise"));
    }
    for t in targets {
        t.validate()?;
    }

    let mut values: Vec<Complex64> = geometry
        .elements()
        .map(|(m1, m2)| {
            targets
                .iter()
                .map(|t| {
                    let phase = -TAU * (m1 as f64 * t.f1 + m2 as f64 * t.f2);
                    t.amplitude * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();

    if noise_variance > 0.0 {
        let scale = (0.5 * noise_variance).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut values {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re, im) * scale;
        }
    }

    Ok(Snapshot {
        values,
        geometry: geometry.clone(),
        noise_variance,
    })
}
