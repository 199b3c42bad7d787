//! Unnormalized forward / normalized inverse 2D DFT on `L1 × L2` arrays
//! stored first-dimension-fastest (`x[l1 + l2·L1]`).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned 2D transform pair. Plans are shared and immutable.
#[derive(Clone)]
pub struct Fft2d {
    l1: usize,
    l2: usize,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2d").field("l1", &self.l1).field("l2", &self.l2).finish()
    }
}

/// Per-caller working memory for [`Fft2d`].
#[derive(Debug, Clone)]
pub struct Fft2dScratch {
    transpose: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl Fft2d {
    /// Both sizes must be positive.
    pub fn new(l1: usize, l2: usize) -> Self {
        assert!(l1 > 0 && l2 > 0, "2D FFT sizes must be positive");
        let mut planner = FftPlanner::new();
        Fft2d {
            l1,
            l2,
            fwd1: planner.plan_fft_forward(l1),
            inv1: planner.plan_fft_inverse(l1),
            fwd2: planner.plan_fft_forward(l2),
            inv2: planner.plan_fft_inverse(l2),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.l1, self.l2)
    }

    pub fn len(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scratch(&self) -> Fft2dScratch {
        let fft_len = [&self.fwd1, &self.inv1, &self.fwd2, &self.inv2]
            .iter()
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2dScratch {
            transpose: vec![Complex64::new(0.0, 0.0); if self.l2 > 1 { self.len() } else { 0 }],
            fft: vec![Complex64::new(0.0, 0.0); fft_len],
        }
    }

    /// In-place unnormalized forward transform, `exp(-j2π·)` kernel.
    pub fn forward(&self, data: &mut [Complex64], scratch: &mut Fft2dScratch) {
        self.run(data, scratch, &self.fwd1, &self.fwd2);
    }

    /// In-place inverse transform including the `1/(L1·L2)` factor.
    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut Fft2dScratch) {
        self.run(data, scratch, &self.inv1, &self.inv2);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(
        &self,
        data: &mut [Complex64],
        scratch: &mut Fft2dScratch,
        along1: &Arc<dyn Fft<f64>>,
        along2: &Arc<dyn Fft<f64>>,
    ) {
        assert_eq!(data.len(), self.len(), "2D FFT buffer length mismatch");
        let (l1, l2) = (self.l1, self.l2);
        // contiguous length-L1 columns
        if l1 > 1 {
            along1.process_with_scratch(data, &mut scratch.fft);
        }
        if l2 > 1 {
            let t = &mut scratch.transpose;
            for b in 0..l2 {
                for a in 0..l1 {
                    t[a * l2 + b] = data[a + b * l1];
                }
            }
            along2.process_with_scratch(t, &mut scratch.fft);
            for a in 0..l1 {
                for b in 0..l2 {
                    data[a + b * l1] = t[a * l2 + b];
                }
            }
        }
    }
}
