//! Block-circulant matrices with circulant blocks.
//!
//! An `L × L` BCCB matrix `R` (`L = L1·L2`, `L2` blocks of size `L1 × L1`)
//! is fully determined by its first column `r`: entry `(i, j)` equals
//! `r[((i1 - j1) mod L1) + ((i2 - j2) mod L2)·L1]` with `i = i1 + i2·L1`.
//! Applying `R` is a 2D circular convolution with `r` reshaped to
//! `L1 × L2`, hence `R = F⁻¹ diag(Ω) F` where `F` is the 2D DFT and
//! `Ω = F r`. [`BccbOperator`] stores only `Ω`.
//!
//! With uniform grids on λ/2 spacing the dictionary Gram `D_sᴴ D_s` has
//! this form, with first column
//! `r[l1 + l2·L1] = Σ_(m1,m2) exp(+j2π(m1·l1/L1 + m2·l2/L2))` summed over
//! occupied elements.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;

use crate::array::ArrayGeometry;
use crate::fft2::{Fft2d, Fft2dScratch};
use crate::{Error, Result};

/// Default relative singularity guard for [`BccbOperator::inverse`].
pub const DEFAULT_SINGULAR_GUARD: f64 = 1e-12;

/// Default size cap for [`BccbOperator::to_dense`].
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// First column of a BCCB matrix, first dimension fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstColumn {
    pub l1: usize,
    pub l2: usize,
    pub values: Vec<Complex64>,
}

impl FirstColumn {
    pub fn new(l1: usize, l2: usize, values: Vec<Complex64>) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::invalid("BCCB block size and block count must be positive"));
        }
        if values.len() != l1 * l2 {
            return Err(Error::invalid(format!(
                "first column has length {}, expected {l1}·{l2} = {}",
                values.len(),
                l1 * l2
            )));
        }
        Ok(FirstColumn { l1, l2, values })
    }

    /// Block `l2` of the characterizing sequence, `r_{l2}(l1) = r(l1 + l2·L1)`.
    pub fn block(&self, l2: usize) -> &[Complex64] {
        &self.values[l2 * self.l1..(l2 + 1) * self.l1]
    }
}

/// Closed-form first column of `D_sᴴ D_s` for uniform `L1`, `L2` grids.
///
/// Costs `O(M·L)`; `r[0]` is exactly the element count.
pub fn gram_first_column(geometry: &ArrayGeometry, l1: usize, l2: usize) -> Result<FirstColumn> {
    if l1 == 0 || l2 == 0 {
        return Err(Error::invalid("grid lengths must be positive"));
    }
    let roots = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect()
    };
    let (w1, w2) = (roots(l1), roots(l2));
    let mut values = vec![Complex64::new(0.0, 0.0); l1 * l2];
    for (m1, m2) in geometry.elements() {
        for b in 0..l2 {
            let p2 = w2[(m2 * b) % l2];
            let block = &mut values[b * l1..(b + 1) * l1];
            for (a, v) in block.iter_mut().enumerate() {
                *v += w1[(m1 * a) % l1] * p2;
            }
        }
    }
    FirstColumn::new(l1, l2, values)
}

/// A BCCB operator held as its eigenvalue matrix `Ω` (`L1 × L2`,
/// stored first dimension fastest) plus a planned 2D FFT.
#[derive(Debug, Clone)]
pub struct BccbOperator {
    l1: usize,
    l2: usize,
    eigenvalues: Vec<Complex64>,
    fft: Fft2d,
}

/// Result of a structural BCCB scan of a dense matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BccbCheck {
    pub is_bccb: bool,
    pub max_deviation: f64,
}

/// Extremes and sum of an operator's eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSummary {
    pub sum: Complex64,
    pub max_real: f64,
    pub min_real: f64,
    pub max_abs_imag: f64,
    pub max_abs: f64,
    pub min_abs: f64,
}

impl BccbOperator {
    /// Eigenvalues are the unnormalized 2D DFT of the reshaped first column.
    pub fn from_first_column(col: &FirstColumn) -> Result<Self> {
        let col = FirstColumn::new(col.l1, col.l2, col.values.clone())?;
        let fft = Fft2d::new(col.l1, col.l2);
        let mut eigenvalues = col.values;
        fft.forward(&mut eigenvalues, &mut fft.scratch());
        Ok(BccbOperator {
            l1: col.l1,
            l2: col.l2,
            eigenvalues,
            fft,
        })
    }

    pub fn from_eigenvalues(l1: usize, l2: usize, eigenvalues: Vec<Complex64>) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::invalid("BCCB block size and block count must be positive"));
        }
        if eigenvalues.len() != l1 * l2 {
            return Err(Error::invalid(format!(
                "eigenvalue matrix has {} entries, expected {}",
                eigenvalues.len(),
                l1 * l2
            )));
        }
        Ok(BccbOperator {
            l1,
            l2,
            eigenvalues,
            fft: Fft2d::new(l1, l2),
        })
    }

    pub fn identity(l1: usize, l2: usize) -> Result<Self> {
        Self::from_eigenvalues(l1, l2, vec![Complex64::new(1.0, 0.0); l1 * l2])
    }

    /// The dictionary Gram `D_sᴴ D_s` for uniform grids of lengths `l1`, `l2`.
    pub fn gram(geometry: &ArrayGeometry, l1: usize, l2: usize) -> Result<Self> {
        Self::from_first_column(&gram_first_column(geometry, l1, l2)?)
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn dim(&self) -> usize {
        self.l1 * self.l2
    }

    /// `Ω` flattened first dimension fastest: entry `k1 + k2·L1` is `λ_{k2}(k1)`.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k1: usize, k2: usize) -> Complex64 {
        self.eigenvalues[k1 + k2 * self.l1]
    }

    pub fn scratch(&self) -> Fft2dScratch {
        self.fft.scratch()
    }

    /// `out = R x` via 2D FFT, Hadamard product with `Ω`, inverse 2D FFT.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64], scratch: &mut Fft2dScratch) {
        assert_eq!(x.len(), self.dim(), "BCCB input length mismatch");
        out.copy_from_slice(x);
        self.fft.forward(out, scratch);
        for (v, lam) in out.iter_mut().zip(&self.eigenvalues) {
            *v *= lam;
        }
        self.fft.inverse(out, scratch);
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "vector length {} does not match operator size {}",
                x.len(),
                self.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut out, &mut self.scratch());
        Ok(out)
    }

    /// `alpha·R + beta·I`, still BCCB.
    pub fn scale_add_identity(&self, alpha: Complex64, beta: Complex64) -> Self {
        BccbOperator {
            eigenvalues: self.eigenvalues.iter().map(|&l| alpha * l + beta).collect(),
            ..self.clone()
        }
    }

    /// `R⁻¹` with the default relative guard.
    pub fn inverse(&self) -> Result<Self> {
        self.inverse_with_guard(DEFAULT_SINGULAR_GUARD)
    }

    /// `R⁻¹`, refusing when `min|λ| <= relative_guard · max|λ|`.
    pub fn inverse_with_guard(&self, relative_guard: f64) -> Result<Self> {
        let s = self.spectrum();
        let threshold = relative_guard * s.max_abs;
        if s.max_abs == 0.0 || s.min_abs <= threshold {
            return Err(Error::Singular {
                magnitude: s.min_abs,
                threshold,
            });
        }
        Ok(BccbOperator {
            eigenvalues: self.eigenvalues.iter().map(|l| l.inv()).collect(),
            ..self.clone()
        })
    }

    /// First column, recovered by an inverse 2D DFT of `Ω`.
    pub fn first_column(&self) -> FirstColumn {
        let mut values = self.eigenvalues.clone();
        self.fft.inverse(&mut values, &mut self.scratch());
        FirstColumn {
            l1: self.l1,
            l2: self.l2,
            values,
        }
    }

    /// Explicit matrix, refused above `cap` rows.
    pub fn to_dense(&self, cap: usize) -> Result<Array2<Complex64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::ResourceExceeded {
                required: crate::dense::DenseMatrix::bytes_for(n),
                budget: crate::dense::DenseMatrix::bytes_for(cap),
            });
        }
        let r = self.first_column().values;
        let (l1, l2) = (self.l1, self.l2);
        Ok(Array2::from_shape_fn((n, n), |(i, j)| {
            let d1 = (i % l1 + l1 - j % l1) % l1;
            let d2 = (i / l1 + l2 - j / l1) % l2;
            r[d1 + d2 * l1]
        }))
    }

    pub fn spectrum(&self) -> SpectrumSummary {
        let mut s = SpectrumSummary {
            sum: Complex64::new(0.0, 0.0),
            max_real: f64::NEG_INFINITY,
            min_real: f64::INFINITY,
            max_abs_imag: 0.0,
            max_abs: 0.0,
            min_abs: f64::INFINITY,
        };
        for l in &self.eigenvalues {
            s.sum += l;
            s.max_real = s.max_real.max(l.re);
            s.min_real = s.min_real.min(l.re);
            s.max_abs_imag = s.max_abs_imag.max(l.im.abs());
            s.max_abs = s.max_abs.max(l.norm());
            s.min_abs = s.min_abs.min(l.norm());
        }
        s
    }
}

/// Scans a dense `L × L` matrix for BCCB structure with `L2` blocks of `L1 × L1`.
///
/// Every entry is compared with the representative of its class
/// `((i1 - j1) mod L1, (i2 - j2) mod L2)` taken from the first column.
pub fn is_bccb(dense: &Array2<Complex64>, l1: usize, l2: usize, tol: f64) -> Result<BccbCheck> {
    let n = l1 * l2;
    if l1 == 0 || l2 == 0 || dense.shape() != [n, n] {
        return Err(Error::invalid(format!(
            "matrix of shape {:?} is not {n}x{n}",
            dense.shape()
        )));
    }
    let mut worst = 0.0f64;
    for ((i, j), v) in dense.indexed_iter() {
        let d1 = (i % l1 + l1 - j % l1) % l1;
        let d2 = (i / l1 + l2 - j / l1) % l2;
        worst = worst.max((v - dense[[d1 + d2 * l1, 0]]).norm());
    }
    Ok(BccbCheck {
        is_bccb: worst <= tol,
        max_deviation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(n: usize, seed: f64) -> Vec<Complex64> {
        (0..n)
            .map(|i| c((i as f64 * 0.731 + seed).sin(), (i as f64 * 1.917 - seed).cos()))
            .collect()
    }

    #[test]
    fn delta_column_is_identity() {
        let mut r = vec![c(0.0, 0.0); 12];
        r[0] = c(1.0, 0.0);
        let op = BccbOperator::from_first_column(&FirstColumn::new(4, 3, r).unwrap()).unwrap();
        assert!(op.eigenvalues().iter().all(|l| (*l - 1.0).norm() < 1e-15));
        let x = pseudo_random(12, 0.3);
        let y = op.apply(&x).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
        let dense = op.to_dense(64).unwrap();
        let eye: Array2<Complex64> = Array2::eye(12);
        assert!(dense.iter().zip(eye.iter()).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn constant_column_concentrates_at_dc() {
        let r = vec![c(1.0, 0.0); 8];
        let op = BccbOperator::from_first_column(&FirstColumn::new(4, 2, r).unwrap()).unwrap();
        assert!((op.eigenvalue(0, 0) - c(8.0, 0.0)).norm() < 1e-14);
        for (k, l) in op.eigenvalues().iter().enumerate().skip(1) {
            assert!(l.norm() < 1e-14, "index {k}");
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(FirstColumn::new(3, 3, vec![c(0.0, 0.0); 8]).is_err());
        assert!(BccbOperator::from_eigenvalues(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        let op = BccbOperator::identity(2, 2).unwrap();
        assert!(op.apply(&[c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn scale_add_identity_cases() {
        let op = BccbOperator::from_first_column(
            &FirstColumn::new(3, 2, pseudo_random(6, 1.0)).unwrap(),
        )
        .unwrap();
        let id = op.scale_add_identity(c(0.0, 0.0), c(1.0, 0.0));
        assert!(id.eigenvalues().iter().all(|l| *l == c(1.0, 0.0)));
        let same = op.scale_add_identity(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(same.eigenvalues(), op.eigenvalues());
    }

    #[test]
    fn inverse_guard() {
        let id = BccbOperator::identity(3, 3).unwrap();
        let inv = id.inverse().unwrap();
        assert!(inv.eigenvalues().iter().all(|l| *l == c(1.0, 0.0)));

        let mut lam = vec![c(1.0, 0.0); 4];
        lam[2] = c(1e-14, 0.0);
        let near = BccbOperator::from_eigenvalues(2, 2, lam).unwrap();
        match near.inverse() {
            Err(Error::Singular { magnitude, .. }) => assert_eq!(magnitude, 1e-14),
            other => panic!("expected singular error, got {other:?}"),
        }
        let zero = BccbOperator::from_eigenvalues(2, 2, vec![c(0.0, 0.0); 4]).unwrap();
        assert!(zero.inverse().is_err());
    }

    #[test]
    fn dense_cap() {
        let id = BccbOperator::identity(8, 8).unwrap();
        assert!(matches!(id.to_dense(32), Err(Error::ResourceExceeded { .. })));
    }

    #[test]
    fn single_element_gram_column_is_ones() {
        let g = ArrayGeometry::ura(1, 1).unwrap();
        let r = gram_first_column(&g, 4, 3).unwrap();
        assert!(r.values.iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn gram_column_dc_entry_is_element_count() {
        let g = ArrayGeometry::ura(7, 5)
            .unwrap()
            .subsample_preserving_aperture(11, 4)
            .unwrap();
        let r = gram_first_column(&g, 6, 4).unwrap();
        assert_eq!(r.values[0], c(11.0, 0.0));
        assert_eq!(r.block(1).len(), 6);
    }

    #[test]
    fn is_bccb_rejects_shape_and_perturbation() {
        let eye: Array2<Complex64> = Array2::eye(6);
        assert!(is_bccb(&eye, 3, 2, 1e-12).unwrap().is_bccb);
        assert!(is_bccb(&eye, 4, 2, 1e-12).is_err());
        let mut bad = eye.clone();
        bad[[4, 1]] += c(1e-3, 0.0);
        let check = is_bccb(&bad, 3, 2, 1e-10).unwrap();
        assert!(!check.is_bccb);
        assert!((check.max_deviation - 1e-3).abs() < 1e-15);
    }
}
