//! Dense complex square matrices for the regular (O(L²) per iteration) backend.

use ndarray::{Array2, ArrayView1};
use ndarray_linalg::InverseCInto;
use num_complex::Complex64;

use crate::{Error, MemoryBudget, Result};

/// Row-major `n × n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: Array2<Complex64>,
}

impl DenseMatrix {
    pub fn from_array(data: Array2<Complex64>) -> Result<Self> {
        if !data.is_square() {
            return Err(Error::invalid(format!(
                "dense operator must be square, got {:?}",
                data.shape()
            )));
        }
        // matvec walks rows as contiguous slices
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(DenseMatrix { data })
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix {
            data: Array2::eye(n),
        }
    }

    /// Zero matrix, failing if `n × n` complex entries exceed `budget`.
    pub fn zeros(n: usize, budget: MemoryBudget) -> Result<Self> {
        budget.check(Self::bytes_for(n))?;
        Ok(DenseMatrix {
            data: Array2::zeros((n, n)),
        })
    }

    pub fn bytes_for(n: usize) -> u64 {
        MemoryBudget::complex_bytes((n as u64).saturating_mul(n as u64))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.data
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    pub fn into_array(self) -> Array2<Complex64> {
        self.data
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "vector length {} does not match operator size {}",
                x.len(),
                self.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `out = A x`. Lengths must equal `dim()`.
    pub fn matvec_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        for (row, o) in self.data.rows().into_iter().zip(out.iter_mut()) {
            *o = row_dot(row, x);
        }
    }

    /// In-place `alpha·A + beta·I`.
    pub fn scale_add_identity(mut self, alpha: Complex64, beta: Complex64) -> Self {
        if alpha != Complex64::new(1.0, 0.0) {
            self.data.mapv_inplace(|v| v * alpha);
        }
        for d in self.data.diag_mut() {
            *d += beta;
        }
        self
    }

    /// In-place inverse of a Hermitian positive-definite matrix
    /// (Cholesky factorization followed by triangular inversion).
    pub fn inverse_hermitian_pd(self) -> Result<Self> {
        let data = self
            .data
            .invc_into()
            .map_err(|e| Error::Linalg(format!("Cholesky inverse failed: {e}")))?;
        Ok(DenseMatrix { data })
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        worst
    }
}

#[inline]
fn row_dot(row: ArrayView1<'_, Complex64>, x: &[Complex64]) -> Complex64 {
    let row = row.as_slice().expect("standard layout rows are contiguous");
    // two independent accumulators keep the FP pipeline busy
    let (mut re0, mut im0, mut re1, mut im1) = (0.0, 0.0, 0.0, 0.0);
    let mut pairs_a = row.chunks_exact(2);
    let mut pairs_x = x.chunks_exact(2);
    for (a, b) in (&mut pairs_a).zip(&mut pairs_x) {
        re0 += a[0].re * b[0].re - a[0].im * b[0].im;
        im0 += a[0].re * b[0].im + a[0].im * b[0].re;
        re1 += a[1].re * b[1].re - a[1].im * b[1].im;
        im1 += a[1].re * b[1].im + a[1].im * b[1].re;
    }
    for (a, b) in pairs_a.remainder().iter().zip(pairs_x.remainder()) {
        re0 += a.re * b.re - a.im * b.im;
        im0 += a.re * b.im + a.im * b.re;
    }
    Complex64::new(re0 + re1, im0 + im1)
}
