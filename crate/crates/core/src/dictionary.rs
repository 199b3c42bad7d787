//! Harmonic grids and the row-subsampled Kronecker dictionary `D_s = Ψ (D₂ ⊗ D₁)`.
//!
//! Column `l1 + l2·L1` of `D_s` is the steering product for the grid tuple
//! `(f1[l1], f2[l2])`; row `m` is the `m`-th occupied element in scan order.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64;

use crate::array::ArrayGeometry;
use crate::dense::DenseMatrix;
use crate::{Error, MemoryBudget, Result};

/// Grid half-width in normalized frequency; elements sit on λ/2 spacing.
pub const GAMMA: f64 = 0.5;

/// Uniform harmonic grid `f_l = -1/2 + l / L` for `l = 0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    frequencies: Vec<f64>,
}

impl UniformGrid {
    pub fn new(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("grid length must be positive"));
        }
        let step = 2.0 * GAMMA / length as f64;
        let frequencies = (0..length).map(|l| -GAMMA + l as f64 * step).collect();
        Ok(UniformGrid { frequencies })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency(&self, l: usize) -> f64 {
        self.frequencies[l]
    }

    /// Index of the grid point nearest to `f`, wrapping around the period.
    pub fn nearest_index(&self, f: f64) -> usize {
        let n = self.len() as f64;
        let pos = ((f + GAMMA) * n).round().rem_euclid(n);
        pos as usize % self.len()
    }
}

/// `D_i(m, l) = exp(-j2π f_l m)`, an `m_count × frequencies.len()` matrix.
pub fn build_subdictionary(m_count: usize, frequencies: &[f64]) -> Result<Array2<Complex64>> {
    if m_count == 0 {
        return Err(Error::invalid("subdictionary needs at least one row"));
    }
    Ok(Array2::from_shape_fn((m_count, frequencies.len()), |(m, l)| {
        Complex64::from_polar(1.0, -TAU * frequencies[l] * m as f64)
    }))
}

/// Row-subsampled 2D dictionary. Rows are materialized on first use.
#[derive(Debug)]
pub struct SubsampledDictionary {
    geometry: ArrayGeometry,
    f1: Vec<f64>,
    f2: Vec<f64>,
    uniform: bool,
    rows: OnceLock<Array2<Complex64>>,
}

impl SubsampledDictionary {
    /// Dictionary over two uniform grids; fails if `M·L` complex entries exceed `budget`.
    pub fn build(
        geometry: &ArrayGeometry,
        grid1: &UniformGrid,
        grid2: &UniformGrid,
        budget: MemoryBudget,
    ) -> Result<Self> {
        let mut dict = Self::with_frequencies(geometry, grid1.frequencies(), grid2.frequencies(), budget)?;
        dict.uniform = true;
        Ok(dict)
    }

    /// Dictionary over arbitrary grids. The Gram is then generally not BCCB,
    /// so only the regular backend may be used with it.
    pub fn with_frequencies(
        geometry: &ArrayGeometry,
        f1: &[f64],
        f2: &[f64],
        budget: MemoryBudget,
    ) -> Result<Self> {
        if f1.is_empty() || f2.is_empty() {
            return Err(Error::invalid("harmonic grids must be nonempty"));
        }
        let entries = (geometry.element_count() as u64)
            .saturating_mul(f1.len() as u64)
            .saturating_mul(f2.len() as u64);
        budget.check(MemoryBudget::complex_bytes(entries))?;
        Ok(SubsampledDictionary {
            geometry: geometry.clone(),
            f1: f1.to_vec(),
            f2: f2.to_vec(),
            uniform: false,
            rows: OnceLock::new(),
        })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn l1(&self) -> usize {
        self.f1.len()
    }

    pub fn l2(&self) -> usize {
        self.f2.len()
    }

    /// Column count `L = L1·L2`.
    pub fn columns(&self) -> usize {
        self.f1.len() * self.f2.len()
    }

    /// Row count `M`.
    pub fn rows(&self) -> usize {
        self.geometry.element_count()
    }

    pub fn frequencies1(&self) -> &[f64] {
        &self.f1
    }

    pub fn frequencies2(&self) -> &[f64] {
        &self.f2
    }

    /// Whether both grids are the uniform half-wavelength grids.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// The explicit `M × L` matrix.
    pub fn matrix(&self) -> &Array2<Complex64> {
        self.rows.get_or_init(|| self.materialize())
    }

    fn materialize(&self) -> Array2<Complex64> {
        // Kronecker structure: entry = D1[m1, l1] · D2[m2, l2].
        let d1 = build_subdictionary(self.geometry.m1_count(), &self.f1).expect("m1_count >= 1");
        let d2 = build_subdictionary(self.geometry.m2_count(), &self.f2).expect("m2_count >= 1");
        let (l1n, l2n) = (self.l1(), self.l2());
        let mut out = Array2::zeros((self.rows(), self.columns()));
        for (mut row, (m1, m2)) in out.rows_mut().into_iter().zip(self.geometry.elements()) {
            let row = row.as_slice_mut().expect("fresh array is contiguous");
            for l2 in 0..l2n {
                let a2 = d2[[m2, l2]];
                let block = &mut row[l2 * l1n..(l2 + 1) * l1n];
                for (l1, v) in block.iter_mut().enumerate() {
                    *v = d1[[m1, l1]] * a2;
                }
            }
        }
        out
    }

    /// `D_s c`.
    pub fn apply_forward(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if c.len() != self.columns() {
            return Err(Error::invalid(format!(
                "coefficient length {} does not match dictionary width {}",
                c.len(),
                self.columns()
            )));
        }
        Ok(self
            .matrix()
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(c).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// `D_sᴴ y`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.rows() {
            return Err(Error::invalid(format!(
                "measurement length {} does not match element count {}",
                y.len(),
                self.rows()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.columns()];
        for (row, &ym) in self.matrix().rows().into_iter().zip(y) {
            for (o, a) in out.iter_mut().zip(row.iter()) {
                *o += a.conj() * ym;
            }
        }
        Ok(out)
    }

    /// Explicit Gram `D_sᴴ D_s`, `L × L`.
    pub fn dense_gram(&self, budget: MemoryBudget) -> Result<DenseMatrix> {
        let n = self.columns();
        let mut gram = DenseMatrix::zeros(n, budget)?;
        let d = self.matrix();
        let g = gram.as_array_mut();
        // row p of G accumulates conj(D[m, p]) · D[m, :] over the M rows
        for (p, mut grow) in g.rows_mut().into_iter().enumerate() {
            let grow = grow.as_slice_mut().expect("standard layout");
            for drow in d.rows() {
                let drow = drow.as_slice().expect("standard layout");
                let w = drow[p].conj();
                for (gv, dv) in grow.iter_mut().zip(drow) {
                    *gv += w * dv;
                }
            }
        }
        Ok(gram)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_values() {
        assert_eq!(UniformGrid::new(2).unwrap().frequencies(), &[-0.5, 0.0]);
        assert_eq!(UniformGrid::new(4).unwrap().frequencies(), &[-0.5, -0.25, 0.0, 0.25]);
        let g = UniformGrid::new(64).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.frequency(0), -0.5);
        for w in g.frequencies().windows(2) {
            assert!((w[1] - w[0] - 1.0 / 64.0).abs() < 1e-16);
        }
        assert!(g.frequencies().iter().all(|f| (-0.5..0.5).contains(f)));
        assert!(UniformGrid::new(0).is_err());
    }

    #[test]
    fn nearest_index_wraps() {
        let g = UniformGrid::new(8).unwrap();
        assert_eq!(g.nearest_index(-0.5), 0);
        assert_eq!(g.nearest_index(0.0), 4);
        assert_eq!(g.nearest_index(0.49), 0);
        assert_eq!(g.nearest_index(0.37), 7);
    }

    #[test]
    fn subdictionary_cases() {
        let grid = UniformGrid::new(4).unwrap();
        let d = build_subdictionary(1, grid.frequencies()).unwrap();
        assert!(d.iter().all(|v| *v == c(1.0, 0.0)));

        let d = build_subdictionary(4, grid.frequencies()).unwrap();
        assert!((d[[3, 1]] - c(0.0, -1.0)).norm() < 1e-15);
        let gram = d.t().mapv(|v| v.conj()).dot(&d);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 4.0 } else { 0.0 };
                assert!((gram[[i, j]] - c(expect, 0.0)).norm() < 1e-14);
            }
        }
        assert!(build_subdictionary(0, grid.frequencies()).is_err());
    }

    #[test]
    fn single_element_dictionary() {
        let g = ArrayGeometry::ura(1, 1).unwrap();
        let grid = UniformGrid::new(3).unwrap();
        let d = SubsampledDictionary::build(&g, &grid, &grid, MemoryBudget::default()).unwrap();
        assert_eq!(d.matrix().shape(), &[1, 9]);
        assert!(d.matrix().iter().all(|v| *v == c(1.0, 0.0)));
        let adj = d.apply_adjoint(&[c(1.0, 0.0)]).unwrap();
        assert!(adj.iter().all(|v| *v == c(1.0, 0.0)));
        let gram = d.dense_gram(MemoryBudget::default()).unwrap();
        assert!(gram.as_array().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn forward_basics() {
        let g = ArrayGeometry::ura(3, 2).unwrap();
        let grid1 = UniformGrid::new(4).unwrap();
        let grid2 = UniformGrid::new(2).unwrap();
        let d = SubsampledDictionary::build(&g, &grid1, &grid2, MemoryBudget::default()).unwrap();
        let zero = d.apply_forward(&vec![c(0.0, 0.0); 8]).unwrap();
        assert!(zero.iter().all(|v| *v == c(0.0, 0.0)));
        let mut e = vec![c(0.0, 0.0); 8];
        e[5] = c(1.0, 0.0);
        let col = d.apply_forward(&e).unwrap();
        for (m, v) in col.iter().enumerate() {
            assert_eq!(*v, d.matrix()[[m, 5]]);
        }
        assert!(d.apply_forward(&e[..7]).is_err());
        assert!(d.apply_adjoint(&[c(0.0, 0.0); 5]).is_err());
        assert!(d.apply_adjoint(&[c(0.0, 0.0); 6]).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dictionary_budget_guard() {
        let g = ArrayGeometry::ura(4, 4).unwrap();
        let grid = UniformGrid::new(32).unwrap();
        let err = SubsampledDictionary::build(&g, &grid, &grid, MemoryBudget(1000)).unwrap_err();
        assert!(matches!(err, Error::ResourceExceeded { required, .. } if required == 16 * 1024 * 16));
    }
}
