#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse2d_bccb::array::ArrayGeometry;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Random nonempty subset of an `m1 × m2` grid.
pub fn random_geometry(rng: &mut ChaCha8Rng, m1: usize, m2: usize) -> ArrayGeometry {
    let mut elements = Vec::new();
    let keep = rng.random_range(0.2..0.9);
    for b in 0..m2 {
        for a in 0..m1 {
            if rng.random_bool(keep) {
                elements.push((a, b));
            }
        }
    }
    if elements.is_empty() {
        elements.push((rng.random_range(0..m1), rng.random_range(0..m2)));
    }
    ArrayGeometry::from_elements(m1, m2, &elements).unwrap()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_err(reference: &[Complex64], x: &[Complex64]) -> f64 {
    let diff: Vec<Complex64> = reference.iter().zip(x).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(reference)
}

pub fn dense_matvec(a: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Explicit BCCB matrix with first column `r` (`r[l1 + l2·L1]`).
pub fn bccb_from_column(r: &[Complex64], l1: usize, l2: usize) -> Array2<Complex64> {
    let n = l1 * l2;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let (i1, i2) = (i % l1, i / l1);
        let (j1, j2) = (j % l1, j / l1);
        r[(i1 + l1 - j1) % l1 + ((i2 + l2 - j2) % l2) * l1]
    })
}
