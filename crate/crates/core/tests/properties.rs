mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use sparse2d_bccb::array::{angles_to_harmonics, harmonics_to_angles, synthesize_snapshot, ArrayGeometry, Target};
use sparse2d_bccb::bccb::{BccbOperator, FirstColumn};
use sparse2d_bccb::dictionary::{SubsampledDictionary, UniformGrid};
use sparse2d_bccb::experiment::relative_error;
use sparse2d_bccb::solvers::soft_threshold;
use sparse2d_bccb::MemoryBudget;

fn cvec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b)), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn soft_threshold_is_non_expansive(a in cvec(24), b in cvec(24), kappa in 0.0..3.0f64) {
        let sa = soft_threshold(&a, kappa).unwrap();
        let sb = soft_threshold(&b, kappa).unwrap();
        let d_out: Vec<Complex64> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
        let d_in: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assert!(norm(&d_out) <= norm(&d_in) * (1.0 + 1e-15) + 1e-300);
    }

    #[test]
    fn shrinkage_kills_everything_above_peak(a in cvec(16), extra in 0.0..1.0f64) {
        let peak = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let out = soft_threshold(&a, peak + extra).unwrap();
        prop_assert!(out.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn gram_matvec_is_linear(seed in any::<u64>(), alpha_re in -2.0..2.0f64, alpha_im in -2.0..2.0f64) {
        let mut rng = rng(seed);
        let geometry = random_geometry(&mut rng, 5, 4);
        let op = BccbOperator::gram(&geometry, 6, 5).unwrap();
        let (x1, x2) = (random_vector(&mut rng, 30), random_vector(&mut rng, 30));
        let alpha = c(alpha_re, alpha_im);
        let combo: Vec<Complex64> = x1.iter().zip(&x2).map(|(a, b)| alpha * a + b).collect();
        let lhs = op.apply(&combo).unwrap();
        let (y1, y2) = (op.apply(&x1).unwrap(), op.apply(&x2).unwrap());
        let rhs: Vec<Complex64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + b).collect();
        prop_assert!(rel_err(&rhs, &lhs) <= 1e-12);
    }

    #[test]
    fn thinning_preserves_aperture(seed in any::<u64>(), m1 in 2usize..20, m2 in 2usize..20, frac in 0.0..1.0f64) {
        let total = m1 * m2;
        let m = 4 + ((total - 4) as f64 * frac) as usize;
        let m = m.min(total);
        let g = ArrayGeometry::ura(m1, m2).unwrap().subsample_preserving_aperture(m, seed).unwrap();
        prop_assert_eq!(g.element_count(), m);
        prop_assert_eq!(g.elements().count(), m);
        prop_assert!(g.preserves_aperture());
    }

    #[test]
    fn angles_round_trip(phi in -3.14159..3.14159f64, theta in 0.001..(std::f64::consts::FRAC_PI_2 - 1e-3)) {
        let (f1, f2) = angles_to_harmonics(phi, theta).unwrap();
        let (p, t) = harmonics_to_angles(f1, f2).unwrap();
        prop_assert!((p - phi).abs() < 1e-9 && (t - theta).abs() < 1e-9);
    }

    #[test]
    fn noiseless_synthesis_is_linear(seed in any::<u64>(), f in prop::collection::vec(-0.5..0.5f64, 4)) {
        let mut rng = rng(seed);
        let geometry = random_geometry(&mut rng, 6, 5);
        let a = Target::new(f[0], f[1], c(0.7, -0.2)).unwrap();
        let b = Target::new(f[2], f[3], c(-0.1, 1.1)).unwrap();
        let ya = synthesize_snapshot(&geometry, &[a], 0.0, 1).unwrap().values;
        let yb = synthesize_snapshot(&geometry, &[b], 0.0, 1).unwrap().values;
        let yab = synthesize_snapshot(&geometry, &[a, b], 0.0, 1).unwrap().values;
        for ((p, q), r) in ya.iter().zip(&yb).zip(&yab) {
            prop_assert!((p + q - r).norm() < 1e-13);
        }
    }

    #[test]
    fn gram_is_hermitian_psd_with_trace_identity(seed in any::<u64>(), l1 in 1usize..10, l2 in 1usize..8) {
        let mut rng = rng(seed);
        let geometry = random_geometry(&mut rng, 5, 5);
        let op = BccbOperator::gram(&geometry, l1, l2).unwrap();
        let s = op.spectrum();
        let ml = (geometry.element_count() * l1 * l2) as f64;
        prop_assert!((s.sum - c(ml, 0.0)).norm() <= 1e-8 * ml);
        prop_assert!(s.min_real >= -1e-8 * s.max_real);
        prop_assert!(s.max_abs_imag <= 1e-8 * s.max_real);
        let g1 = UniformGrid::new(l1).unwrap();
        let g2 = UniformGrid::new(l2).unwrap();
        let dense = SubsampledDictionary::build(&geometry, &g1, &g2, MemoryBudget::default())
            .unwrap()
            .dense_gram(MemoryBudget::default())
            .unwrap();
        prop_assert!(dense.hermitian_deviation() <= 1e-12);
    }

    #[test]
    fn shifted_inverse_round_trips(seed in any::<u64>(), rho in 0.05..5.0f64) {
        let mut rng = rng(seed);
        let geometry = random_geometry(&mut rng, 4, 4);
        let op = BccbOperator::gram(&geometry, 5, 4).unwrap().scale_add_identity(c(1.0, 0.0), c(rho, 0.0));
        let inv = op.inverse().unwrap();
        let x = random_vector(&mut rng, 20);
        let back = inv.apply(&op.apply(&x).unwrap()).unwrap();
        prop_assert!(rel_err(&x, &back) <= 1e-8);
    }

    #[test]
    fn first_column_round_trips(seed in any::<u64>(), l1 in 1usize..7, l2 in 1usize..7) {
        let mut rng = rng(seed);
        let r = random_vector(&mut rng, l1 * l2);
        let op = BccbOperator::from_first_column(&FirstColumn::new(l1, l2, r.clone()).unwrap()).unwrap();
        let dense = op.to_dense(64).unwrap();
        let column: Vec<Complex64> = dense.column(0).to_vec();
        let again = BccbOperator::from_first_column(&FirstColumn::new(l1, l2, column).unwrap()).unwrap();
        prop_assert!(rel_err(&r, &again.first_column().values) <= 1e-10);
    }

    #[test]
    fn relative_error_matches_naive_sum(a in cvec(12), b in cvec(12)) {
        prop_assume!(norm(&a) > 1e-6);
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in a.iter().zip(&b) {
            num += (x.re - y.re).powi(2) + (x.im - y.im).powi(2);
            den += x.re * x.re + x.im * x.im;
        }
        let expect = (num / den).sqrt();
        let got = relative_error(&a, &b).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12 * expect.max(1e-300));
    }
}
