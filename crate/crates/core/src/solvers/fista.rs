//! Accelerated proximal gradient (FISTA).

use std::time::{Duration, Instant};

use num_complex::Complex64;

use super::{check_finite, resolve_step_size, soft_threshold_scalar, LassoProblem, SolverConfig, SolverResult, Trace};
use crate::Result;

/// Momentum sequence update `α' = (√(1 + 4α²) + 1) / 2`.
pub fn next_alpha(alpha: f64) -> f64 {
    ((1.0 + 4.0 * alpha * alpha).sqrt() + 1.0) / 2.0
}

/// FISTA from `z = c⁽⁰⁾`, `α = 1`:
///
/// ```text
/// c⁽ᵗ⁾   = S_{μτ}((I − μG) z⁽ᵗ⁾ + μb)
/// α⁽ᵗ⁺¹⁾ = (√(1 + 4(α⁽ᵗ⁾)²) + 1) / 2
/// z⁽ᵗ⁺¹⁾ = c⁽ᵗ⁾ + (α⁽ᵗ⁾ − 1)/α⁽ᵗ⁺¹⁾ · (c⁽ᵗ⁾ − c⁽ᵗ⁻¹⁾)
/// ```
///
/// The first momentum coefficient is zero, so one FISTA step is one ISTA step.
pub fn fista_solve(problem: LassoProblem<'_>, config: &SolverConfig) -> Result<SolverResult> {
    let n = problem.dim();
    config.validate(n)?;
    let mu = resolve_step_size(&problem.gram, config)?;
    let LassoProblem { gram, rhs, tau, fit } = problem;
    let backend = gram.backend();
    let kappa = mu * tau;

    let prep = Instant::now();
    let iteration_op = gram.scale_add_identity(-mu, 1.0);
    let mu_b: Vec<Complex64> = rhs.iter().map(|b| b * mu).collect();
    let precompute = prep.elapsed();

    let mut ws = iteration_op.workspace();
    let mut c = config.initial_vector(n);
    let mut z = c.clone();
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut alpha = 1.0;
    let mut trace = Trace::new(fit, tau, config);
    let mut elapsed = Duration::ZERO;

    for t in 1..=config.iterations {
        let start = Instant::now();
        iteration_op.apply_with(&z, &mut next, &mut ws);
        for (v, b) in next.iter_mut().zip(&mu_b) {
            *v = soft_threshold_scalar(*v + b, kappa);
        }
        check_finite(&next, t)?;
        let alpha_next = next_alpha(alpha);
        let beta = (alpha - 1.0) / alpha_next;
        for ((zi, cur), prev) in z.iter_mut().zip(&next).zip(&c) {
            *zi = cur + (cur - prev) * beta;
        }
        alpha = alpha_next;
        std::mem::swap(&mut c, &mut next);
        elapsed += start.elapsed();
        trace.record(&c)?;
    }

    let total = elapsed.as_secs_f64();
    Ok(SolverResult {
        estimate: c,
        objective_trace: trace.values,
        iterations: config.iterations,
        per_iteration_seconds: total / config.iterations as f64,
        total_seconds: total,
        precompute_seconds: precompute.as_secs_f64(),
        backend,
        step_size: mu,
        threshold: kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_sequence_grows_at_least_linearly() {
        let mut alpha = 1.0;
        for t in 0..10_000 {
            assert!(alpha >= (t as f64 + 1.0) / 2.0, "t = {t}");
            alpha = next_alpha(alpha);
        }
        assert!((next_alpha(1.0) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }
}
