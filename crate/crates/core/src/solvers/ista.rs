//! Iterative shrinkage-thresholding.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use super::{check_finite, resolve_step_size, soft_threshold_scalar, LassoProblem, SolverConfig, SolverResult, Trace};
use crate::Result;

/// Runs `c ← S_{μτ}((I − μG)c + μb)` for `config.iterations` steps.
pub fn ista_solve(problem: LassoProblem<'_>, config: &SolverConfig) -> Result<SolverResult> {
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
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let mut trace = Trace::new(fit, tau, config);
    let mut elapsed = Duration::ZERO;

    for t in 1..=config.iterations {
        let start = Instant::now();
        iteration_op.apply_with(&c, &mut next, &mut ws);
        for (v, b) in next.iter_mut().zip(&mu_b) {
            *v = soft_threshold_scalar(*v + b, kappa);
        }
        check_finite(&next, t)?;
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
