//! ADMM for the LASSO.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use super::{check_finite, soft_threshold_scalar, GramOperator, LassoProblem, SolverConfig, SolverResult, Trace, Workspace};
use crate::{Error, Result};

/// ADMM state with the precomputed `P = (G + ρI)⁻¹` and `q = P b`.
///
/// ```text
/// c⁽ᵗ⁺¹⁾ = q + ρ P (z⁽ᵗ⁾ − v⁽ᵗ⁾)
/// z⁽ᵗ⁺¹⁾ = S_{ρτ}(c⁽ᵗ⁺¹⁾ + v⁽ᵗ⁾)
/// v⁽ᵗ⁺¹⁾ = v⁽ᵗ⁾ + c⁽ᵗ⁺¹⁾ − z⁽ᵗ⁺¹⁾
/// ```
#[derive(Debug)]
pub struct AdmmIteration {
    inverse: GramOperator,
    q: Vec<Complex64>,
    rho: f64,
    threshold: f64,
    c: Vec<Complex64>,
    z: Vec<Complex64>,
    v: Vec<Complex64>,
    work: Vec<Complex64>,
    ws: Workspace,
}

impl AdmmIteration {
    /// Precomputes `P` and `q`; consumes the Gram (dense matrices are inverted in place).
    pub fn new(gram: GramOperator, rhs: &[Complex64], tau: f64, rho: f64, z0: Vec<Complex64>) -> Result<Self> {
        let n = gram.dim();
        if rhs.len() != n || z0.len() != n {
            return Err(Error::invalid("ADMM vectors must match the operator size"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        let inverse = gram.shifted_inverse(rho)?;
        let mut ws = inverse.workspace();
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        inverse.apply_with(rhs, &mut q, &mut ws);
        Ok(AdmmIteration {
            inverse,
            q,
            rho,
            threshold: rho * tau,
            c: vec![Complex64::new(0.0, 0.0); n],
            z: z0,
            v: vec![Complex64::new(0.0, 0.0); n],
            work: vec![Complex64::new(0.0, 0.0); n],
            ws,
        })
    }

    pub fn step(&mut self) {
        for ((w, z), v) in self.work.iter_mut().zip(&self.z).zip(&self.v) {
            *w = z - v;
        }
        self.inverse.apply_with(&self.work, &mut self.c, &mut self.ws);
        for (((c, q), z), v) in self.c.iter_mut().zip(&self.q).zip(self.z.iter_mut()).zip(self.v.iter_mut()) {
            *c = q + *c * self.rho;
            *z = soft_threshold_scalar(*c + *v, self.threshold);
            *v += *c - *z;
        }
    }

    pub fn c(&self) -> &[Complex64] {
        &self.c
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn into_estimate(self) -> Vec<Complex64> {
        self.z
    }
}

/// Runs ADMM for `config.iterations` steps and returns `z⁽ᵀ⁾`.
pub fn admm_solve(problem: LassoProblem<'_>, config: &SolverConfig) -> Result<SolverResult> {
    let n = problem.dim();
    config.validate(n)?;
    let LassoProblem { gram, rhs, tau, fit } = problem;
    let backend = gram.backend();

    let prep = Instant::now();
    let mut state = AdmmIteration::new(gram, &rhs, tau, config.rho, config.initial_vector(n))?;
    let precompute = prep.elapsed();

    let mut trace = Trace::new(fit, tau, config);
    let mut elapsed = Duration::ZERO;
    for t in 1..=config.iterations {
        let start = Instant::now();
        state.step();
        check_finite(state.z(), t)?;
        check_finite(state.c(), t)?;
        elapsed += start.elapsed();
        trace.record(state.z())?;
    }

    let total = elapsed.as_secs_f64();
    let threshold = state.threshold();
    Ok(SolverResult {
        estimate: state.into_estimate(),
        objective_trace: trace.values,
        iterations: config.iterations,
        per_iteration_seconds: total / config.iterations as f64,
        total_seconds: total,
        precompute_seconds: precompute.as_secs_f64(),
        backend,
        step_size: config.rho,
        threshold,
    })
}
