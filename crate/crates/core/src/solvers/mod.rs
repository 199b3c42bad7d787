//! LASSO solvers (ISTA, FISTA, ADMM) over an abstract Gram operator.
//!
//! Every solver needs products with a matrix derived from `G = D_sᴴ D_s`:
//! `I - μG` for the proximal-gradient methods and `(G + ρI)⁻¹` for ADMM.
//! Both stay BCCB when `G` is, so the same solver code runs on either a
//! dense matrix ([`Backend::Regular`], `O(L²)` per product) or an FFT
//! diagonalized operator ([`Backend::Fast`], `O(L log L)` per product).
//!
//! Only the iteration loops are timed; deriving the iteration matrix
//! from `G` is reported separately as precomputation.

mod admm;
mod fista;
mod ista;
mod support;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bccb::BccbOperator;
use crate::dense::DenseMatrix;
use crate::dictionary::SubsampledDictionary;
use crate::fft2::Fft2dScratch;
use crate::{Error, MemoryBudget, Result};

pub use admm::{admm_solve, AdmmIteration};
pub use fista::{fista_solve, next_alpha};
pub use ista::ista_solve;
pub use support::{extract_support, SupportEntry};

/// Inflation applied to the power-iteration estimate before taking `μ = 1/λ_max`.
pub const STEP_SIZE_SAFETY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Dense precomputed matrices.
    Regular,
    /// BCCB eigenvalues and 2D FFTs.
    Fast,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Regular => "regular",
            Backend::Fast => "fast",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular" | "dense" => Ok(Backend::Regular),
            "fast" | "fft" | "bccb" => Ok(Backend::Fast),
            other => Err(Error::invalid(format!("unknown backend `{other}`"))),
        }
    }
}

/// Minimal square linear-operator interface.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = A x`; both slices have length `dim()`.
    fn apply_to(&self, x: &[Complex64], out: &mut [Complex64]);
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        DenseMatrix::dim(self)
    }

    fn apply_to(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.matvec_into(x, out)
    }
}

impl LinearOperator for BccbOperator {
    fn dim(&self) -> usize {
        BccbOperator::dim(self)
    }

    fn apply_to(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_into(x, out, &mut self.scratch())
    }
}

/// A Hermitian operator derived from the Gram, in either backend.
#[derive(Debug, Clone)]
pub enum GramOperator {
    Dense(DenseMatrix),
    Bccb(BccbOperator),
}

/// Scratch memory for [`GramOperator::apply_with`].
#[derive(Debug, Clone)]
pub struct Workspace(Option<Fft2dScratch>);

impl GramOperator {
    pub fn backend(&self) -> Backend {
        match self {
            GramOperator::Dense(_) => Backend::Regular,
            GramOperator::Bccb(_) => Backend::Fast,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GramOperator::Dense(m) => m.dim(),
            GramOperator::Bccb(op) => op.dim(),
        }
    }

    pub fn workspace(&self) -> Workspace {
        match self {
            GramOperator::Dense(_) => Workspace(None),
            GramOperator::Bccb(op) => Workspace(Some(op.scratch())),
        }
    }

    pub fn apply_with(&self, x: &[Complex64], out: &mut [Complex64], ws: &mut Workspace) {
        match self {
            GramOperator::Dense(m) => m.matvec_into(x, out),
            GramOperator::Bccb(op) => {
                let scratch = ws.0.get_or_insert_with(|| op.scratch());
                op.apply_into(x, out, scratch)
            }
        }
    }

    /// `alpha·A + beta·I`; dense matrices are updated in place.
    pub fn scale_add_identity(self, alpha: f64, beta: f64) -> Self {
        let (a, b) = (Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0));
        match self {
            GramOperator::Dense(m) => GramOperator::Dense(m.scale_add_identity(a, b)),
            GramOperator::Bccb(op) => GramOperator::Bccb(op.scale_add_identity(a, b)),
        }
    }

    /// `(A + rho·I)⁻¹`: a dense Cholesky inverse or an eigenvalue reciprocal.
    pub fn shifted_inverse(self, rho: f64) -> Result<Self> {
        match self.scale_add_identity(1.0, rho) {
            GramOperator::Dense(m) => Ok(GramOperator::Dense(m.inverse_hermitian_pd()?)),
            GramOperator::Bccb(op) => Ok(GramOperator::Bccb(op.inverse()?)),
        }
    }
}

impl LinearOperator for GramOperator {
    fn dim(&self) -> usize {
        GramOperator::dim(self)
    }

    fn apply_to(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_with(x, out, &mut self.workspace())
    }
}

/// Measurement model used to evaluate the data-fit term of the objective.
#[derive(Debug, Clone, Copy)]
pub struct DataFit<'a> {
    pub dictionary: &'a SubsampledDictionary,
    pub measurements: &'a [Complex64],
}

/// `min_c ‖y_s − D_s c‖² + τ‖c‖₁`, described through its Gram operator and
/// adjoint right-hand side `b = D_sᴴ y_s`.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    gram: GramOperator,
    rhs: Vec<Complex64>,
    tau: f64,
    fit: Option<DataFit<'a>>,
}

impl<'a> LassoProblem<'a> {
    pub fn new(gram: GramOperator, rhs: Vec<Complex64>, tau: f64) -> Result<Self> {
        if rhs.len() != gram.dim() {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, operator has size {}",
                rhs.len(),
                gram.dim()
            )));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive and finite, got {tau}")));
        }
        Ok(LassoProblem {
            gram,
            rhs,
            tau,
            fit: None,
        })
    }

    /// Builds `G` in the requested backend and `b = D_sᴴ y` from a dictionary.
    /// Attaches the dictionary so objective traces can be recorded.
    pub fn from_dictionary(
        dictionary: &'a SubsampledDictionary,
        measurements: &'a [Complex64],
        tau: f64,
        backend: Backend,
        budget: MemoryBudget,
    ) -> Result<Self> {
        let rhs = dictionary.apply_adjoint(measurements)?;
        let gram = match backend {
            Backend::Regular => GramOperator::Dense(dictionary.dense_gram(budget)?),
            Backend::Fast => {
                if !dictionary.is_uniform() {
                    return Err(Error::invalid(
                        "the fast backend needs uniform half-wavelength grids",
                    ));
                }
                GramOperator::Bccb(BccbOperator::gram(
                    dictionary.geometry(),
                    dictionary.l1(),
                    dictionary.l2(),
                )?)
            }
        };
        Self::new(gram, rhs, tau)?.with_data_fit(DataFit {
            dictionary,
            measurements,
        })
    }

    pub fn with_data_fit(mut self, fit: DataFit<'a>) -> Result<Self> {
        if fit.dictionary.columns() != self.dim() || fit.measurements.len() != fit.dictionary.rows() {
            return Err(Error::invalid("data fit dimensions do not match the problem"));
        }
        self.fit = Some(fit);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn gram(&self) -> &GramOperator {
        &self.gram
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn backend(&self) -> Backend {
        self.gram.backend()
    }

    pub fn data_fit(&self) -> Option<DataFit<'a>> {
        self.fit
    }
}

/// Settings for [`max_gram_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol: 1e-10,
            max_iter: 5000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Fixed iteration count `T`.
    pub iterations: usize,
    /// ISTA/FISTA step `μ`; `None` means `1 / (λ̂_max·(1 + 1e-6))`.
    pub step_size: Option<f64>,
    /// ADMM penalty `ρ`.
    pub rho: f64,
    /// `c⁽⁰⁾` (ISTA/FISTA) or `z⁽⁰⁾` (ADMM); zero when absent.
    pub initial: Option<Vec<Complex64>>,
    /// Record `½‖y − D c‖² + τ‖c‖₁` after every iteration (needs a data fit).
    pub record_objective: bool,
    pub power_iteration: PowerIteration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iterations: 100,
            step_size: None,
            rho: 1.0,
            initial: None,
            record_objective: true,
            power_iteration: PowerIteration::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        SolverConfig {
            iterations,
            ..Default::default()
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        if let Some(mu) = self.step_size {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::invalid(format!("step size must be positive, got {mu}")));
            }
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if let Some(init) = &self.initial {
            if init.len() != dim {
                return Err(Error::invalid(format!(
                    "initial vector has length {}, expected {dim}",
                    init.len()
                )));
            }
        }
        Ok(())
    }

    fn initial_vector(&self, dim: usize) -> Vec<Complex64> {
        self.initial
            .clone()
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); dim])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    /// `ĉ`: `c⁽ᵀ⁾` for ISTA/FISTA, `z⁽ᵀ⁾` for ADMM.
    pub estimate: Vec<Complex64>,
    /// One entry per iteration when recorded, otherwise empty.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub per_iteration_seconds: f64,
    /// Wall-clock time of the iteration loop only.
    pub total_seconds: f64,
    /// Time to derive the iteration operator (and `q` for ADMM) from `G`.
    pub precompute_seconds: f64,
    pub backend: Backend,
    /// `μ` for ISTA/FISTA, `ρ` for ADMM.
    pub step_size: f64,
    /// Soft-threshold level used in the iterations.
    pub threshold: f64,
}

/// `S_κ(z) = exp(j arg z)·max(|z| − κ, 0)`.
#[inline]
pub fn soft_threshold_scalar(z: Complex64, kappa: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= kappa {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((mag - kappa) / mag)
    }
}

/// Entrywise complex soft-thresholding. `kappa` must be nonnegative.
pub fn soft_threshold(z: &[Complex64], kappa: f64) -> Result<Vec<Complex64>> {
    if !(kappa >= 0.0) {
        return Err(Error::invalid(format!("threshold must be nonnegative, got {kappa}")));
    }
    Ok(z.iter().map(|&v| soft_threshold_scalar(v, kappa)).collect())
}

/// Largest eigenvalue of a Hermitian PSD operator by power iteration.
///
/// Stops when the Rayleigh quotient changes by at most `tol` relative.
pub fn max_gram_eigenvalue<O: LinearOperator + ?Sized>(op: &O, opts: PowerIteration) -> Result<f64> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("operator has zero size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    normalize(&mut v);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut previous = f64::NAN;
    for k in 1..=opts.max_iter {
        op.apply_to(&v, &mut w);
        let estimate: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        if !estimate.is_finite() {
            return Err(Error::Divergence { iteration: k });
        }
        if normalize(&mut w) == 0.0 {
            return Ok(0.0);
        }
        std::mem::swap(&mut v, &mut w);
        if k > 1 && (estimate - previous).abs() <= opts.tol * estimate.abs() {
            return Ok(estimate);
        }
        previous = estimate;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        estimate: previous,
    })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = l2_norm(v);
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖y − D_s c‖₂² + τ‖c‖₁`.
pub fn lasso_objective(
    dictionary: &SubsampledDictionary,
    measurements: &[Complex64],
    c: &[Complex64],
    tau: f64,
) -> Result<f64> {
    if measurements.len() != dictionary.rows() {
        return Err(Error::invalid("measurement length does not match the dictionary"));
    }
    let predicted = dictionary.apply_forward(c)?;
    let data: f64 = measurements
        .iter()
        .zip(&predicted)
        .map(|(y, p)| (y - p).norm_sqr())
        .sum();
    let l1: f64 = c.iter().map(|x| x.norm()).sum();
    Ok(data + tau * l1)
}

/// The objective the proximal iterations descend: `½‖y − D_s c‖² + τ‖c‖₁`.
fn traced_objective(fit: &DataFit<'_>, c: &[Complex64], tau: f64) -> Result<f64> {
    Ok(0.5 * lasso_objective(fit.dictionary, fit.measurements, c, 2.0 * tau)?)
}

/// Step size from the configuration or from power iteration on `G`.
pub fn resolve_step_size(gram: &GramOperator, config: &SolverConfig) -> Result<f64> {
    match config.step_size {
        Some(mu) => Ok(mu),
        None => {
            let lambda = max_gram_eigenvalue(gram, config.power_iteration)?;
            if lambda <= 0.0 {
                return Err(Error::invalid("Gram operator has no positive eigenvalue"));
            }
            Ok(1.0 / (lambda * (1.0 + STEP_SIZE_SAFETY)))
        }
    }
}

fn check_finite(v: &[Complex64], iteration: usize) -> Result<()> {
    if v.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence { iteration })
    }
}

/// Objective recorder shared by the three solvers.
struct Trace<'a> {
    fit: Option<DataFit<'a>>,
    tau: f64,
    values: Vec<f64>,
}

impl<'a> Trace<'a> {
    fn new(problem_fit: Option<DataFit<'a>>, tau: f64, config: &SolverConfig) -> Self {
        let fit = problem_fit.filter(|_| config.record_objective);
        Trace {
            fit,
            tau,
            values: Vec::with_capacity(if fit.is_some() { config.iterations } else { 0 }),
        }
    }

    fn record(&mut self, c: &[Complex64]) -> Result<()> {
        if let Some(fit) = &self.fit {
            self.values.push(traced_objective(fit, c, self.tau)?);
        }
        Ok(())
    }
}
