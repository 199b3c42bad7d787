//! Seeded sweeps comparing the regular and fast solver backends.
//!
//! Each trial draws a sparse geometry, a random source scene and a noisy
//! snapshot, then solves the same LASSO problem (same `μ`, `ρ`, `τ`, `T`)
//! with both backends. Recorded per trial: the iteration-loop wall time of
//! each backend and the relative discrepancy `ε_r = ‖ĉ_reg − ĉ_fast‖ / ‖ĉ_reg‖`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{snr_to_noise_variance, synthesize_snapshot, ArrayGeometry, Snapshot, Target};
use crate::bccb::BccbOperator;
use crate::dense::DenseMatrix;
use crate::dictionary::{SubsampledDictionary, UniformGrid};
use crate::solvers::{
    admm_solve, fista_solve, ista_solve, max_gram_eigenvalue, GramOperator, LassoProblem,
    PowerIteration, SolverConfig, SolverResult, STEP_SIZE_SAFETY,
};
use crate::{Error, MemoryBudget, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ista,
    Fista,
    Admm,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::Ista, SolverKind::Fista, SolverKind::Admm];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ista => "ista",
            SolverKind::Fista => "fista",
            SolverKind::Admm => "admm",
        }
    }

    fn seed_id(self) -> u64 {
        match self {
            SolverKind::Ista => 1,
            SolverKind::Fista => 2,
            SolverKind::Admm => 3,
        }
    }

    /// Dispatches to the matching solver.
    pub fn solve(self, problem: LassoProblem<'_>, config: &SolverConfig) -> Result<SolverResult> {
        match self {
            SolverKind::Ista => ista_solve(problem, config),
            SolverKind::Fista => fista_solve(problem, config),
            SolverKind::Admm => admm_solve(problem, config),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ista" => Ok(SolverKind::Ista),
            "fista" => Ok(SolverKind::Fista),
            "admm" => Ok(SolverKind::Admm),
            other => Err(Error::invalid(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub m1_count: usize,
    pub m2_count: usize,
    pub element_count: usize,
    pub l2: usize,
    pub l1_values: Vec<usize>,
    pub iteration_values: Vec<usize>,
    pub snr_db: f64,
    /// Inclusive range for the number of sources `K`.
    pub k_range: (usize, usize),
    pub trials: usize,
    pub base_seed: u64,
    pub solvers: Vec<SolverKind>,
    /// Dense problems above this size skip the regular backend.
    pub memory_budget: MemoryBudget,
    /// `τ = tau_fraction · ‖D_sᴴ y_s‖_∞`.
    pub tau_fraction: f64,
    pub rho: f64,
}

impl Default for ExperimentConfig {
    /// 51×16 URA thinned to 40 elements, `L2 = 32`, `L1 ∈ {64, …, 512}`,
    /// `T ∈ {50, …, 400}`, 15 dB SNR, 1–10 sources, 10 trials.
    fn default() -> Self {
        ExperimentConfig {
            m1_count: 51,
            m2_count: 16,
            element_count: 40,
            l2: 32,
            l1_values: vec![64, 128, 256, 512],
            iteration_values: vec![50, 100, 200, 400],
            snr_db: 15.0,
            k_range: (1, 10),
            trials: 10,
            base_seed: 2025,
            solvers: SolverKind::ALL.to_vec(),
            memory_budget: MemoryBudget::default(),
            tau_fraction: 0.1,
            rho: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1_count", self.m1_count),
            ("m2_count", self.m2_count),
            ("element_count", self.element_count),
            ("l2", self.l2),
            ("trials", self.trials),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if self.element_count > self.m1_count * self.m2_count {
            return Err(Error::invalid("element_count exceeds the URA size"));
        }
        if self.l1_values.is_empty() || self.l1_values.contains(&0) {
            return Err(Error::invalid("l1_values must be nonempty and positive"));
        }
        if self.iteration_values.is_empty() || self.iteration_values.contains(&0) {
            return Err(Error::invalid("iteration_values must be nonempty and positive"));
        }
        let (lo, hi) = self.k_range;
        if lo == 0 || hi < lo {
            return Err(Error::invalid(format!("k_range ({lo}, {hi}) must satisfy 1 <= min <= max")));
        }
        if self.solvers.is_empty() {
            return Err(Error::invalid("at least one solver is required"));
        }
        if !(self.tau_fraction > 0.0 && self.tau_fraction.is_finite()) {
            return Err(Error::invalid("tau_fraction must be positive"));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::invalid("rho must be positive"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::invalid("snr_db must be finite"));
        }
        Ok(())
    }
}

/// Timings and discrepancy of one trial. Regular-backend fields are
/// `None` when the dense problem did not fit the memory budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub solver: SolverKind,
    pub l1: usize,
    pub l2: usize,
    pub n_iter: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub sources: usize,
    /// Nonzero entries of the fast-backend estimate.
    pub nonzeros: usize,
    pub t_reg_ms: Option<f64>,
    pub t_fast_ms: f64,
    pub epsilon_r: Option<f64>,
    pub precompute_reg_ms: Option<f64>,
    pub precompute_fast_ms: f64,
}

/// Per-cell means over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub solver: SolverKind,
    pub l1: usize,
    pub l2: usize,
    pub n_iter: usize,
    pub trials: usize,
    pub mean_t_reg_ms: Option<f64>,
    pub mean_t_fast_ms: f64,
    pub mean_epsilon_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub records: Vec<TrialRecord>,
    pub cells: Vec<CellSummary>,
}

/// A drawn scene: geometry, sources and the noisy snapshot.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub targets: Vec<Target>,
    pub snapshot: Snapshot,
}

/// Mixes a base seed with cell coordinates (splitmix64 finalizer per part).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |h, &p| mix(h ^ mix(p)))
}

/// `‖a − b‖₂ / ‖a‖₂`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "vectors have different lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let reference = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(diff / reference)
}

/// `count` sources with harmonics uniform on `[-1/2, 1/2)²` and
/// unit-modulus amplitudes of uniform phase.
pub fn random_targets(count: usize, seed: u64) -> Result<Vec<Target>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f1 = rng.random_range(-0.5..0.5);
            let f2 = rng.random_range(-0.5..0.5);
            let phase = rng.random_range(0.0..TAU);
            Target::new(f1, f2, Complex64::from_polar(1.0, phase))
        })
        .collect()
}

/// Draws the trial scene for `seed`: a thinned geometry, `K` off-grid
/// sources from [`random_targets`] and a noisy snapshot.
pub fn generate_scenario(config: &ExperimentConfig, seed: u64) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometry_seed: u64 = rng.random();
    let noise_seed: u64 = rng.random();
    let geometry = ArrayGeometry::ura(config.m1_count, config.m2_count)?
        .subsample_preserving_aperture(config.element_count, geometry_seed)?;
    let k = rng.random_range(config.k_range.0..=config.k_range.1);
    let targets = random_targets(k, rng.random())?;
    let noise_variance = snr_to_noise_variance(&targets, config.snr_db)?;
    let snapshot = synthesize_snapshot(&geometry, &targets, noise_variance, noise_seed)?;
    Ok(Scenario {
        geometry,
        targets,
        snapshot,
    })
}

/// Runs one `(solver, L1, T, trial)` cell entry on both backends.
pub fn run_trial(
    config: &ExperimentConfig,
    solver: SolverKind,
    l1: usize,
    n_iter: usize,
    trial_index: usize,
) -> Result<TrialRecord> {
    config.validate()?;
    let seed = derive_seed(
        config.base_seed,
        &[solver.seed_id(), l1 as u64, n_iter as u64, trial_index as u64],
    );
    let scenario = generate_scenario(config, seed)?;
    let grid1 = UniformGrid::new(l1)?;
    let grid2 = UniformGrid::new(config.l2)?;
    let dictionary =
        SubsampledDictionary::build(&scenario.geometry, &grid1, &grid2, config.memory_budget)?;
    let rhs = dictionary.apply_adjoint(&scenario.snapshot.values)?;
    let peak = rhs.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::invalid("adjoint image of the snapshot is identically zero"));
    }
    let tau = config.tau_fraction * peak;

    let fast_start = Instant::now();
    let fast_gram = BccbOperator::gram(&scenario.geometry, l1, config.l2)?;
    let fast_build = fast_start.elapsed().as_secs_f64();

    // shared step size: power iteration on the fast operator
    let lambda = max_gram_eigenvalue(&fast_gram, PowerIteration::default())?;
    let solver_config = SolverConfig {
        iterations: n_iter,
        step_size: Some(1.0 / (lambda * (1.0 + STEP_SIZE_SAFETY))),
        rho: config.rho,
        initial: None,
        record_objective: false,
        power_iteration: PowerIteration::default(),
    };

    let dense_bytes = DenseMatrix::bytes_for(dictionary.columns());
    let regular = if config.memory_budget.admits(dense_bytes) {
        let start = Instant::now();
        let gram = dictionary.dense_gram(config.memory_budget)?;
        let build = start.elapsed().as_secs_f64();
        let problem = LassoProblem::new(GramOperator::Dense(gram), rhs.clone(), tau)?;
        let result = solver.solve(problem, &solver_config)?;
        Some((build, result))
    } else {
        None
    };

    let problem = LassoProblem::new(GramOperator::Bccb(fast_gram), rhs, tau)?;
    let fast = solver.solve(problem, &solver_config)?;

    let epsilon_r = match &regular {
        Some((_, reg)) => Some(match relative_error(&reg.estimate, &fast.estimate) {
            Ok(e) => e,
            Err(Error::ZeroReference) if fast.estimate.iter().all(|v| v.norm() == 0.0) => 0.0,
            Err(e) => return Err(e),
        }),
        None => None,
    };

    Ok(TrialRecord {
        solver,
        l1,
        l2: config.l2,
        n_iter,
        trial_index,
        seed,
        sources: scenario.targets.len(),
        nonzeros: fast.estimate.iter().filter(|v| v.norm() != 0.0).count(),
        t_reg_ms: regular.as_ref().map(|(_, r)| r.total_seconds * 1e3),
        t_fast_ms: fast.total_seconds * 1e3,
        epsilon_r,
        precompute_reg_ms: regular
            .as_ref()
            .map(|(build, r)| (build + r.precompute_seconds) * 1e3),
        precompute_fast_ms: (fast_build + fast.precompute_seconds) * 1e3,
    })
}

/// Full sweep over solvers × `L1` × `T` × trials, strictly sequential.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridReport> {
    run_grid_with(config, |_| {})
}

/// [`run_grid`] with a callback invoked after every trial.
pub fn run_grid_with(
    config: &ExperimentConfig,
    mut on_record: impl FnMut(&TrialRecord),
) -> Result<GridReport> {
    config.validate()?;
    let mut records = Vec::new();
    for &solver in &config.solvers {
        for &l1 in &config.l1_values {
            for &n_iter in &config.iteration_values {
                for trial in 0..config.trials {
                    let record = run_trial(config, solver, l1, n_iter, trial).map_err(|e| {
                        Error::InvalidArgument(format!(
                            "trial {trial} of cell ({solver}, L1={l1}, n_iter={n_iter}) failed: {e}"
                        ))
                    })?;
                    on_record(&record);
                    records.push(record);
                }
            }
        }
    }
    let cells = summarize(&records);
    Ok(GridReport { records, cells })
}

/// Groups records by `(solver, L1, L2, T)` in first-seen order and averages them.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(SolverKind, usize, usize, usize)> = Vec::new();
    for r in records {
        let key = (r.solver, r.l1, r.l2, r.n_iter);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(solver, l1, l2, n_iter)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| (r.solver, r.l1, r.l2, r.n_iter) == (solver, l1, l2, n_iter))
                .collect();
            let n = group.len() as f64;
            let mean_opt = |f: &dyn Fn(&TrialRecord) -> Option<f64>| -> Option<f64> {
                group
                    .iter()
                    .map(|r| f(r))
                    .sum::<Option<f64>>()
                    .map(|s| s / n)
            };
            CellSummary {
                solver,
                l1,
                l2,
                n_iter,
                trials: group.len(),
                mean_t_reg_ms: mean_opt(&|r| r.t_reg_ms),
                mean_t_fast_ms: group.iter().map(|r| r.t_fast_ms).sum::<f64>() / n,
                mean_epsilon_r: mean_opt(&|r| r.epsilon_r),
            }
        })
        .collect()
}
