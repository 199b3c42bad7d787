//! TOML run configuration with `section.key=value` command-line overrides.
//!
//! Every field has a default, so an empty file (or no file) is a valid
//! configuration describing the 51×16 / 40-element scene.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sparse2d_bccb::experiment::{ExperimentConfig, SolverKind};
use sparse2d_bccb::solvers::Backend;
use sparse2d_bccb::{MemoryBudget, DEFAULT_MEMORY_BUDGET};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub array: ArrayConfig,
    pub grid: GridConfig,
    pub scenario: ScenarioConfig,
    pub solve: SolveConfig,
    pub verify: VerifyConfig,
    pub bench: BenchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub m1_count: usize,
    pub m2_count: usize,
    /// Elements kept by the aperture-preserving random thinning.
    pub element_count: usize,
    pub seed: u64,
    /// Explicit `[m1, m2]` positions; replaces the random thinning when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<[usize; 2]>>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            m1_count: 51,
            m2_count: 16,
            element_count: 40,
            seed: 1,
            elements: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub l1: usize,
    pub l2: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { l1: 64, l2: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of random sources when `targets` is not given.
    pub sources: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub noiseless: bool,
    /// Snap random sources to the nearest `[grid]` point.
    pub on_grid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetSpec>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            sources: 3,
            seed: 7,
            snr_db: 15.0,
            noiseless: false,
            on_grid: false,
            targets: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub f1: f64,
    pub f2: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub solver: String,
    pub backend: String,
    pub iterations: usize,
    /// `τ = tau_fraction · ‖D_sᴴ y‖_∞`.
    pub tau_fraction: f64,
    pub rho: f64,
    pub support_threshold: f64,
    pub memory_budget_bytes: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            solver: "fista".into(),
            backend: "fast".into(),
            iterations: 400,
            tau_fraction: 0.1,
            rho: 1.0,
            support_threshold: 0.1,
            memory_budget_bytes: DEFAULT_MEMORY_BUDGET,
            snapshot: None,
        }
    }
}

impl SolveConfig {
    pub fn solver_kind(&self) -> Result<SolverKind> {
        self.solver.parse().map_err(|e| anyhow!("solve.solver: {e}"))
    }

    pub fn backend_kind(&self) -> Result<Backend> {
        self.backend.parse().map_err(|e| anyhow!("solve.backend: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Maximum allowed BCCB deviation of the dense Gram.
    pub tolerance: f64,
    /// Relative tolerance of the trace identity and eigenvalue sign checks.
    pub spectral_tolerance: f64,
    /// Largest `L` for which the dense Gram is formed.
    pub dense_cap: usize,
    /// Perturbs the first grid away from uniform spacing; any nonzero value
    /// should make the structure check fail.
    pub jitter: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tolerance: 1e-10,
            spectral_tolerance: 1e-8,
            dense_cap: 4096,
            jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub l1_values: Vec<usize>,
    pub iteration_values: Vec<usize>,
    pub trials: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub snr_db: f64,
    pub base_seed: u64,
    pub solvers: Vec<String>,
    pub memory_budget_bytes: u64,
    pub tau_fraction: f64,
    pub rho: f64,
    /// Mean `ε_r` bounds per cell; exceeding them fails the command.
    pub max_epsilon_ista_fista: f64,
    pub max_epsilon_admm: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        BenchConfig {
            l1_values: e.l1_values,
            iteration_values: e.iteration_values,
            trials: e.trials,
            k_min: e.k_range.0,
            k_max: e.k_range.1,
            snr_db: e.snr_db,
            base_seed: e.base_seed,
            solvers: e.solvers.iter().map(|s| s.name().to_string()).collect(),
            memory_budget_bytes: e.memory_budget.0,
            tau_fraction: e.tau_fraction,
            rho: e.rho,
            max_epsilon_ista_fista: 1e-8,
            max_epsilon_admm: 1e-6,
        }
    }
}

impl Config {
    /// Reads `path` (if any) and applies `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: Config = toml::Value::Table(table)
            .try_into()
            .map_err(|e| anyhow!("invalid config: {e}"))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let b = &self.bench;
        let solvers = b
            .solvers
            .iter()
            .map(|s| s.parse::<SolverKind>().map_err(|e| anyhow!("bench.solvers: {e}")))
            .collect::<Result<Vec<_>>>()?;
        let config = ExperimentConfig {
            m1_count: self.array.m1_count,
            m2_count: self.array.m2_count,
            element_count: self.array.element_count,
            l2: self.grid.l2,
            l1_values: b.l1_values.clone(),
            iteration_values: b.iteration_values.clone(),
            snr_db: b.snr_db,
            k_range: (b.k_min, b.k_max),
            trials: b.trials,
            base_seed: b.base_seed,
            solvers,
            memory_budget: MemoryBudget(b.memory_budget_bytes),
            tau_fraction: b.tau_fraction,
            rho: b.rho,
        };
        config.validate().context("invalid [bench] configuration")?;
        Ok(config)
    }
}

/// `section.key=value`; the value is read as a TOML literal, falling back
/// to a bare string.
fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{item}` is not of the form key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override `{item}` has an empty key segment");
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = path.split_last().expect("nonempty");
    let mut node = table;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{item}`: `{p}` is not a section"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}
