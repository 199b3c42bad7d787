use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use sparse2d_bccb::array::{snr_to_noise_variance, synthesize_snapshot, ArrayGeometry, Target};
use sparse2d_bccb::bccb::{is_bccb, BccbOperator};
use sparse2d_bccb::dictionary::{SubsampledDictionary, UniformGrid};
use sparse2d_bccb::experiment::{derive_seed, random_targets, run_grid_with, SolverKind};
use sparse2d_bccb::solvers::{extract_support, lasso_objective, LassoProblem, SolverConfig};
use sparse2d_bccb::MemoryBudget;

use crate::config::{ArrayConfig, Config};
use crate::formats;

/// Whether every checked tolerance held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violated,
}

fn require_output(output: Option<&Path>, command: &str) -> Result<PathBuf> {
    output
        .map(Path::to_path_buf)
        .ok_or_else(|| anyhow!("`{command}` needs --output"))
}

fn output_dir(output: Option<&Path>, command: &str) -> Result<PathBuf> {
    let dir = require_output(output, command)?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub fn geometry(array: &ArrayConfig) -> Result<ArrayGeometry> {
    match &array.elements {
        Some(list) => {
            let pairs: Vec<(usize, usize)> = list.iter().map(|[a, b]| (*a, *b)).collect();
            ArrayGeometry::from_elements(array.m1_count, array.m2_count, &pairs)
                .context("array.elements")
        }
        None => ArrayGeometry::ura(array.m1_count, array.m2_count)
            .and_then(|g| g.subsample_preserving_aperture(array.element_count, array.seed))
            .context("array"),
    }
}

fn grids(config: &Config) -> Result<(UniformGrid, UniformGrid)> {
    Ok((
        UniformGrid::new(config.grid.l1).context("grid.l1")?,
        UniformGrid::new(config.grid.l2).context("grid.l2")?,
    ))
}

fn targets(config: &Config) -> Result<Vec<Target>> {
    let scenario = &config.scenario;
    if let Some(list) = &scenario.targets {
        return list
            .iter()
            .map(|t| Target::new(t.f1, t.f2, Complex64::new(t.re, t.im)))
            .collect::<Result<Vec<_>, _>>()
            .context("scenario.targets");
    }
    let mut drawn = random_targets(scenario.sources, scenario.seed)?;
    if scenario.on_grid {
        let (g1, g2) = grids(config)?;
        for t in &mut drawn {
            t.f1 = g1.frequency(g1.nearest_index(t.f1));
            t.f2 = g2.frequency(g2.nearest_index(t.f2));
        }
    }
    Ok(drawn)
}

pub fn simulate(config: &Config, output: Option<&Path>) -> Result<Outcome> {
    let dir = output_dir(output, "simulate")?;
    let geometry = geometry(&config.array)?;
    let targets = targets(config)?;
    let noise_variance = if config.scenario.noiseless {
        0.0
    } else {
        snr_to_noise_variance(&targets, config.scenario.snr_db).context("scenario.snr_db")?
    };
    let noise_seed = derive_seed(config.scenario.seed, &[u64::from_le_bytes(*b"noise\0\0\0")]);
    let snapshot = synthesize_snapshot(&geometry, &targets, noise_variance, noise_seed)?;

    formats::write_text(&dir.join("snapshot.txt"), &formats::snapshot_text(&snapshot))?;
    formats::write_text(&dir.join("targets.txt"), &formats::targets_text(&targets))?;
    formats::write_text(&dir.join("geometry.json"), &formats::geometry_json(&geometry)?)?;
    println!(
        "wrote {} samples from {} sources (noise variance {:e}) to {}",
        snapshot.values.len(),
        targets.len(),
        noise_variance,
        dir.display()
    );
    Ok(Outcome::Pass)
}

pub fn solve(config: &Config, input: Option<&Path>, output: Option<&Path>) -> Result<Outcome> {
    let dir = output_dir(output, "solve")?;
    let input = input
        .map(Path::to_path_buf)
        .or_else(|| config.solve.snapshot.clone())
        .ok_or_else(|| anyhow!("`solve` needs --input or solve.snapshot"))?;
    let snapshot = formats::read_snapshot(&input)?;
    let solver = config.solve.solver_kind()?;
    let backend = config.solve.backend_kind()?;
    let budget = MemoryBudget(config.solve.memory_budget_bytes);
    let (grid1, grid2) = grids(config)?;
    let dictionary = SubsampledDictionary::build(&snapshot.geometry, &grid1, &grid2, budget)?;

    let peak = dictionary
        .apply_adjoint(&snapshot.values)?
        .iter()
        .map(|b| b.norm())
        .fold(0.0, f64::max);
    // a zero adjoint image has the zero solution for every τ > 0
    let tau = config.solve.tau_fraction * if peak > 0.0 { peak } else { 1.0 };
    let problem =
        LassoProblem::from_dictionary(&dictionary, &snapshot.values, tau, backend, budget)?;
    let solver_config = SolverConfig {
        iterations: config.solve.iterations,
        rho: config.solve.rho,
        record_objective: false,
        ..SolverConfig::default()
    };
    let result = solver.solve(problem, &solver_config)?;
    let objective = lasso_objective(&dictionary, &snapshot.values, &result.estimate, tau)?;
    let support = extract_support(&result.estimate, &grid1, &grid2, config.solve.support_threshold)?;

    formats::write_text(
        &dir.join("estimate.txt"),
        &formats::estimate_text(grid1.len(), grid2.len(), &result.estimate),
    )?;
    formats::write_text(&dir.join("support.txt"), &formats::support_text(grid1.len(), &support))?;
    println!("solver {solver} backend {backend} iterations {}", result.iterations);
    println!("tau {tau:e} step {:e} threshold {:e}", result.step_size, result.threshold);
    println!("objective {objective:.16e}");
    println!(
        "loop {:.3} ms ({:.3} us/iter), precompute {:.3} ms",
        result.total_seconds * 1e3,
        result.per_iteration_seconds * 1e6,
        result.precompute_seconds * 1e3
    );
    println!("support entries {}", support.len());
    Ok(Outcome::Pass)
}

/// Deterministic non-uniform spacing used by the verify jitter hook.
fn jittered(grid: &UniformGrid, jitter: f64) -> Vec<f64> {
    grid.frequencies()
        .iter()
        .enumerate()
        .map(|(l, f)| f + jitter * ((l as f64 * 0.618_033_988_749_895).fract() - 0.5))
        .collect()
}

pub fn verify(
    config: &Config,
    output: Option<&Path>,
    dump_eigenvalues: Option<&Path>,
) -> Result<Outcome> {
    let v = &config.verify;
    let (l1, l2) = (config.grid.l1, config.grid.l2);
    let n = l1 * l2;
    if n > v.dense_cap {
        bail!(
            "L = {l1}·{l2} = {n} exceeds the dense check cap {}; reduce grid.l1/grid.l2 \
             or raise verify.dense_cap",
            v.dense_cap
        );
    }
    let geometry = geometry(&config.array)?;
    let (grid1, grid2) = grids(config)?;
    let budget = MemoryBudget::default();
    let dictionary = if v.jitter == 0.0 {
        SubsampledDictionary::build(&geometry, &grid1, &grid2, budget)?
    } else {
        SubsampledDictionary::with_frequencies(
            &geometry,
            &jittered(&grid1, v.jitter),
            grid2.frequencies(),
            budget,
        )?
    };
    let dense = dictionary.dense_gram(budget)?;
    let check = is_bccb(dense.as_array(), l1, l2, v.tolerance)?;

    let fast = BccbOperator::gram(&geometry, l1, l2)?;
    let first = fast.first_column();
    let model_residual = first
        .values
        .iter()
        .enumerate()
        .map(|(i, r)| (dense.as_array()[[i, 0]] - r).norm())
        .fold(0.0, f64::max);
    let spectrum = fast.spectrum();
    let ml = (geometry.element_count() * n) as f64;
    let trace_residual = (spectrum.sum - Complex64::new(ml, 0.0)).norm() / ml;
    let tol = v.spectral_tolerance;
    let checks = [
        ("bccb_deviation", check.max_deviation, v.tolerance),
        ("first_column_residual", model_residual, v.tolerance),
        ("trace_residual", trace_residual, tol),
        ("max_imag_ratio", spectrum.max_abs_imag / spectrum.max_real, tol),
        ("negative_real_ratio", (-spectrum.min_real).max(0.0) / spectrum.max_real, tol),
    ];

    let mut report = format!(
        "# BCCB structure report\nL1 {l1}\nL2 {l2}\nM {}\njitter {:e}\n",
        geometry.element_count(),
        v.jitter
    );
    report += &format!("eigenvalue_sum {:.16e} {:.16e}\n", spectrum.sum.re, spectrum.sum.im);
    report += &format!("expected_sum {ml:.16e}\n");
    report += &format!("min_eigenvalue {:.16e}\n", spectrum.min_real);
    report += &format!("max_eigenvalue {:.16e}\n", spectrum.max_real);
    let mut outcome = Outcome::Pass;
    for (name, value, limit) in checks {
        let ok = value <= limit;
        if !ok {
            outcome = Outcome::Violated;
        }
        report += &format!("{name} {value:.3e} limit {limit:.1e} {}\n", if ok { "ok" } else { "FAIL" });
    }
    report += &format!("status {}\n", if outcome == Outcome::Pass { "pass" } else { "fail" });
    print!("{report}");
    if let Some(path) = output {
        formats::write_text(path, &report)?;
    }
    if let Some(path) = dump_eigenvalues {
        formats::write_text(path, &formats::eigenvalue_text(l1, l2, fast.eigenvalues()))?;
    }
    Ok(outcome)
}

pub fn gram_dump(config: &Config, output: Option<&Path>) -> Result<Outcome> {
    let path = require_output(output, "gram-dump")?;
    let geometry = geometry(&config.array)?;
    let (l1, l2) = (config.grid.l1, config.grid.l2);
    let op = BccbOperator::gram(&geometry, l1, l2).context("grid")?;
    formats::write_text(&path, &formats::eigenvalue_text(l1, l2, op.eigenvalues()))?;
    println!("wrote {}x{} eigenvalues to {}", l1, l2, path.display());
    Ok(Outcome::Pass)
}

pub fn bench(config: &Config, output: Option<&Path>) -> Result<Outcome> {
    let dir = output_dir(output, "bench")?;
    let experiment = config.experiment()?;
    let report = run_grid_with(&experiment, |r| {
        let reg = r.t_reg_ms.map_or("skipped".to_string(), |t| format!("{t:.3} ms"));
        eprintln!(
            "{} L1={} T={} trial {}: reg {reg}, fast {:.3} ms, eps {:?}",
            r.solver, r.l1, r.n_iter, r.trial_index, r.t_fast_ms, r.epsilon_r
        );
    })?;
    formats::write_text(&dir.join("records.csv"), &formats::records_csv(&report.records)?)?;
    formats::write_text(&dir.join("summary.csv"), &formats::summary_csv(&report.cells)?)?;
    formats::write_text(&dir.join("runtime.dat"), &formats::plot_data(&report.cells))?;

    let mut outcome = Outcome::Pass;
    println!("solver l1 n_iter mean_t_reg_ms mean_t_fast_ms mean_epsilon_r");
    for cell in &report.cells {
        let limit = match cell.solver {
            SolverKind::Admm => config.bench.max_epsilon_admm,
            SolverKind::Ista | SolverKind::Fista => config.bench.max_epsilon_ista_fista,
        };
        let bad = cell.mean_epsilon_r.is_some_and(|e| !(e <= limit));
        if bad {
            outcome = Outcome::Violated;
        }
        println!(
            "{} {} {} {} {:.3} {}{}",
            cell.solver,
            cell.l1,
            cell.n_iter,
            cell.mean_t_reg_ms.map_or("-".into(), |t| format!("{t:.3}")),
            cell.mean_t_fast_ms,
            cell.mean_epsilon_r.map_or("-".into(), |e| format!("{e:.3e}")),
            if bad { format!(" exceeds {limit:e}") } else { String::new() }
        );
    }
    Ok(outcome)
}
