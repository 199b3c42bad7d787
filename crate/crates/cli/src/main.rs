//! `sparse2d`: simulate snapshots, solve them, check the BCCB structure of
//! the Gram, dump its eigenvalues and run the backend benchmark.
//!
//! Exit status is 0 on success and 1 on any error or violated tolerance.

mod commands;
mod config;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::Config;

#[derive(Debug, Parser)]
#[command(name = "sparse2d", version, about = "Fast sparse 2D harmonic recovery on planar arrays")]
struct Cli {
    /// TOML configuration file; built-in defaults are used without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (simulate, solve, bench) or file (verify, gram-dump).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Override a config value, e.g. `--set grid.l1=128`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a snapshot and write it with the planted sources.
    Simulate,
    /// Solve the LASSO problem for a snapshot file.
    Solve {
        /// Snapshot file; overrides `solve.snapshot`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Check the dense Gram for BCCB structure and its spectral invariants.
    Verify {
        /// Also write the Gram eigenvalues to this file.
        #[arg(long)]
        dump_eigenvalues: Option<PathBuf>,
    },
    /// Time the regular and fast backends over the configured sweep.
    Bench,
    /// Write the Gram eigenvalues of the configured geometry and grid.
    GramDump,
    /// Print the effective configuration as TOML.
    Config,
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let config = Config::load(cli.config.as_deref(), &cli.overrides)?;
    let output = cli.output.as_deref();
    match &cli.command {
        Command::Simulate => commands::simulate(&config, output),
        Command::Solve { input } => commands::solve(&config, input.as_deref(), output),
        Command::Verify { dump_eigenvalues } => {
            commands::verify(&config, output, dump_eigenvalues.as_deref())
        }
        Command::Bench => commands::bench(&config, output),
        Command::GramDump => commands::gram_dump(&config, output),
        Command::Config => {
            let text = config.to_toml()?;
            match output {
                Some(path) => formats::write_text(path, &text)?,
                None => print!("{text}"),
            }
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share status 1 with every other failure
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => {
            eprintln!("error: a tolerance check failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
