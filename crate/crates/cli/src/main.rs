use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rotpc_cli::{emit_defaults, render, run_experiment, write_outputs, ExperimentConfig, Result};
use rotpc_core::{PolynomialFamily, ProblemKind};

#[derive(Parser)]
#[command(name = "rotpc", version, about = "Rotated sparse polynomial chaos experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (0 = all cores); overrides the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed for trial samples; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write results.csv and summary.json.
    Run { config: PathBuf },
    /// Print the default config for a benchmark.
    Defaults {
        /// ridge, elliptic, kdv or highdim
        problem: ProblemKind,
        #[arg(long, default_value = "legendre")]
        basis: PolynomialFamily,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn apply_overrides(cli: &Cli, cfg: &mut ExperimentConfig) {
    if let Some(w) = cli.workers {
        cfg.experiment.workers = w;
    }
    if let Some(dir) = &cli.out {
        cfg.experiment.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.experiment.base_seed = seed;
    }
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            apply_overrides(cli, &mut cfg);
            let output = run_experiment(&cfg)?;
            let (csv, json) = write_outputs(&output, &cfg.experiment.output_dir)?;
            let failed: usize = output.summary.entries.iter().map(|e| e.failed_trials).sum();
            println!("wrote {} rows to {}", output.rows.len(), csv.display());
            println!("wrote summary to {}", json.display());
            if failed > 0 {
                eprintln!("{failed} trial(s) failed; see the error column");
            }
        }
        Command::Defaults { problem, basis } => {
            let mut cfg = emit_defaults(*problem, *basis)?;
            apply_overrides(cli, &mut cfg);
            print!("{}", render(&cfg)?);
        }
        Command::Validate { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            apply_overrides(cli, &mut cfg);
            cfg.validate()?;
            let e = &cfg.experiment;
            println!(
                "ok: {} / {}, N = {}, {} method(s), {} sample count(s), {} trial(s)",
                e.problem,
                e.basis,
                rotpc_core::basis_size(e.dimension, e.order).unwrap_or(0),
                cfg.methods.len(),
                e.samples.len(),
                e.trials
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
