//! Seeded trial sweeps and their CSV/JSON output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use rotpc_core::{
    iterate_into, sample_inputs, BasisSet, IterateOptions, IterationReport, Problem, ValidationSet,
};

use crate::config::{ExperimentConfig, MethodConfig};
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 12] = [
    "problem",
    "basis",
    "method",
    "samples",
    "seed",
    "rotation",
    "relative_error",
    "coherence",
    "change",
    "wall_time",
    "iterations",
    "error",
];

/// One rotation step of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub problem: String,
    pub basis: String,
    pub method: String,
    pub samples: usize,
    pub seed: u64,
    pub rotation: usize,
    pub relative_error: Option<f64>,
    pub coherence: Option<f64>,
    /// Relative coefficient change against the previous solve.
    pub change: Option<f64>,
    pub wall_time: Option<f64>,
    pub iterations: Option<usize>,
    /// Set when the trial failed at this rotation index.
    pub error: Option<String>,
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        let float = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        vec![
            self.problem.clone(),
            self.basis.clone(),
            self.method.clone(),
            self.samples.to_string(),
            self.seed.to_string(),
            self.rotation.to_string(),
            float(self.relative_error),
            float(self.coherence),
            float(self.change),
            float(self.wall_time),
            self.iterations.map(|n| n.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Mean statistics for one `(samples, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub samples: usize,
    pub method: String,
    pub trials: usize,
    pub failed_trials: usize,
    /// Mean RE of the first (unrotated) solve.
    pub mean_initial_error: Option<f64>,
    /// Mean RE of the last completed solve.
    pub mean_final_error: Option<f64>,
    pub mean_initial_coherence: Option<f64>,
    pub mean_final_coherence: Option<f64>,
    pub mean_rotations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub problem: String,
    pub basis: String,
    pub dimension: usize,
    pub order: usize,
    pub basis_size: usize,
    pub entries: Vec<SummaryEntry>,
}

impl Summary {
    pub fn entry(&self, samples: usize, method: &str) -> Option<&SummaryEntry> {
        self.entries
            .iter()
            .find(|e| e.samples == samples && e.method == method)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Outcome of one trial of one method.
struct TrialRun {
    seed: u64,
    reports: Vec<IterationReport>,
    failure: Option<(usize, String)>,
}

/// Runs every `(samples, method, trial)` combination of `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.workers)
        .build()?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let e = &cfg.experiment;
    let family = cfg.family()?;
    let problem = Problem::new(&cfg.problem_spec()?)?;
    let basis = BasisSet::new(family, e.dimension, e.order)?;
    let validation = ValidationSet::generate(
        family,
        e.dimension,
        e.validation_size,
        e.validation_seed,
        |x| problem.evaluate(x),
    )?;
    let regularizers = cfg
        .methods
        .iter()
        .map(MethodConfig::regularizer)
        .collect::<Result<Vec<_>>>()?;

    let units: Vec<(usize, usize)> = (0..e.samples.len())
        .flat_map(|m| (0..e.trials).map(move |t| (m, t)))
        .collect();
    // per unit: one TrialRun per method
    let runs: Vec<Vec<TrialRun>> = units
        .par_iter()
        .map(|&(m_idx, trial)| {
            let m = e.samples[m_idx];
            let seed = e.base_seed.wrapping_add(trial as u64);
            let data = sample_inputs(family, e.dimension, m, seed)
                .map_err(|err| err.to_string())
                .and_then(|xi| {
                    problem
                        .evaluate_rows(&xi)
                        .map(|u| (xi, u))
                        .map_err(|err| err.to_string())
                });
            cfg.methods
                .iter()
                .zip(&regularizers)
                .map(|(method, reg)| match &data {
                    Err(msg) => TrialRun {
                        seed,
                        reports: Vec::new(),
                        failure: Some((0, msg.clone())),
                    },
                    Ok((xi, u)) => {
                        let mut reports = Vec::new();
                        let options = IterateOptions {
                            coherence: e.coherence,
                            validation: Some(&validation),
                        };
                        let outcome = iterate_into(
                            xi,
                            u,
                            &basis,
                            reg,
                            &cfg.admm_config(method),
                            &cfg.rotation_config(method),
                            options,
                            &mut reports,
                        );
                        let failure = outcome.err().map(|err| (reports.len(), err.to_string()));
                        TrialRun {
                            seed,
                            reports,
                            failure,
                        }
                    }
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (m_idx, &m) in e.samples.iter().enumerate() {
        for (k, method) in cfg.methods.iter().enumerate() {
            let trials: Vec<&TrialRun> = (0..e.trials)
                .map(|t| &runs[m_idx * e.trials + t][k])
                .collect();
            for run in &trials {
                rows.extend(trial_rows(cfg, method, m, run));
            }
            entries.push(summarize(m, &method.label, &trials));
        }
    }
    Ok(ExperimentOutput {
        rows,
        summary: Summary {
            problem: e.problem.clone(),
            basis: e.basis.clone(),
            dimension: e.dimension,
            order: e.order,
            basis_size: basis.len(),
            entries,
        },
    })
}

fn trial_rows(cfg: &ExperimentConfig, method: &MethodConfig, m: usize, run: &TrialRun) -> Vec<ResultRow> {
    let e = &cfg.experiment;
    let base = ResultRow {
        problem: e.problem.clone(),
        basis: e.basis.clone(),
        method: method.label.clone(),
        samples: m,
        seed: run.seed,
        rotation: 0,
        relative_error: None,
        coherence: None,
        change: None,
        wall_time: None,
        iterations: None,
        error: None,
    };
    let mut rows: Vec<ResultRow> = run
        .reports
        .iter()
        .map(|r| ResultRow {
            rotation: r.index,
            relative_error: r.relative_error,
            coherence: r.coherence,
            change: Some(r.change),
            wall_time: e.timing.then_some(r.wall_time.as_secs_f64()),
            iterations: Some(r.admm_iterations),
            ..base.clone()
        })
        .collect();
    if let Some((index, msg)) = &run.failure {
        rows.push(ResultRow {
            rotation: *index,
            error: Some(msg.clone()),
            ..base
        });
    }
    rows
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(m: usize, label: &str, trials: &[&TrialRun]) -> SummaryEntry {
    let ok: Vec<&TrialRun> = trials
        .iter()
        .copied()
        .filter(|r| r.failure.is_none() && !r.reports.is_empty())
        .collect();
    SummaryEntry {
        samples: m,
        method: label.to_string(),
        trials: trials.len(),
        failed_trials: trials.len() - ok.len(),
        mean_initial_error: mean(ok.iter().filter_map(|r| r.reports[0].relative_error)),
        mean_final_error: mean(ok.iter().filter_map(|r| r.reports.last().unwrap().relative_error)),
        mean_initial_coherence: mean(ok.iter().filter_map(|r| r.reports[0].coherence)),
        mean_final_coherence: mean(ok.iter().filter_map(|r| r.reports.last().unwrap().coherence)),
        mean_rotations: mean(ok.iter().map(|r| (r.reports.len() - 1) as f64)),
    }
}

/// CSV text for `rows`, header first.
pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `results.csv` and `summary.json` into `dir`, returning their paths.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join("results.csv");
    fs::write(&csv_path, csv_string(&output.rows)?).map_err(|e| CliError::io(&csv_path, e))?;
    let json_path = dir.join("summary.json");
    let mut json = serde_json::to_string_pretty(&output.summary)?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| CliError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}
