//! Repeated-trial experiments, summary statistics, verification oracles and
//! the sorting-cost microbenchmark.

mod output;
mod sortbench;
mod sweep;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizer::{self, ChtConfig, DeParams, RunResult};
use crate::par::Execution;
use crate::problem::Cop;

pub use output::{
    results_csv, trace_csv, write_atomic, write_json, write_results_csv, write_trace_csv,
};
pub use sortbench::{sort_benchmark, SortRow};
pub use sweep::{aggregate_traces, xi_sensitivity_sweep, SweepSeries, DEFAULT_XI_GRID};
pub use verify::{
    ratio_scaling_grid, sign_grid, verify_relaxation, verify_relaxation_scaled,
    verify_sign_equivalence, Mismatch, RelaxReport, SignGridPoint, SignReport,
};

/// A complete experiment description, as read from a run-config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: String,
    pub cht: ChtConfig,
    pub de: DeParams,
    pub runs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "g24".into(),
            cht: ChtConfig::default(),
            de: DeParams::default(),
            runs: 25,
            seed: 0,
        }
    }
}

/// Outcome of one run in a trial set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: usize,
    pub seed: u64,
    pub best_f: f64,
    pub best_viol: f64,
    pub feasible: bool,
    /// `None` when the problem has no best-known value.
    pub success: Option<bool>,
    pub min_fes: Option<u64>,
}

impl RunRecord {
    pub fn from_result(run_index: usize, seed: u64, r: &RunResult) -> Self {
        RunRecord {
            run_index,
            seed,
            best_f: r.best.f,
            best_viol: r.best.viol,
            feasible: r.best.is_feasible(),
            success: r.success,
            min_fes: r.min_fes,
        }
    }
}

/// Aggregate indicators over a trial set, in the shape written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub fr: f64,
    pub sr: Option<f64>,
    pub best: f64,
    pub median: f64,
    pub worst: f64,
    pub mean: f64,
    pub std: f64,
    pub min_fes_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub records: Vec<RunRecord>,
    pub aggregate: Aggregate,
}

impl RunStats {
    /// Summarizes `records`.
    ///
    /// The objective indicators cover the feasible runs only when some but
    /// not all runs are feasible, and every run otherwise.
    pub fn from_records(records: Vec<RunRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Config("no runs to summarize".into()));
        }
        let n = records.len() as f64;
        let feasible = records.iter().filter(|r| r.feasible).count();
        let fr = feasible as f64 / n;
        let sr = if records.iter().all(|r| r.success.is_some()) {
            Some(records.iter().filter(|r| r.success == Some(true)).count() as f64 / n)
        } else {
            None
        };

        let partial = feasible > 0 && feasible < records.len();
        let mut values: Vec<f64> = records
            .iter()
            .filter(|r| !partial || r.feasible)
            .map(|r| r.best_f)
            .collect();
        values.sort_by(f64::total_cmp);
        let k = values.len();
        let median = if k % 2 == 1 {
            values[k / 2]
        } else {
            (values[k / 2 - 1] + values[k / 2]) / 2.0
        };
        let mean = values.iter().sum::<f64>() / k as f64;
        let std = if k > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        } else {
            0.0
        };

        let mut fes: Vec<u64> = records.iter().filter_map(|r| r.min_fes).collect();
        fes.sort_unstable();
        let min_fes_mean = if fes.is_empty() {
            None
        } else {
            Some(fes.iter().sum::<u64>() as f64 / fes.len() as f64)
        };

        Ok(RunStats {
            aggregate: Aggregate {
                fr,
                sr,
                best: values[0],
                median,
                worst: values[k - 1],
                mean,
                std,
                min_fes_mean,
            },
            records,
        })
    }

    /// Median of the min-FES values over successful runs.
    pub fn min_fes_median(&self) -> Option<f64> {
        let mut fes: Vec<u64> = self.records.iter().filter_map(|r| r.min_fes).collect();
        if fes.is_empty() {
            return None;
        }
        fes.sort_unstable();
        let k = fes.len();
        Some(if k % 2 == 1 {
            fes[k / 2] as f64
        } else {
            (fes[k / 2 - 1] + fes[k / 2]) as f64 / 2.0
        })
    }
}

/// All runs of a trial set plus their summary.
#[derive(Debug, Clone)]
pub struct TrialSet {
    pub stats: RunStats,
    pub runs: Vec<RunResult>,
}

/// Seed of run `i` in a set started at `seed`.
pub fn run_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Runs `n_runs` independent optimizations with seeds `seed, seed + 1, ...`.
///
/// Runs fan out according to `exec`; results are folded in run order, so the
/// outcome does not depend on the degree of parallelism.
pub fn run_trials(
    cop: &Cop,
    cht: &ChtConfig,
    de: &DeParams,
    n_runs: usize,
    seed: u64,
    exec: Execution,
) -> Result<TrialSet> {
    if n_runs == 0 {
        return Err(Error::Config("runs must be positive".into()));
    }
    de.validate()?;
    cht.validate()?;
    let results = exec.map(n_runs, |i| {
        let de = DeParams {
            seed: run_seed(seed, i),
            ..de.clone()
        };
        optimizer::run(cop, &de, cht)
    });
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let records = runs
        .iter()
        .enumerate()
        .map(|(i, r)| RunRecord::from_result(i, run_seed(seed, i), r))
        .collect();
    Ok(TrialSet {
        stats: RunStats::from_records(records)?,
        runs,
    })
}

/// [`run_trials`] driven by a [`RunConfig`].
pub fn run_config(config: &RunConfig, exec: Execution) -> Result<TrialSet> {
    let cop = crate::problem::find(&config.problem)?;
    run_trials(&cop, &config.cht, &config.de, config.runs, config.seed, exec)
}
