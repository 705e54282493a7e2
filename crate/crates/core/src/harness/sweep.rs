//! Sensitivity of QPC to the initial `xi`.

use serde::Serialize;

use super::{run_trials, RunStats};
use crate::error::{Error, Result};
use crate::optimizer::{ChtConfig, ChtKind, DeParams, TracePoint};
use crate::par::Execution;
use crate::problem::Cop;

pub const DEFAULT_XI_GRID: [f64; 6] = [1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSeries {
    pub xi: f64,
    /// Per-checkpoint median over runs.
    pub trace: Vec<TracePoint>,
    #[serde(skip)]
    pub stats: RunStats,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Median of each checkpoint across runs, truncated to the shortest trace.
///
/// `best_f` is the median over the runs that have found a feasible point by
/// that checkpoint, and `None` if none has.
pub fn aggregate_traces(traces: &[Vec<TracePoint>]) -> Vec<TracePoint> {
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut fs: Vec<f64> = traces.iter().filter_map(|t| t[i].best_f).collect();
            let mut vs: Vec<f64> = traces.iter().map(|t| t[i].best_viol).collect();
            TracePoint {
                fes: traces[0][i].fes,
                best_f: (!fs.is_empty()).then(|| median(&mut fs)),
                best_viol: median(&mut vs),
            }
        })
        .collect()
}

/// Runs QPC with `xi_max = xi`, `xi_min = 0` for every `xi` in `xis`; the
/// remaining schedule parameters come from `base`.
pub fn xi_sensitivity_sweep(
    cop: &Cop,
    base: &ChtConfig,
    de: &DeParams,
    xis: &[f64],
    runs: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<SweepSeries>> {
    if xis.is_empty() {
        return Err(Error::Config("xi grid is empty".into()));
    }
    xis.iter()
        .map(|&xi| {
            let cht = ChtConfig {
                cht: ChtKind::Qpc,
                xi_max: xi,
                xi_min: 0.0,
                ..base.clone()
            };
            let set = run_trials(cop, &cht, de, runs, seed, exec)?;
            let traces: Vec<Vec<TracePoint>> = set.runs.into_iter().map(|r| r.trace).collect();
            Ok(SweepSeries {
                xi,
                trace: aggregate_traces(&traces),
                stats: set.stats,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(fes: u64, f: Option<f64>, v: f64) -> TracePoint {
        TracePoint { fes, best_f: f, best_viol: v }
    }

    #[test]
    fn medians_per_checkpoint() {
        let traces = vec![
            vec![tp(10, None, 3.0), tp(20, Some(5.0), 0.0)],
            vec![tp(10, Some(1.0), 0.0), tp(20, Some(1.0), 0.0)],
            vec![tp(10, None, 1.0), tp(20, Some(2.0), 0.0), tp(30, Some(0.0), 0.0)],
        ];
        let agg = aggregate_traces(&traces);
        assert_eq!(agg, vec![tp(10, Some(1.0), 1.0), tp(20, Some(2.0), 0.0)]);
        assert!(aggregate_traces(&[]).is_empty());
    }

    #[test]
    fn sweep_shapes() {
        let de = DeParams {
            max_fes: 400,
            ..DeParams::default()
        };
        let out = xi_sensitivity_sweep(
            &crate::problem::g24(),
            &ChtConfig::default(),
            &de,
            &[1.0, 1e-3],
            3,
            0,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].xi, 1e-3);
        assert_eq!(out[0].trace.last().unwrap().fes, 400);
        assert!(xi_sensitivity_sweep(&crate::problem::g24(), &ChtConfig::default(), &de, &[], 3, 0, Execution::Sequential).is_err());
    }
}
