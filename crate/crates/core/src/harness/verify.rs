//! Executable checks of the quantitative comparison's guarantees.
//!
//! * Sign equivalence: with exact scales, the sign of `pi(x1) - pi(x2)`
//!   reproduces the qualitative rank-and-line criterion on every pair, for
//!   any thresholds `eta` and any `xi`. Scaling both scales by the same
//!   factor changes nothing.
//! * Relaxation: overestimating `f_range / g_max` misorders only pairs mapped
//!   strictly between the exact line `L` and the relaxed line `L_hat`, at a
//!   rate close to the wedge's share of the mapped rectangle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cht::{error_rate_mu, qpc_pi, CompareOutcome, QpcQualitative};
use crate::error::{Error, Result};
use crate::mapping::{composite_rank, diff_pair, line_slope, relaxed_line_slope, QpcContext};
use crate::par::Execution;
use crate::problem::{Cop, Evaluated};

const CHUNK: usize = 4096;

/// One `(eta, xi)` configuration, with `pi` evaluated on scales multiplied by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignGridPoint {
    pub etas: Vec<f64>,
    pub xi: f64,
    pub scale: f64,
}

/// `eta` in {0.25, 0.5, 0.75} with one threshold, plus `(0.3, 0.6)` with two,
/// each at `xi` in {1, 0.5, 0.1}.
pub fn sign_grid() -> Vec<SignGridPoint> {
    let etas = [vec![0.25], vec![0.5], vec![0.75], vec![0.3, 0.6]];
    etas.iter()
        .flat_map(|e| {
            [1.0, 0.5, 0.1].map(|xi| SignGridPoint {
                etas: e.clone(),
                xi,
                scale: 1.0,
            })
        })
        .collect()
}

/// [`sign_grid`] with `pi` scales multiplied by 0.5, 2 and 10.
pub fn ratio_scaling_grid() -> Vec<SignGridPoint> {
    [0.5, 2.0, 10.0]
        .iter()
        .flat_map(|&scale| sign_grid().into_iter().map(move |g| SignGridPoint { scale, ..g }))
        .collect()
}

/// Everything needed to reproduce a disagreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub problem: String,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub f_range: f64,
    pub g_max: f64,
    pub xi: f64,
    pub etas: Vec<f64>,
    pub scale: f64,
    pub y: f64,
    pub z: f64,
    pub chi: i32,
    pub lambda: i32,
    pub phi: i32,
    pub pi1: f64,
    pub pi2: f64,
    pub qualitative: CompareOutcome,
    pub quantitative: CompareOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignReport {
    pub pairs: usize,
    pub checks: usize,
    pub mismatches: usize,
    /// Lowest-index mismatch, in problem then grid order.
    pub first: Option<Box<Mismatch>>,
}

impl SignReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Sign of `pi1 - pi2` with a relative dead band of `1e-9`.
fn quantitative_outcome(pi1: f64, pi2: f64) -> CompareOutcome {
    let tol = 1e-9 * (1.0 + pi1.abs() + pi2.abs());
    let d = pi1 - pi2;
    if d > tol {
        CompareOutcome::Better
    } else if d < -tol {
        CompareOutcome::Worse
    } else {
        CompareOutcome::Equivalent
    }
}

fn sample_pairs(cop: &Cop, n_pairs: usize, seed: u64, exec: Execution) -> Result<Vec<Evaluated>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (cop.lower_bounds(), cop.upper_bounds());
    let points: Vec<Vec<f64>> = (0..2 * n_pairs)
        .map(|_| lo.iter().zip(hi).map(|(&l, &u)| l + (u - l) * rng.gen::<f64>()).collect())
        .collect();
    exec.map(points.len(), |i| cop.evaluate(&points[i]))
        .into_iter()
        .collect()
}

/// Exact `(f_range, g_max)` over a sample; degenerate scales fall back to 1.
fn exact_scales(sample: &[Evaluated]) -> (f64, f64) {
    let (mut lo, mut hi, mut g) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for e in sample {
        lo = lo.min(e.f);
        hi = hi.max(e.f);
        g = g.max(e.viol);
    }
    let f_range = if hi > lo { hi - lo } else { 1.0 };
    (f_range, if g > 0.0 { g } else { 1.0 })
}

/// Checks the qualitative criterion against the sign of `pi` differences on
/// `n_pairs` uniform in-box pairs per problem, for every grid point.
pub fn verify_sign_equivalence(
    problems: &[Cop],
    n_pairs: usize,
    grid: &[SignGridPoint],
    seed: u64,
    exec: Execution,
) -> Result<SignReport> {
    let mut report = SignReport {
        pairs: 0,
        checks: 0,
        mismatches: 0,
        first: None,
    };
    for (pi, cop) in problems.iter().enumerate() {
        let sample = sample_pairs(cop, n_pairs, seed.wrapping_add(pi as u64), exec)?;
        let (f_range, g_max) = exact_scales(&sample);
        report.pairs += n_pairs;
        for point in grid {
            let exact = QpcContext::with_etas(f_range, g_max, point.xi, point.etas.clone())?;
            let setting = exact.scaled(point.scale)?;
            let criterion = QpcQualitative::new(exact.clone());
            let chunks = n_pairs.div_ceil(CHUNK);
            let found = exec.map(chunks, |c| {
                let mut count = 0usize;
                let mut first = None;
                for i in c * CHUNK..((c + 1) * CHUNK).min(n_pairs) {
                    let (a, b) = (&sample[2 * i], &sample[2 * i + 1]);
                    let (y, z) = diff_pair(a, b, &exact);
                    let qualitative = criterion.compare_mapped(y, z);
                    let (pi1, pi2) = (qpc_pi(a, &setting), qpc_pi(b, &setting));
                    let quantitative = quantitative_outcome(pi1, pi2);
                    if qualitative != quantitative {
                        count += 1;
                        if first.is_none() {
                            let (chi, lambda) = criterion.ranks(y, z);
                            first = Some(Mismatch {
                                problem: cop.name().to_string(),
                                x1: a.x.clone(),
                                x2: b.x.clone(),
                                f_range,
                                g_max,
                                xi: point.xi,
                                etas: point.etas.clone(),
                                scale: point.scale,
                                y,
                                z,
                                chi,
                                lambda,
                                phi: composite_rank(chi, lambda),
                                pi1,
                                pi2,
                                qualitative,
                                quantitative,
                            });
                        }
                    }
                }
                (count, first)
            });
            for (count, first) in found {
                report.mismatches += count;
                if report.first.is_none() {
                    report.first = first.map(Box::new);
                }
            }
            report.checks += n_pairs;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxReport {
    pub n_points: usize,
    pub c: f64,
    pub xi: f64,
    pub disagreements: usize,
    /// Disagreements not strictly between the lines `L` and `L_hat`.
    pub outside_wedge: usize,
    pub empirical_rate: f64,
    pub mu: f64,
    /// `mu` plus three binomial standard errors.
    pub bound: f64,
}

impl RelaxReport {
    pub fn passed(&self) -> bool {
        self.outside_wedge == 0 && self.empirical_rate <= self.bound
    }
}

/// [`verify_relaxation_scaled`] with unit true scales.
pub fn verify_relaxation(n_points: usize, c: f64, xi: f64, seed: u64, exec: Execution) -> Result<RelaxReport> {
    verify_relaxation_scaled(n_points, c, xi, 1.0, 1.0, seed, exec)
}

/// Samples `(y, z)` uniformly over `[-f_range, f_range] x [-2 g_max, 2 g_max]`
/// and compares the exact-scale criterion with `pi` computed on the setting
/// values `f_hat = c * f_range`, `g_hat = g_max`.
///
/// The feasibility class of a sampled point is read off its `z` band.
pub fn verify_relaxation_scaled(
    n_points: usize,
    c: f64,
    xi: f64,
    f_range: f64,
    g_max: f64,
    seed: u64,
    exec: Execution,
) -> Result<RelaxReport> {
    if !(c > 1.0) {
        return Err(Error::Domain(format!("inflation factor must exceed 1, got {c}")));
    }
    if n_points == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let exact = QpcContext::new(f_range, g_max, xi)?;
    let setting = QpcContext::new(c * f_range, g_max, xi)?;
    let criterion = QpcQualitative::new(exact.clone());
    let (e, e_hat) = (line_slope(&exact), relaxed_line_slope(&setting));
    let weight = setting.f_range / (setting.xi * setting.g_max);

    let chunks = n_points.div_ceil(CHUNK);
    let counts = exec.map(chunks, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let (mut bad, mut outside) = (0usize, 0usize);
        for _ in k * CHUNK..((k + 1) * CHUNK).min(n_points) {
            let y = f_range * (2.0 * rng.gen::<f64>() - 1.0);
            let z = loop {
                let z = 2.0 * g_max * (2.0 * rng.gen::<f64>() - 1.0);
                if z.abs() != g_max {
                    break z;
                }
            };
            // feasible-vs-infeasible below -g_max, the reverse above +g_max
            let step = if z < -g_max {
                -1.0
            } else if z > g_max {
                1.0
            } else {
                0.0
            };
            let d_pi = -(y + setting.f_range * step + weight * z);
            let relaxed = if d_pi > 0.0 {
                CompareOutcome::Better
            } else if d_pi < 0.0 {
                CompareOutcome::Worse
            } else {
                CompareOutcome::Equivalent
            };
            if relaxed != criterion.compare_mapped(y, z) {
                bad += 1;
                if (z + e * y) * (z + e_hat * y) >= 0.0 {
                    outside += 1;
                }
            }
        }
        (bad, outside)
    });
    let (disagreements, outside_wedge) = counts
        .into_iter()
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));

    let mu = error_rate_mu((f_range, g_max), (setting.f_range, setting.g_max), xi)?;
    let n = n_points as f64;
    Ok(RelaxReport {
        n_points,
        c,
        xi,
        disagreements,
        outside_wedge,
        empirical_rate: disagreements as f64 / n,
        mu,
        bound: mu + 3.0 * (mu * (1.0 - mu) / n).sqrt(),
    })
}
