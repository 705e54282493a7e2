//! Constraint-handling techniques.
//!
//! Two interfaces cover all five techniques:
//!
//! * [`Comparator`]: a pairwise rule answering "is `a` better than `b`?"
//!   (feasibility rules, epsilon-level comparison, and the qualitative form
//!   of the quantitative pairwise comparison).
//! * [`Evaluator`]: a scalar fitness, larger is better (penalty function and
//!   the quantization function `pi`).
//!
//! Stochastic ranking is neither; it is a randomized sort and lives in
//! [`stochastic_rank`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{composite_rank, diff_pair, line_slope, theta, Division, QpcContext};
use crate::problem::Evaluated;

/// Lower limit applied to scheduled `xi` values; `pi` divides by `xi`.
pub const XI_FLOOR: f64 = 1e-8;

/// Outcome of comparing `a` against `b`, from `a`'s point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOutcome {
    Better,
    Worse,
    Equivalent,
    /// The rule has nothing to say (an exact tie in the deciding quantity).
    NoPreference,
}

impl CompareOutcome {
    /// Outcome with the arguments swapped.
    pub fn reverse(self) -> Self {
        match self {
            CompareOutcome::Better => CompareOutcome::Worse,
            CompareOutcome::Worse => CompareOutcome::Better,
            other => other,
        }
    }

    fn smaller_wins(a: f64, b: f64) -> Self {
        if a < b {
            CompareOutcome::Better
        } else if a > b {
            CompareOutcome::Worse
        } else {
            CompareOutcome::NoPreference
        }
    }
}

pub trait Comparator: Send + Sync {
    fn compare(&self, a: &Evaluated, b: &Evaluated) -> CompareOutcome;
}

pub trait Evaluator: Send + Sync {
    /// Fitness of `e`; larger is better.
    fn fitness(&self, e: &Evaluated) -> f64;
}

/// Feasible beats infeasible; ties within a class go to the smaller `f`
/// (feasible) or the smaller violation (infeasible).
pub fn feasibility_rules_compare(a: &Evaluated, b: &Evaluated) -> CompareOutcome {
    match (a.is_feasible(), b.is_feasible()) {
        (true, true) => CompareOutcome::smaller_wins(a.f, b.f),
        (true, false) => CompareOutcome::Better,
        (false, true) => CompareOutcome::Worse,
        (false, false) => CompareOutcome::smaller_wins(a.viol, b.viol),
    }
}

/// Epsilon-level comparison: violations up to `eps` count as satisfied.
pub fn eps_level_compare(a: &Evaluated, b: &Evaluated, eps: f64) -> CompareOutcome {
    match (a.viol <= eps, b.viol <= eps) {
        (true, true) => CompareOutcome::smaller_wins(a.f, b.f),
        (true, false) => CompareOutcome::Better,
        (false, true) => CompareOutcome::Worse,
        (false, false) if a.viol == b.viol => CompareOutcome::smaller_wins(a.f, b.f),
        (false, false) => CompareOutcome::smaller_wins(a.viol, b.viol),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FeasibilityRules;

impl Comparator for FeasibilityRules {
    fn compare(&self, a: &Evaluated, b: &Evaluated) -> CompareOutcome {
        feasibility_rules_compare(a, b)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EpsilonLevel {
    pub eps: f64,
}

impl Comparator for EpsilonLevel {
    fn compare(&self, a: &Evaluated, b: &Evaluated) -> CompareOutcome {
        eps_level_compare(a, b, self.eps)
    }
}

/// Per-constraint penalty coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyParams {
    pub coefficients: Vec<f64>,
}

impl PenaltyParams {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(r) = coefficients.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::Config(format!("penalty coefficients must be nonnegative, got {r}")));
        }
        Ok(PenaltyParams { coefficients })
    }

    /// The same coefficient `r` for each of `n` constraints.
    pub fn uniform(r: f64, n: usize) -> Result<Self> {
        Self::new(vec![r; n])
    }
}

/// `-(f + sum_i r_i * v_i)`.
pub fn penalty_fitness(e: &Evaluated, params: &PenaltyParams, per_constraint_viol: &[f64]) -> Result<f64> {
    if params.coefficients.len() != per_constraint_viol.len() {
        return Err(Error::Config(format!(
            "{} penalty coefficients for {} constraints",
            params.coefficients.len(),
            per_constraint_viol.len()
        )));
    }
    let p: f64 = params
        .coefficients
        .iter()
        .zip(per_constraint_viol)
        .map(|(r, v)| r * v)
        .sum();
    Ok(-(e.f + p))
}

#[derive(Debug, Clone)]
pub struct Penalty {
    pub params: PenaltyParams,
}

impl Evaluator for Penalty {
    fn fitness(&self, e: &Evaluated) -> f64 {
        penalty_fitness(e, &self.params, &e.violations)
            .expect("penalty coefficients match the problem's constraint count")
    }
}

/// Randomized bubble sort balancing `f` against violation.
///
/// Each adjacent comparison draws `u ~ U(0, 1)`; when `u < pf` or both
/// points are feasible the pair is ordered by `f`, otherwise by violation.
/// Returns the ranking as indices into `pop`, best first.
pub fn stochastic_rank<R: Rng + ?Sized>(pop: &[Evaluated], sweeps: usize, pf: f64, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    for _ in 0..sweeps {
        for s in 0..pop.len().saturating_sub(1) {
            let (a, b) = (&pop[order[s]], &pop[order[s + 1]]);
            let u: f64 = rng.gen();
            let swap = if u < pf || (a.viol == 0.0 && b.viol == 0.0) {
                a.f > b.f
            } else {
                a.viol > b.viol
            };
            if swap {
                order.swap(s, s + 1);
            }
        }
    }
    order
}

/// Qualitative comparison of a mapped point `(y, z)`.
///
/// `Better` when the composite rank is negative or, on the zero-rank cells,
/// when the point lies strictly below the line `z = -e * y`.
pub fn qpc_compare_mapped(y: f64, z: f64, ctx: &QpcContext) -> CompareOutcome {
    QpcQualitative::new(ctx.clone()).compare_mapped(y, z)
}

pub fn qpc_qualitative_compare(a: &Evaluated, b: &Evaluated, ctx: &QpcContext) -> CompareOutcome {
    let (y, z) = diff_pair(a, b, ctx);
    qpc_compare_mapped(y, z, ctx)
}

/// The qualitative criterion with its divisions and line slope precomputed.
#[derive(Debug, Clone)]
pub struct QpcQualitative {
    ctx: QpcContext,
    y_div: Division,
    z_div: Division,
    slope: f64,
}

impl QpcQualitative {
    pub fn new(ctx: QpcContext) -> Self {
        QpcQualitative {
            y_div: ctx.y_division(),
            z_div: ctx.z_division(),
            slope: line_slope(&ctx),
            ctx,
        }
    }

    pub fn context(&self) -> &QpcContext {
        &self.ctx
    }

    /// `(chi, lambda)` for a mapped point.
    pub fn ranks(&self, y: f64, z: f64) -> (i32, i32) {
        (self.y_div.rank_of(y), self.z_div.rank_of(z))
    }

    pub fn compare_mapped(&self, y: f64, z: f64) -> CompareOutcome {
        let (chi, lambda) = self.ranks(y, z);
        let phi = composite_rank(chi, lambda);
        if phi < 0 {
            return CompareOutcome::Better;
        }
        if phi > 0 {
            return CompareOutcome::Worse;
        }
        let on_line = -self.slope * y;
        if z < on_line {
            CompareOutcome::Better
        } else if z > on_line {
            CompareOutcome::Worse
        } else {
            CompareOutcome::Equivalent
        }
    }
}

impl Comparator for QpcQualitative {
    fn compare(&self, a: &Evaluated, b: &Evaluated) -> CompareOutcome {
        let (y, z) = diff_pair(a, b, &self.ctx);
        self.compare_mapped(y, z)
    }
}

/// The offset `sigma(x)` added to `f` by the quantization function.
pub fn qpc_sigma(e: &Evaluated, ctx: &QpcContext) -> f64 {
    let step = if e.violated_count > 0 { ctx.f_range } else { 0.0 };
    step + ctx.f_range / (ctx.xi * ctx.g_max) * theta(e, ctx.g_max)
}

/// Quantization function `pi(x) = -(f + sigma(x))`. Larger is better.
pub fn qpc_pi(e: &Evaluated, ctx: &QpcContext) -> f64 {
    -(e.f + qpc_sigma(e, ctx))
}

#[derive(Debug, Clone)]
pub struct Qpc {
    pub ctx: QpcContext,
}

impl Evaluator for Qpc {
    fn fitness(&self, e: &Evaluated) -> f64 {
        qpc_pi(e, &self.ctx)
    }
}

/// Decay schedule for `xi`: `xi_max - (xi_max - xi_min) * (t / t_max)^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiSchedule {
    pub xi_max: f64,
    pub xi_min: f64,
    pub p: f64,
    pub t_max: u64,
}

impl XiSchedule {
    pub fn new(xi_max: f64, xi_min: f64, p: f64, t_max: u64) -> Result<Self> {
        if !(xi_max > 0.0 && xi_max <= 1.0) {
            return Err(Error::Config(format!("xi_max must lie in (0, 1], got {xi_max}")));
        }
        if !(xi_min >= 0.0 && xi_min <= xi_max) {
            return Err(Error::Config(format!("xi_min must lie in [0, xi_max], got {xi_min}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Config(format!("p must be positive, got {p}")));
        }
        if t_max == 0 {
            return Err(Error::Config("t_max must be positive".into()));
        }
        Ok(XiSchedule {
            xi_max,
            xi_min,
            p,
            t_max,
        })
    }
}

/// `xi` at iteration `t`, never below [`XI_FLOOR`]. `t` past `t_max` is clamped.
pub fn xi_at(schedule: &XiSchedule, t: u64) -> f64 {
    if t >= schedule.t_max {
        return schedule.xi_min.max(XI_FLOOR);
    }
    let r = t as f64 / schedule.t_max as f64;
    let v = schedule.xi_max - (schedule.xi_max - schedule.xi_min) * r.powf(schedule.p);
    v.max(XI_FLOOR)
}

/// Fraction of the mapped rectangle misordered when `pi` runs on setting
/// values `(f_hat, g_hat)` whose ratio `f_hat / g_hat` overestimates the true
/// `f_range / g_max`.
///
/// Misordered pairs fill the wedge between `z = -e y` and `z = -e_hat y`
/// inside the both-infeasible band, of area `f_range * xi * (g_max - g_hat *
/// f_range / f_hat)`, out of the full rectangle `8 * g_max * f_range`.
pub fn error_rate_mu(truth: (f64, f64), setting: (f64, f64), xi: f64) -> Result<f64> {
    let (f_range, g_max) = truth;
    let (f_hat, g_hat) = setting;
    if [f_range, g_max, f_hat, g_hat].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("scales must be positive".into()));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::Domain(format!("xi must lie in (0, 1], got {xi}")));
    }
    let gap = g_max / f_range - g_hat / f_hat;
    if gap < -1e-12 * (g_max / f_range) {
        return Err(Error::Domain(format!(
            "setting ratio f_hat/g_hat = {} underestimates true ratio {}",
            f_hat / g_hat,
            f_range / g_max
        )));
    }
    Ok((xi * f_range / (8.0 * g_max) * gap.max(0.0)).clamp(0.0, 1.0))
}
