//! Differential evolution driven by any constraint-handling technique.
//!
//! The engine is a plain rand/1 DE with binomial or exponential crossover and
//! one-to-one survivor selection. Selection delegates to a [`Comparator`] or an
//! [`Evaluator`]; stochastic ranking instead ranks parents and trials together
//! and keeps the best `np`.
//!
//! For the quantitative comparison the objective range and maximum violation
//! are running estimates over every evaluation of the run, frozen into a
//! snapshot at the start of each generation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cht::{
    stochastic_rank, xi_at, CompareOutcome, Comparator, EpsilonLevel, Evaluator, FeasibilityRules,
    Penalty, PenaltyParams, Qpc, XiSchedule,
};
use crate::error::{Error, Result};
use crate::mapping::QpcContext;
use crate::problem::{Cop, Evaluated};

/// A run succeeds once a feasible point within this distance of the best-known
/// objective value has been evaluated.
pub const SUCCESS_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossoverKind {
    #[serde(rename = "bin")]
    Binomial,
    #[serde(rename = "exp")]
    Exponential,
}

/// How an out-of-box mutant coordinate is brought back inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundRepair {
    /// Midpoint between the target's coordinate and the violated bound.
    #[default]
    Midpoint,
    Clamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeParams {
    pub np: usize,
    pub f: f64,
    pub cr: f64,
    #[serde(rename = "xover")]
    pub crossover: CrossoverKind,
    pub max_fes: u64,
    pub repair: BoundRepair,
    pub seed: u64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            np: 40,
            f: 0.7,
            cr: 0.9,
            crossover: CrossoverKind::Exponential,
            max_fes: 50_000,
            repair: BoundRepair::Midpoint,
            seed: 0,
        }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<()> {
        if self.np < 4 {
            return Err(Error::Config(format!("np must be at least 4, got {}", self.np)));
        }
        if !(self.f >= 0.0 && self.f < 2.0) {
            return Err(Error::Config(format!("scale factor f must lie in [0, 2), got {}", self.f)));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            return Err(Error::Config(format!("cr must lie in [0, 1], got {}", self.cr)));
        }
        if self.max_fes < self.np as u64 {
            return Err(Error::Config(format!(
                "max_fes {} is smaller than the population size {}",
                self.max_fes, self.np
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChtKind {
    Qpc,
    Frules,
    Eps,
    Penalty,
    Sr,
}

impl ChtKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChtKind::Qpc => "qpc",
            ChtKind::Frules => "frules",
            ChtKind::Eps => "eps",
            ChtKind::Penalty => "penalty",
            ChtKind::Sr => "sr",
        }
    }
}

impl std::str::FromStr for ChtKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpc" => Ok(ChtKind::Qpc),
            "frules" => Ok(ChtKind::Frules),
            "eps" => Ok(ChtKind::Eps),
            "penalty" => Ok(ChtKind::Penalty),
            "sr" => Ok(ChtKind::Sr),
            other => Err(Error::Config(format!("unknown constraint handler `{other}`"))),
        }
    }
}

/// Constraint-handling configuration; only the fields of the selected
/// technique are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChtConfig {
    pub cht: ChtKind,
    pub xi_max: f64,
    pub xi_min: f64,
    pub p: f64,
    pub eps: f64,
    pub penalty_r: f64,
    pub sr_pf: f64,
    /// Bubble sweeps per ranking; `None` means the ranked population's size.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_sweeps: Option<usize>,
}

impl Default for ChtConfig {
    fn default() -> Self {
        ChtConfig {
            cht: ChtKind::Qpc,
            xi_max: 1.0,
            xi_min: 0.0,
            p: 5.0,
            eps: 0.0,
            penalty_r: 1e3,
            sr_pf: 0.45,
            sr_sweeps: None,
        }
    }
}

impl ChtConfig {
    pub fn with_kind(kind: ChtKind) -> Self {
        ChtConfig {
            cht: kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.cht {
            ChtKind::Qpc => XiSchedule::new(self.xi_max, self.xi_min, self.p, 1).map(|_| ()),
            ChtKind::Eps if !(self.eps >= 0.0) => {
                Err(Error::Config(format!("eps must be nonnegative, got {}", self.eps)))
            }
            ChtKind::Penalty if !(self.penalty_r >= 0.0) => Err(Error::Config(format!(
                "penalty_r must be nonnegative, got {}",
                self.penalty_r
            ))),
            ChtKind::Sr if !(0.0..=1.0).contains(&self.sr_pf) => {
                Err(Error::Config(format!("sr_pf must lie in [0, 1], got {}", self.sr_pf)))
            }
            _ => Ok(()),
        }
    }
}

/// Survivor-selection rule.
#[derive(Clone, Copy)]
pub enum Policy<'a> {
    Comparator(&'a dyn Comparator),
    Evaluator(&'a dyn Evaluator),
}

/// Whether `trial` replaces `incumbent`.
///
/// Evaluators keep the trial on ties; comparators keep it on `Better` or
/// `Equivalent` and keep the incumbent on `NoPreference`.
pub fn keeps_trial(incumbent: &Evaluated, trial: &Evaluated, policy: Policy<'_>) -> bool {
    match policy {
        Policy::Evaluator(ev) => ev.fitness(trial) >= ev.fitness(incumbent),
        Policy::Comparator(cmp) => matches!(
            cmp.compare(trial, incumbent),
            CompareOutcome::Better | CompareOutcome::Equivalent
        ),
    }
}

pub fn select<'e>(incumbent: &'e Evaluated, trial: &'e Evaluated, policy: Policy<'_>) -> &'e Evaluated {
    if keeps_trial(incumbent, trial, policy) {
        trial
    } else {
        incumbent
    }
}

/// rand/1 mutant for `target`, repaired into `[lower, upper]`.
#[allow(clippy::too_many_arguments)]
pub fn mutate_rand1<R: Rng + ?Sized>(
    pop: &[Vec<f64>],
    target: usize,
    scale: f64,
    lower: &[f64],
    upper: &[f64],
    repair: BoundRepair,
    rng: &mut R,
) -> Vec<f64> {
    let n = pop.len();
    assert!(n >= 4, "rand/1 needs at least four individuals");
    let mut pick = |taken: &[usize]| loop {
        let r = rng.gen_range(0..n);
        if r != target && !taken.contains(&r) {
            return r;
        }
    };
    let r1 = pick(&[]);
    let r2 = pick(&[r1]);
    let r3 = pick(&[r1, r2]);
    let base = &pop[target];
    (0..base.len())
        .map(|j| {
            let v = pop[r1][j] + scale * (pop[r2][j] - pop[r3][j]);
            repair_coordinate(v, base[j], lower[j], upper[j], repair)
        })
        .collect()
}

fn repair_coordinate(v: f64, target: f64, lower: f64, upper: f64, repair: BoundRepair) -> f64 {
    match repair {
        BoundRepair::Midpoint if v < lower => (target + lower) / 2.0,
        BoundRepair::Midpoint if v > upper => (target + upper) / 2.0,
        BoundRepair::Clamp => v.clamp(lower, upper),
        BoundRepair::Midpoint => v,
    }
}

pub fn crossover<R: Rng + ?Sized>(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    kind: CrossoverKind,
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(target.len(), mutant.len());
    let k = target.len();
    let mut trial = target.to_vec();
    match kind {
        CrossoverKind::Binomial => {
            let forced = rng.gen_range(0..k);
            for j in 0..k {
                if j == forced || rng.gen::<f64>() < cr {
                    trial[j] = mutant[j];
                }
            }
        }
        CrossoverKind::Exponential => {
            let mut j = rng.gen_range(0..k);
            let mut copied = 0;
            loop {
                trial[j] = mutant[j];
                j = (j + 1) % k;
                copied += 1;
                if copied >= k || rng.gen::<f64>() >= cr {
                    break;
                }
            }
        }
    }
    trial
}

/// Running scale estimates for the quantitative comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTracker {
    pub f_min_seen: f64,
    pub f_max_seen: f64,
    pub viol_max_seen: f64,
}

impl Default for ScaleTracker {
    fn default() -> Self {
        ScaleTracker {
            f_min_seen: f64::INFINITY,
            f_max_seen: f64::NEG_INFINITY,
            viol_max_seen: 0.0,
        }
    }
}

impl ScaleTracker {
    pub fn observe(&mut self, e: &Evaluated) {
        self.f_min_seen = self.f_min_seen.min(e.f);
        self.f_max_seen = self.f_max_seen.max(e.f);
        self.viol_max_seen = self.viol_max_seen.max(e.viol);
    }

    /// `(f_range, g_max)`; either falls back to 1 while still degenerate.
    pub fn snapshot(&self) -> (f64, f64) {
        let range = self.f_max_seen - self.f_min_seen;
        let f_range = if range > 0.0 && range.is_finite() { range } else { 1.0 };
        let g_max = if self.viol_max_seen > 0.0 && self.viol_max_seen.is_finite() {
            self.viol_max_seen
        } else {
            1.0
        };
        (f_range, g_max)
    }
}

/// Best-so-far state after a generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub fes: u64,
    /// Best feasible objective seen so far.
    pub best_f: Option<f64>,
    /// Smallest violation seen so far.
    pub best_viol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Best point seen, ordered by the feasibility rules.
    pub best: Evaluated,
    pub fes: u64,
    pub generations: u64,
    pub trace: Vec<TracePoint>,
    /// FES count at which success first held.
    pub min_fes: Option<u64>,
    /// `None` when the problem has no best-known value.
    pub success: Option<bool>,
}

/// Everything the engine knows at the end of a generation.
pub struct GenerationView<'a> {
    pub generation: u64,
    pub fes: u64,
    pub population: &'a [Evaluated],
    /// `(f_range, g_max, xi)` used for this generation's comparisons.
    pub snapshot: (f64, f64, f64),
}

struct RunState<'a> {
    cop: &'a Cop,
    fes: u64,
    best: Option<Evaluated>,
    best_feasible_f: Option<f64>,
    best_viol: f64,
    min_fes: Option<u64>,
    tracker: ScaleTracker,
    trace: Vec<TracePoint>,
}

impl<'a> RunState<'a> {
    fn evaluate(&mut self, x: &[f64]) -> Result<Evaluated> {
        let e = self.cop.evaluate(x)?;
        self.fes += 1;
        self.tracker.observe(&e);
        self.best_viol = self.best_viol.min(e.viol);
        if e.is_feasible() {
            self.best_feasible_f = Some(self.best_feasible_f.map_or(e.f, |b| b.min(e.f)));
            if self.min_fes.is_none() {
                if let Some(target) = self.cop.best_known_f() {
                    if e.f - target <= SUCCESS_TOLERANCE {
                        self.min_fes = Some(self.fes);
                    }
                }
            }
        }
        let improves = match &self.best {
            None => true,
            Some(b) => crate::cht::feasibility_rules_compare(&e, b) == CompareOutcome::Better,
        };
        if improves {
            self.best = Some(e.clone());
        }
        Ok(e)
    }

    fn record(&mut self) {
        self.trace.push(TracePoint {
            fes: self.fes,
            best_f: self.best_feasible_f,
            best_viol: self.best_viol,
        });
    }
}

pub fn run(cop: &Cop, de: &DeParams, cht: &ChtConfig) -> Result<RunResult> {
    run_with_observer(cop, de, cht, |_| {})
}

/// Like [`run`], calling `observe` after initialization and after every generation.
pub fn run_with_observer<O>(cop: &Cop, de: &DeParams, cht: &ChtConfig, mut observe: O) -> Result<RunResult>
where
    O: FnMut(&GenerationView<'_>),
{
    de.validate()?;
    cht.validate()?;
    let penalty = match cht.cht {
        ChtKind::Penalty => Some(Penalty {
            params: PenaltyParams::uniform(cht.penalty_r, cop.constraint_count())?,
        }),
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(de.seed);
    let (lower, upper) = (cop.lower_bounds(), cop.upper_bounds());
    let np = de.np;
    let mut state = RunState {
        cop,
        fes: 0,
        best: None,
        best_feasible_f: None,
        best_viol: f64::INFINITY,
        min_fes: None,
        tracker: ScaleTracker::default(),
        trace: Vec::new(),
    };

    let mut pop = Vec::with_capacity(np);
    for _ in 0..np {
        let x: Vec<f64> = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| l + (u - l) * rng.gen::<f64>())
            .collect();
        pop.push(state.evaluate(&x)?);
    }
    state.record();
    let (f0, g0) = state.tracker.snapshot();
    observe(&GenerationView {
        generation: 0,
        fes: state.fes,
        population: &pop,
        snapshot: (f0, g0, cht.xi_max),
    });

    let t_max = de.max_fes / np as u64;
    let schedule = XiSchedule::new(cht.xi_max, cht.xi_min, cht.p, t_max.max(1));
    let mut generation = 0;
    while state.fes < de.max_fes {
        generation += 1;
        let (f_range, g_max) = state.tracker.snapshot();
        let xi = match &schedule {
            Ok(s) => xi_at(s, generation),
            Err(_) => cht.xi_max,
        };

        let offspring = np.min((de.max_fes - state.fes) as usize);
        let xs: Vec<Vec<f64>> = pop.iter().map(|e| e.x.clone()).collect();
        let mut trials = Vec::with_capacity(offspring);
        for i in 0..offspring {
            let mutant = mutate_rand1(&xs, i, de.f, lower, upper, de.repair, &mut rng);
            let trial = crossover(&xs[i], &mutant, de.cr, de.crossover, &mut rng);
            trials.push(state.evaluate(&trial)?);
        }

        if cht.cht == ChtKind::Sr {
            let mut merged = pop;
            merged.extend(trials);
            let sweeps = cht.sr_sweeps.unwrap_or(merged.len());
            let order = stochastic_rank(&merged, sweeps, cht.sr_pf, &mut rng);
            pop = order[..np].iter().map(|&i| merged[i].clone()).collect();
        } else {
            let qpc;
            let eps;
            let policy = match cht.cht {
                ChtKind::Qpc => {
                    qpc = Qpc {
                        ctx: QpcContext::new(f_range, g_max, xi)?,
                    };
                    Policy::Evaluator(&qpc)
                }
                ChtKind::Penalty => Policy::Evaluator(penalty.as_ref().expect("penalty built above")),
                ChtKind::Eps => {
                    eps = EpsilonLevel { eps: cht.eps };
                    Policy::Comparator(&eps)
                }
                _ => Policy::Comparator(&FeasibilityRules),
            };
            for (i, trial) in trials.into_iter().enumerate() {
                if keeps_trial(&pop[i], &trial, policy) {
                    pop[i] = trial;
                }
            }
        }

        state.record();
        observe(&GenerationView {
            generation,
            fes: state.fes,
            population: &pop,
            snapshot: (f_range, g_max, xi),
        });
    }

    let success = cop.best_known_f().map(|_| state.min_fes.is_some());
    Ok(RunResult {
        best: state.best.expect("at least one evaluation"),
        fes: state.fes,
        generations: generation,
        trace: state.trace,
        min_fes: state.min_fes,
        success,
    })
}
