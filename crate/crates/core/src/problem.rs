//! Constrained optimization problems, violation measures and the built-in
//! problem registry.
//!
//! A [`Cop`] minimizes `f(x)` over a box subject to inequality constraints
//! `g_i(x) <= 0` and equality constraints `h_i(x) = 0`. Equalities are
//! relaxed to `|h_i(x)| - delta <= 0`, so a point is feasible exactly when its
//! total violation is zero.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default equality tolerance.
pub const DEFAULT_DELTA: f64 = 1e-4;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A single constraint body.
#[derive(Clone)]
pub enum Constraint {
    /// `g(x) <= 0`
    Inequality(ScalarFn),
    /// `h(x) = 0`, satisfied within the problem's `delta`
    Equality(ScalarFn),
}

impl Constraint {
    pub fn inequality<F>(g: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Constraint::Inequality(Arc::new(g))
    }

    pub fn equality<F>(h: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Constraint::Equality(Arc::new(h))
    }

    fn raw(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Inequality(g) => g(x),
            Constraint::Equality(h) => h(x),
        }
    }

    fn violation_of(&self, raw: f64, delta: f64) -> f64 {
        match self {
            Constraint::Inequality(_) => raw.max(0.0),
            Constraint::Equality(_) => (raw.abs() - delta).max(0.0),
        }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Inequality(_) => f.write_str("Inequality(..)"),
            Constraint::Equality(_) => f.write_str("Equality(..)"),
        }
    }
}

/// A constrained optimization problem.
///
/// Cloning is cheap: objective and constraint bodies are shared.
#[derive(Clone)]
pub struct Cop {
    name: String,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: ScalarFn,
    constraints: Vec<Constraint>,
    delta: f64,
    best_known_f: Option<f64>,
}

impl fmt::Debug for Cop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cop")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("constraints", &self.constraints)
            .field("delta", &self.delta)
            .field("best_known_f", &self.best_known_f)
            .finish()
    }
}

impl Cop {
    /// Builds a problem with the default equality tolerance and no best-known value.
    ///
    /// Inequality constraints should be listed before equalities; constraint
    /// indices follow the order given here.
    pub fn new<F>(
        name: impl Into<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: F,
        constraints: Vec<Constraint>,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if lower.is_empty() {
            return Err(Error::Config("problem dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::Dimension {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::Config(format!(
                "lower bound {} is not below upper bound {} in coordinate {j}",
                lower[j], upper[j]
            )));
        }
        Ok(Cop {
            name: name.into(),
            lower,
            upper,
            objective: Arc::new(objective),
            constraints,
            delta: DEFAULT_DELTA,
            best_known_f: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::Config(format!("delta must be nonnegative, got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_best_known(mut self, f: Option<f64>) -> Self {
        self.best_known_f = f;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn best_known_f(&self) -> Option<f64> {
        self.best_known_f
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Raw objective value, without FES accounting.
    pub fn objective(&self, x: &[f64]) -> f64 {
        (self.objective)(x)
    }

    /// Degree of violation of constraint `i` at `x`.
    pub fn constraint_violation(&self, x: &[f64], i: usize) -> Result<f64> {
        self.check_dim(x)?;
        let c = self.constraints.get(i).ok_or(Error::ConstraintIndex {
            index: i,
            count: self.constraints.len(),
        })?;
        let raw = c.raw(x);
        if !raw.is_finite() {
            return Err(Error::NonFiniteConstraint {
                index: i,
                x: x.to_vec(),
            });
        }
        Ok(c.violation_of(raw, self.delta))
    }

    /// Evaluates objective and all constraints once. One call is one FES.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluated> {
        self.check_dim(x)?;
        let f = (self.objective)(x);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective { x: x.to_vec() });
        }
        let mut violations = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let raw = c.raw(x);
            if !raw.is_finite() {
                return Err(Error::NonFiniteConstraint {
                    index: i,
                    x: x.to_vec(),
                });
            }
            violations.push(c.violation_of(raw, self.delta));
        }
        let viol = violations.iter().sum();
        let violated_count = violations.iter().filter(|&&v| v > 0.0).count();
        Ok(Evaluated {
            x: x.to_vec(),
            f,
            viol,
            violated_count,
            violations,
        })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| l <= v && v <= u)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::Dimension {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A decision vector together with its cached objective and violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub x: Vec<f64>,
    pub f: f64,
    /// Total violation, the sum of `violations`.
    pub viol: f64,
    /// Number of constraints with strictly positive violation.
    pub violated_count: usize,
    /// Per-constraint violations in constraint order.
    pub violations: Vec<f64>,
}

impl Evaluated {
    /// Builds an evaluated point from cached values only, for tests and
    /// synthetic comparisons. `violated_count` is 1 when `viol > 0`.
    pub fn synthetic(f: f64, viol: f64) -> Self {
        let viol = viol.max(0.0);
        Evaluated {
            x: Vec::new(),
            f,
            viol,
            violated_count: usize::from(viol > 0.0),
            violations: vec![viol],
        }
    }

    pub fn is_feasible(&self) -> bool {
        is_feasible(self)
    }
}

/// Strict zero test on the total violation.
pub fn is_feasible(e: &Evaluated) -> bool {
    e.viol == 0.0
}

/// One entry of the shipped problem manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub dim: usize,
    pub delta: f64,
    pub best_known_f: Option<f64>,
}

const MANIFEST: &str = include_str!("../data/problems.json");

/// Problem metadata as shipped with the crate.
pub fn manifest() -> Vec<ManifestEntry> {
    serde_json::from_str(MANIFEST).expect("bundled problem manifest is valid JSON")
}

/// Every registered problem, in manifest order.
pub fn registry() -> Vec<Cop> {
    manifest()
        .iter()
        .map(|m| from_manifest(m).expect("bundled manifest names a known problem"))
        .collect()
}

/// Looks up a registered problem by case-insensitive name.
pub fn find(name: &str) -> Result<Cop> {
    let key = name.to_ascii_lowercase();
    manifest()
        .iter()
        .find(|m| m.name == key)
        .map(from_manifest)
        .unwrap_or_else(|| Err(Error::UnknownProblem(name.to_string())))
}

fn from_manifest(m: &ManifestEntry) -> Result<Cop> {
    let cop = match m.name.as_str() {
        "g06" => g06(),
        "g08" => g08(),
        "g11" => g11(),
        "g12" => g12(),
        "g24" => g24(),
        "eqline" => eqline(),
        other => match other.strip_prefix("ring").and_then(|d| d.parse().ok()) {
            Some(d) => ring(d),
            None => return Err(Error::UnknownProblem(other.to_string())),
        },
    };
    if cop.dimension() != m.dim {
        return Err(Error::Dimension {
            expected: m.dim,
            got: cop.dimension(),
        });
    }
    Ok(cop.with_delta(m.delta)?.with_best_known(m.best_known_f))
}

fn build<F>(name: &str, lower: Vec<f64>, upper: Vec<f64>, f: F, cs: Vec<Constraint>) -> Cop
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    Cop::new(name, lower, upper, f, cs).expect("built-in problem definition is valid")
}

pub fn g06() -> Cop {
    build(
        "g06",
        vec![13.0, 0.0],
        vec![100.0, 100.0],
        |x| (x[0] - 10.0).powi(3) + (x[1] - 20.0).powi(3),
        vec![
            Constraint::inequality(|x| -(x[0] - 5.0).powi(2) - (x[1] - 5.0).powi(2) + 100.0),
            Constraint::inequality(|x| (x[0] - 6.0).powi(2) + (x[1] - 5.0).powi(2) - 82.81),
        ],
    )
}

/// The lower bound of `x1` is `1e-6` to keep away from the objective's pole at zero.
pub fn g08() -> Cop {
    build(
        "g08",
        vec![1e-6, 0.0],
        vec![10.0, 10.0],
        |x| {
            let num = (2.0 * PI * x[0]).sin().powi(3) * (2.0 * PI * x[1]).sin();
            -num / (x[0].powi(3) * (x[0] + x[1]))
        },
        vec![
            Constraint::inequality(|x| x[0] * x[0] - x[1] + 1.0),
            Constraint::inequality(|x| 1.0 - x[0] + (x[1] - 4.0).powi(2)),
        ],
    )
}

pub fn g11() -> Cop {
    build(
        "g11",
        vec![-1.0, -1.0],
        vec![1.0, 1.0],
        |x| x[0] * x[0] + (x[1] - 1.0).powi(2),
        vec![Constraint::equality(|x| x[1] - x[0] * x[0])],
    )
}

/// A single constraint: the point must lie inside one of the 9^3 spheres of
/// radius 0.25 centred on the integer lattice `{1..9}^3`.
pub fn g12() -> Cop {
    build(
        "g12",
        vec![0.0; 3],
        vec![10.0; 3],
        |x| {
            let s: f64 = x.iter().map(|v| (v - 5.0).powi(2)).sum();
            -(100.0 - s) / 100.0
        },
        vec![Constraint::inequality(|x| {
            let mut best = f64::INFINITY;
            for p in 1..=9 {
                let dp = (x[0] - p as f64).powi(2);
                for q in 1..=9 {
                    let dq = dp + (x[1] - q as f64).powi(2);
                    for r in 1..=9 {
                        best = best.min(dq + (x[2] - r as f64).powi(2));
                    }
                }
            }
            best - 0.0625
        })],
    )
}

pub fn g24() -> Cop {
    build(
        "g24",
        vec![0.0, 0.0],
        vec![3.0, 4.0],
        |x| -x[0] - x[1],
        vec![
            Constraint::inequality(|x| {
                let a = x[0];
                -2.0 * a.powi(4) + 8.0 * a.powi(3) - 8.0 * a * a + x[1] - 2.0
            }),
            Constraint::inequality(|x| {
                let a = x[0];
                -4.0 * a.powi(4) + 32.0 * a.powi(3) - 88.0 * a * a + 96.0 * a + x[1] - 36.0
            }),
        ],
    )
}

/// Linear objective over the unit ball in `dim` dimensions. Optimum `-sqrt(dim)`.
pub fn ring(dim: usize) -> Cop {
    build(
        &format!("ring{dim}"),
        vec![-2.0; dim],
        vec![2.0; dim],
        |x| x.iter().sum(),
        vec![Constraint::inequality(|x| {
            x.iter().map(|v| v * v).sum::<f64>() - 1.0
        })],
    )
    .with_best_known(Some(-(dim as f64).sqrt()))
}

pub fn eqline() -> Cop {
    build(
        "eqline",
        vec![-5.0, -5.0],
        vec![5.0, 5.0],
        |x| x[0] * x[0] + x[1] * x[1],
        vec![Constraint::equality(|x| x[0] + x[1] - 1.0)],
    )
}
