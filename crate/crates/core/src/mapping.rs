//! Pair-difference mapping used by the quantitative pairwise comparison.
//!
//! A pair `(x1, x2)` maps to a point `(y, z)` with `y = f(x1) - f(x2)` and
//! `z = theta(x1) - theta(x2)`, where `theta` sends every feasible point to
//! `-g_max` and every infeasible point to its violation. Both axes are cut
//! into signed difference ranks by a [`Division`]; the composite rank
//! `phi = chi + lambda` settles most comparisons and the line
//! `z = -e * y` settles the rest.
//!
//! With exact scales the `theta` transform separates the four feasibility
//! classes into disjoint `z` bands:
//!
//! | x1 | x2 | z |
//! |----|----|---|
//! | feasible | feasible | `0` |
//! | feasible | infeasible | `[-2 g_max, -g_max)` |
//! | infeasible | feasible | `(g_max, 2 g_max]` |
//! | infeasible | infeasible | `(-g_max, g_max)` |

use crate::error::{Error, Result};
use crate::problem::Evaluated;

/// Ordered positive thresholds `q_1 < ... < q_alpha < bound` splitting
/// `[-bound, bound]` into `2 * alpha + 3` signed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Division {
    thresholds: Vec<f64>,
    bound: f64,
}

impl Division {
    pub fn new(thresholds: Vec<f64>, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Domain(format!("division bound must be positive, got {bound}")));
        }
        let mut prev = 0.0;
        for &q in &thresholds {
            if !(q > prev && q < bound) {
                return Err(Error::Domain(format!(
                    "thresholds must be strictly increasing in (0, {bound}), got {thresholds:?}"
                )));
            }
            prev = q;
        }
        Ok(Division { thresholds, bound })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Number of thresholds.
    pub fn alpha(&self) -> usize {
        self.thresholds.len()
    }

    /// Signed difference rank of `value`.
    ///
    /// Positive cells are `(0, q_1], (q_1, q_2], ..., (q_alpha, bound]` with
    /// ranks `1..=alpha+1`; the negative side mirrors them exactly. Values
    /// beyond `bound` saturate to `±(alpha + 1)`.
    pub fn rank_of(&self, value: f64) -> i32 {
        if value == 0.0 {
            return 0;
        }
        let a = value.abs();
        let r = self
            .thresholds
            .iter()
            .position(|&q| a <= q)
            .map_or(self.thresholds.len() + 1, |i| i + 1) as i32;
        if value > 0.0 {
            r
        } else {
            -r
        }
    }
}

/// Scale estimates and parameters of the quantitative comparison.
///
/// `f_range` and `g_max` are either the true objective range and maximum
/// violation, or setting values standing in for them. `etas` fixes the
/// `alpha` inner thresholds of both divisions; `beta = alpha + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpcContext {
    pub f_range: f64,
    pub g_max: f64,
    pub xi: f64,
    pub etas: Vec<f64>,
}

impl QpcContext {
    /// Context with the default single threshold `eta = 0.5`.
    pub fn new(f_range: f64, g_max: f64, xi: f64) -> Result<Self> {
        Self::with_etas(f_range, g_max, xi, vec![0.5])
    }

    pub fn with_etas(f_range: f64, g_max: f64, xi: f64, etas: Vec<f64>) -> Result<Self> {
        if !(f_range > 0.0 && f_range.is_finite()) {
            return Err(Error::Domain(format!("f_range must be positive, got {f_range}")));
        }
        if !(g_max > 0.0 && g_max.is_finite()) {
            return Err(Error::Domain(format!("g_max must be positive, got {g_max}")));
        }
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::Domain(format!("xi must lie in (0, 1], got {xi}")));
        }
        let mut prev = 0.0;
        for &eta in &etas {
            if !(eta > prev && eta < 1.0) {
                return Err(Error::Domain(format!(
                    "etas must be strictly increasing in (0, 1), got {etas:?}"
                )));
            }
            prev = eta;
        }
        Ok(QpcContext {
            f_range,
            g_max,
            xi,
            etas,
        })
    }

    pub fn alpha(&self) -> usize {
        self.etas.len()
    }

    pub fn beta(&self) -> usize {
        self.etas.len() + 1
    }

    /// Same parameters with both scales multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::with_etas(
            self.f_range * factor,
            self.g_max * factor,
            self.xi,
            self.etas.clone(),
        )
    }

    /// Objective-difference division: `q_r = eta_r * f_range`, bound `f_range`.
    pub fn y_division(&self) -> Division {
        let qs = self.etas.iter().map(|eta| eta * self.f_range).collect();
        Division::new(qs, self.f_range).expect("validated context yields a valid division")
    }

    /// Violation-difference division: `q_r = eta_r * xi * g_max` for
    /// `r <= alpha`, `q_beta = xi * g_max`, bound `2 * g_max`.
    pub fn z_division(&self) -> Division {
        let top = self.xi * self.g_max;
        let mut qs: Vec<f64> = self.etas.iter().map(|eta| eta * top).collect();
        qs.push(top);
        Division::new(qs, 2.0 * self.g_max).expect("validated context yields a valid division")
    }
}

/// Maps feasible points below every infeasible one on the violation axis.
pub fn theta(e: &Evaluated, g_max: f64) -> f64 {
    if e.viol == 0.0 {
        -g_max
    } else {
        e.viol
    }
}

/// `(y, z)` coordinates of the pair `(e1, e2)`.
pub fn diff_pair(e1: &Evaluated, e2: &Evaluated, ctx: &QpcContext) -> (f64, f64) {
    (
        e1.f - e2.f,
        theta(e1, ctx.g_max) - theta(e2, ctx.g_max),
    )
}

pub fn composite_rank(chi: i32, lambda: i32) -> i32 {
    chi + lambda
}

/// Slope `e` of the equivalence line `z = -e * y` for the `beta = alpha + 1`
/// divisions built by [`QpcContext`].
pub fn line_slope(ctx: &QpcContext) -> f64 {
    ctx.xi * ctx.g_max / ctx.f_range
}

/// Slope of the equivalence line for arbitrary divisions of `y` and `z`.
///
/// `alpha` and `beta` are the threshold counts of the two divisions.
pub fn general_line_slope(y_div: &Division, z_div: &Division, f_range: f64, g_max: f64) -> f64 {
    use std::cmp::Ordering;
    match y_div.alpha().cmp(&z_div.alpha()) {
        Ordering::Greater => 2.0 * g_max / y_div.thresholds()[y_div.alpha() - 1],
        Ordering::Equal => 2.0 * g_max / f_range,
        Ordering::Less => z_div.thresholds()[z_div.alpha() - 1] / f_range,
    }
}

/// Slope of the line implied by setting values `f_hat = ctx.f_range`,
/// `g_hat = ctx.g_max`.
pub fn relaxed_line_slope(ctx: &QpcContext) -> f64 {
    ctx.xi * ctx.g_max / ctx.f_range
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(f: f64, g: f64, xi: f64) -> QpcContext {
        QpcContext::new(f, g, xi).unwrap()
    }

    #[test]
    fn rank_examples() {
        let d = Division::new(vec![1.0], 4.0).unwrap();
        assert_eq!(d.rank_of(0.0), 0);
        assert_eq!(d.rank_of(0.5), 1);
        assert_eq!(d.rank_of(1.0), 1);
        assert_eq!(d.rank_of(-2.0), -2);
        assert_eq!(d.rank_of(-1.0), -1);
        assert_eq!(d.rank_of(9.0), 2);

        let empty = Division::new(vec![], 4.0).unwrap();
        assert_eq!(empty.rank_of(3.0), 1);
        assert_eq!(empty.rank_of(-3.0), -1);
        assert_eq!(empty.rank_of(-0.0), 0);
    }

    #[test]
    fn invalid_divisions() {
        assert!(Division::new(vec![2.0, 1.0], 4.0).is_err());
        assert!(Division::new(vec![4.0], 4.0).is_err());
        assert!(Division::new(vec![0.0], 4.0).is_err());
        assert!(Division::new(vec![], 0.0).is_err());
    }

    #[test]
    fn theta_branches() {
        assert_eq!(theta(&Evaluated::synthetic(0.0, 0.0), 10.0), -10.0);
        assert_eq!(theta(&Evaluated::synthetic(0.0, 3.0), 10.0), 3.0);
        assert_eq!(theta(&Evaluated::synthetic(0.0, 5.0), 5.0), 5.0);
    }

    #[test]
    fn diff_pair_examples() {
        let c = ctx(1.0, 1.0, 1.0);
        let a = Evaluated::synthetic(0.6, 0.3);
        assert_eq!(diff_pair(&a, &a, &c), (0.0, 0.0));

        let (y, z) = diff_pair(&a, &Evaluated::synthetic(0.3, 0.1), &c);
        assert!((y - 0.3).abs() < 1e-15 && (z - 0.2).abs() < 1e-15);

        let (_, z) = diff_pair(&Evaluated::synthetic(0.0, 0.0), &Evaluated::synthetic(0.0, 0.4), &c);
        assert!((z + 1.4).abs() < 1e-15);
        assert!((-2.0..-1.0).contains(&z));
    }

    #[test]
    fn composite_rank_examples() {
        assert_eq!(composite_rank(0, 0), 0);
        assert_eq!(composite_rank(1, -1), 0);
        assert_eq!(composite_rank(2, 1), 3);
    }

    #[test]
    fn slopes() {
        assert_eq!(line_slope(&ctx(1.0, 1.0, 1.0)), 1.0);
        assert_eq!(line_slope(&ctx(2.0, 1.0, 0.5)), 0.25);
        assert!(line_slope(&ctx(1.0, 1.0, 1e-12)) < 1e-11);

        assert_eq!(relaxed_line_slope(&ctx(4.0, 2.0, 0.5)), 0.25);
        let base = relaxed_line_slope(&ctx(3.0, 2.0, 0.7));
        let doubled = relaxed_line_slope(&ctx(6.0, 2.0, 0.7));
        assert!((doubled - base / 2.0).abs() < 1e-15);
    }

    #[test]
    fn general_slope_branches() {
        let c = ctx(2.0, 1.0, 0.5);
        assert_eq!(general_line_slope(&c.y_division(), &c.z_division(), 2.0, 1.0), line_slope(&c));

        let y2 = Division::new(vec![0.5, 1.0], 2.0).unwrap();
        let z1 = Division::new(vec![0.5], 2.0).unwrap();
        assert_eq!(general_line_slope(&y2, &z1, 2.0, 1.0), 2.0);
        let y1 = Division::new(vec![1.0], 2.0).unwrap();
        assert_eq!(general_line_slope(&y1, &z1, 2.0, 1.0), 1.0);
    }

    #[test]
    fn context_divisions() {
        let c = QpcContext::with_etas(10.0, 2.0, 0.5, vec![0.3, 0.6]).unwrap();
        assert_eq!(c.alpha(), 2);
        assert_eq!(c.beta(), 3);
        assert_eq!(c.y_division().thresholds(), &[3.0, 6.0]);
        let z = c.z_division();
        assert!((z.thresholds()[0] - 0.3).abs() < 1e-15);
        assert!((z.thresholds()[1] - 0.6).abs() < 1e-15);
        assert_eq!(z.thresholds()[2], 1.0);
        assert_eq!(z.bound(), 4.0);
    }

    #[test]
    fn invalid_contexts() {
        assert!(QpcContext::new(0.0, 1.0, 1.0).is_err());
        assert!(QpcContext::new(1.0, 0.0, 1.0).is_err());
        assert!(QpcContext::new(1.0, 1.0, 0.0).is_err());
        assert!(QpcContext::new(1.0, 1.0, 1.5).is_err());
        assert!(QpcContext::with_etas(1.0, 1.0, 1.0, vec![0.6, 0.3]).is_err());
        assert!(QpcContext::with_etas(1.0, 1.0, 1.0, vec![1.0]).is_err());
    }
}
