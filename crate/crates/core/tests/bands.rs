//! Where pairs land on the rank grid, depending on which sides are feasible.

use chtbench::cht::{qpc_pi, CompareOutcome, QpcQualitative};
use chtbench::mapping::{composite_rank, diff_pair, QpcContext};
use chtbench::problem::Evaluated;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const F: f64 = 7.0;
const G: f64 = 3.0;

fn contexts() -> Vec<QpcContext> {
    let mut out = Vec::new();
    for etas in [vec![0.25], vec![0.5], vec![0.75], vec![0.3, 0.6]] {
        for xi in [1.0, 0.5, 0.1, 1e-3] {
            out.push(QpcContext::with_etas(F, G, xi, etas.clone()).unwrap());
        }
    }
    out
}

fn point(rng: &mut ChaCha8Rng, feasible: bool) -> Evaluated {
    let f = rng.gen_range(0.0..=F);
    let v = if feasible { 0.0 } else { rng.gen_range(1e-9..=G) };
    Evaluated::synthetic(f, v)
}

#[test]
fn feasible_beats_infeasible_on_every_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for ctx in contexts() {
        let q = QpcQualitative::new(ctx.clone());
        let beta = ctx.beta() as i32;
        for _ in 0..5_000 {
            let (a, b) = (point(&mut rng, true), point(&mut rng, false));
            let (y, z) = diff_pair(&a, &b, &ctx);
            assert!(z < -G && z >= -2.0 * G);
            let (chi, lambda) = q.ranks(y, z);
            assert_eq!(lambda, -(beta + 1));
            assert!(composite_rank(chi, lambda) < 0);
            assert_eq!(q.compare_mapped(y, z), CompareOutcome::Better);
            assert!(qpc_pi(&a, &ctx) > qpc_pi(&b, &ctx));
        }
    }
}

#[test]
fn two_feasible_points_are_ordered_by_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for ctx in contexts() {
        let q = QpcQualitative::new(ctx.clone());
        for _ in 0..5_000 {
            let (a, b) = (point(&mut rng, true), point(&mut rng, true));
            let (y, z) = diff_pair(&a, &b, &ctx);
            assert_eq!(z, 0.0);
            let expect = if a.f < b.f {
                CompareOutcome::Better
            } else if a.f > b.f {
                CompareOutcome::Worse
            } else {
                CompareOutcome::Equivalent
            };
            assert_eq!(q.compare_mapped(y, z), expect);
        }
    }
}

#[test]
fn two_infeasible_points_stay_inside_the_middle_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ctx in contexts() {
        let q = QpcQualitative::new(ctx.clone());
        let beta = ctx.beta() as i32;
        for _ in 0..5_000 {
            let (a, b) = (point(&mut rng, false), point(&mut rng, false));
            let (y, z) = diff_pair(&a, &b, &ctx);
            assert!(z.abs() < G);
            let (_, lambda) = q.ranks(y, z);
            if z.abs() <= ctx.xi * G {
                assert!(lambda.abs() <= beta);
            } else {
                assert_eq!(lambda.abs(), beta + 1);
            }
        }
    }
}

#[test]
fn violation_dominates_outside_the_xi_band() {
    // |z| beyond xi * g_max outranks any objective difference
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for ctx in contexts().into_iter().filter(|c| c.xi < 1.0) {
        let q = QpcQualitative::new(ctx.clone());
        for _ in 0..5_000 {
            let (a, b) = (point(&mut rng, false), point(&mut rng, false));
            let (y, z) = diff_pair(&a, &b, &ctx);
            if z.abs() > ctx.xi * G && y.abs() <= ctx.etas[ctx.alpha() - 1] * F {
                let expect = if z < 0.0 { CompareOutcome::Better } else { CompareOutcome::Worse };
                assert_eq!(q.compare_mapped(y, z), expect, "y={y} z={z}");
            }
        }
    }
}
