use chtbench::cht::{
    eps_level_compare, feasibility_rules_compare, qpc_pi, stochastic_rank, xi_at, CompareOutcome, QpcQualitative,
    XiSchedule, XI_FLOOR,
};
use chtbench::mapping::{Division, QpcContext};
use chtbench::problem::Evaluated;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn evaluated() -> impl Strategy<Value = Evaluated> {
    (-100.0..100.0f64, prop_oneof![Just(0.0), 0.0..50.0f64]).prop_map(|(f, v)| Evaluated::synthetic(f, v))
}

fn context() -> impl Strategy<Value = QpcContext> {
    (
        0.01..1e3f64,
        0.01..1e3f64,
        prop_oneof![Just(1.0), 1e-4..1.0f64],
        prop_oneof![
            (0.05..0.95f64).prop_map(|e| vec![e]),
            (0.05..0.45f64, 0.55..0.95f64).prop_map(|(a, b)| vec![a, b]),
        ],
    )
        .prop_map(|(f, g, xi, etas)| QpcContext::with_etas(f, g, xi, etas).unwrap())
}

proptest! {
    #[test]
    fn rank_is_odd_and_monotone(ctx in context(), a in -3e3..3e3f64, b in -3e3..3e3f64) {
        for div in [ctx.y_division(), ctx.z_division()] {
            prop_assert_eq!(div.rank_of(-a), -div.rank_of(a));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(div.rank_of(lo) <= div.rank_of(hi));
            let top = div.alpha() as i32 + 1;
            prop_assert!(div.rank_of(a).abs() <= top);
        }
    }

    #[test]
    fn rank_zero_only_at_zero(ctx in context(), a in -3e3..3e3f64) {
        let div: Division = ctx.z_division();
        prop_assert_eq!(div.rank_of(a) == 0, a == 0.0);
    }

    #[test]
    fn comparators_are_antisymmetric(a in evaluated(), b in evaluated(), eps in 0.0..10.0f64, ctx in context()) {
        prop_assert_eq!(feasibility_rules_compare(&a, &b), feasibility_rules_compare(&b, &a).reverse());
        prop_assert_eq!(eps_level_compare(&a, &b, eps), eps_level_compare(&b, &a, eps).reverse());
        let q = QpcQualitative::new(ctx);
        let (y, z) = (a.f - b.f, a.viol - b.viol);
        prop_assert_eq!(q.compare_mapped(y, z), q.compare_mapped(-y, -z).reverse());
    }

    #[test]
    fn eps_zero_matches_feasibility_rules(a in evaluated(), b in evaluated()) {
        let tied_infeasible = a.viol > 0.0 && a.viol == b.viol;
        if !tied_infeasible {
            prop_assert_eq!(eps_level_compare(&a, &b, 0.0), feasibility_rules_compare(&a, &b));
        }
    }

    #[test]
    fn eps_zero_breaks_infeasible_ties_by_objective(f1 in -10.0..10.0f64, f2 in -10.0..10.0f64, v in 0.01..5.0f64) {
        let (a, b) = (Evaluated::synthetic(f1, v), Evaluated::synthetic(f2, v));
        prop_assert_eq!(feasibility_rules_compare(&a, &b), CompareOutcome::NoPreference);
        let expect = if f1 < f2 { CompareOutcome::Better } else if f1 > f2 { CompareOutcome::Worse } else { CompareOutcome::NoPreference };
        prop_assert_eq!(eps_level_compare(&a, &b, 0.0), expect);
    }

    #[test]
    fn pi_order_is_invariant_to_common_scaling(
        ctx in context(),
        u in prop::array::uniform4(0.0..=1.0f64),
        feasible in prop::array::uniform2(any::<bool>()),
        c in 0.5..10.0f64,
    ) {
        // points drawn within the context's exact scales
        let pt = |fu: f64, vu: f64, feas: bool| {
            Evaluated::synthetic(fu * ctx.f_range, if feas { 0.0 } else { vu * ctx.g_max })
        };
        let (a, b) = (pt(u[0], u[1], feasible[0]), pt(u[2], u[3], feasible[1]));
        let s = ctx.scaled(c).unwrap();
        let (p1, p2) = (qpc_pi(&a, &ctx), qpc_pi(&b, &ctx));
        let (s1, s2) = (qpc_pi(&a, &s), qpc_pi(&b, &s));
        if (p1 - p2).abs() > 1e-9 * (1.0 + p1.abs() + p2.abs()) && (s1 - s2).abs() > 1e-9 * (1.0 + s1.abs() + s2.abs()) {
            prop_assert_eq!(p1 > p2, s1 > s2);
        }
    }

    #[test]
    fn stochastic_rank_is_a_permutation(pop in prop::collection::vec(evaluated(), 0..40), pf in 0.0..=1.0f64, seed: u64, sweeps in 0usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = stochastic_rank(&pop, sweeps, pf, &mut rng);
        order.sort_unstable();
        prop_assert_eq!(order, (0..pop.len()).collect::<Vec<_>>());
    }

    #[test]
    fn xi_never_increases(xi_max in 1e-6..=1.0f64, frac in 0.0..=1.0f64, p in 0.1..10.0f64, t_max in 1u64..5000, t in 0u64..6000) {
        let s = XiSchedule::new(xi_max, xi_max * frac, p, t_max).unwrap();
        prop_assert!(xi_at(&s, t + 1) <= xi_at(&s, t));
        prop_assert!(xi_at(&s, t) >= XI_FLOOR);
        prop_assert!(xi_at(&s, t) <= xi_max);
    }
}
