//! Cost of ordering a population by evaluation versus by pairwise comparison.

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cht::{qpc_pi, CompareOutcome, Comparator, QpcQualitative};
use crate::error::{Error, Result};
use crate::mapping::QpcContext;
use crate::problem::{Cop, Evaluated};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortRow {
    pub size: usize,
    /// Fastest of the repeats, in seconds.
    pub eval_sort_secs: f64,
    pub pairwise_sort_secs: f64,
    pub eval_calls: usize,
    pub compare_calls: usize,
    /// Both sorts produce the same `pi` sequence.
    pub orders_agree: bool,
}

fn outcome_order(o: CompareOutcome) -> Ordering {
    match o {
        CompareOutcome::Better => Ordering::Less,
        CompareOutcome::Worse => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

fn eval_sort(pop: &[Evaluated], ctx: &QpcContext) -> (Vec<usize>, usize) {
    let keys: Vec<f64> = pop.iter().map(|e| qpc_pi(e, ctx)).collect();
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]));
    (idx, keys.len())
}

fn pairwise_sort(pop: &[Evaluated], criterion: &QpcQualitative) -> (Vec<usize>, usize) {
    let mut calls = 0usize;
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| {
        calls += 1;
        outcome_order(criterion.compare(&pop[a], &pop[b]))
    });
    (idx, calls)
}

/// Sorts `repeats` times a random in-box population of each size, once by
/// `pi` keys and once with the qualitative comparator.
pub fn sort_benchmark(cop: &Cop, sizes: &[usize], repeats: usize, seed: u64) -> Result<Vec<SortRow>> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(size as u64));
        let (lo, hi) = (cop.lower_bounds(), cop.upper_bounds());
        let pop = (0..size)
            .map(|_| {
                let x: Vec<f64> = lo.iter().zip(hi).map(|(&l, &u)| l + (u - l) * rng.gen::<f64>()).collect();
                cop.evaluate(&x)
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut f_lo, mut f_hi, mut g) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for e in &pop {
            f_lo = f_lo.min(e.f);
            f_hi = f_hi.max(e.f);
            g = g.max(e.viol);
        }
        let f_range = if f_hi > f_lo { f_hi - f_lo } else { 1.0 };
        let ctx = QpcContext::new(f_range, if g > 0.0 { g } else { 1.0 }, 1.0)?;
        let criterion = QpcQualitative::new(ctx.clone());

        let (mut eval_best, mut pair_best) = (f64::INFINITY, f64::INFINITY);
        let mut last = None;
        for _ in 0..repeats {
            let t = Instant::now();
            let a = eval_sort(&pop, &ctx);
            eval_best = eval_best.min(t.elapsed().as_secs_f64());
            let t = Instant::now();
            let b = pairwise_sort(&pop, &criterion);
            pair_best = pair_best.min(t.elapsed().as_secs_f64());
            last = Some((a, b));
        }
        let ((ia, eval_calls), (ib, compare_calls)) = last.expect("repeats is positive");
        let pis: Vec<f64> = pop.iter().map(|e| qpc_pi(e, &ctx)).collect();
        let orders_agree = ia.iter().zip(&ib).all(|(&a, &b)| {
            let (pa, pb) = (pis[a], pis[b]);
            (pa - pb).abs() <= 1e-9 * (1.0 + pa.abs() + pb.abs())
        });
        rows.push(SortRow {
            size,
            eval_sort_secs: eval_best,
            pairwise_sort_secs: pair_best,
            eval_calls,
            compare_calls,
            orders_agree,
        });
    }
    Ok(rows)
}
