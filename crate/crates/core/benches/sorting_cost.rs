use std::hint::black_box;

use chtbench::cht::{qpc_pi, Comparator, CompareOutcome, QpcQualitative};
use chtbench::mapping::QpcContext;
use chtbench::problem::{self, Evaluated};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn population(l: usize) -> (Vec<Evaluated>, QpcContext) {
    let cop = problem::g06();
    let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
    let pop: Vec<Evaluated> = (0..l)
        .map(|_| {
            let x: Vec<f64> = cop
                .lower_bounds()
                .iter()
                .zip(cop.upper_bounds())
                .map(|(&lo, &hi)| rng.gen_range(lo..=hi))
                .collect();
            cop.evaluate(&x).unwrap()
        })
        .collect();
    let lo = pop.iter().map(|e| e.f).fold(f64::INFINITY, f64::min);
    let hi = pop.iter().map(|e| e.f).fold(f64::NEG_INFINITY, f64::max);
    let g = pop.iter().map(|e| e.viol).fold(0.0, f64::max);
    let ctx = QpcContext::new((hi - lo).max(1e-12), g.max(1e-12), 1.0).unwrap();
    (pop, ctx)
}

fn sorting(c: &mut Criterion) {
    let mut group = c.benchmark_group("sort_population");
    for l in [10, 50, 100, 200] {
        let (pop, ctx) = population(l);
        let criterion = QpcQualitative::new(ctx.clone());
        group.bench_with_input(BenchmarkId::new("evaluation", l), &pop, |b, pop| {
            b.iter(|| {
                let keys: Vec<f64> = pop.iter().map(|e| qpc_pi(e, &ctx)).collect();
                let mut idx: Vec<usize> = (0..pop.len()).collect();
                idx.sort_by(|&i, &j| keys[j].total_cmp(&keys[i]));
                black_box(idx)
            })
        });
        group.bench_with_input(BenchmarkId::new("pairwise", l), &pop, |b, pop| {
            b.iter(|| {
                let mut idx: Vec<usize> = (0..pop.len()).collect();
                idx.sort_by(|&i, &j| match criterion.compare(&pop[i], &pop[j]) {
                    CompareOutcome::Better => std::cmp::Ordering::Less,
                    CompareOutcome::Worse => std::cmp::Ordering::Greater,
                    _ => std::cmp::Ordering::Equal,
                });
                black_box(idx)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sorting);
criterion_main!(benches);
