use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_rational::BigRational;

use lravass::decision::{decide, AverageAnalyzer, Budget, Problem, Query};
use lravass::iqp::solve;
use lravass::semantics::lasso_value;
use lravass_bench::{chain_iqp, random_model, running_example_with_lasso, threesat_instance};

fn lasso(c: &mut Criterion) {
    let (v, cost, l) = running_example_with_lasso(50);
    c.bench_function("lasso_value/ae_j50", |b| b.iter(|| lasso_value(&v, &cost, black_box(&l)).unwrap()));
}

fn running_example(c: &mut Criterion) {
    let (v, cost, _) = running_example_with_lasso(0);
    let lambda = BigRational::from_integer((-100).into());
    c.bench_function("regular_average/ae_minus_100", |b| {
        b.iter(|| {
            let an = AverageAnalyzer::new(&v, &cost, &Budget::default()).unwrap();
            an.query(black_box(&lambda))
        })
    });
}

fn random(c: &mut Criterion) {
    let (v, cost) = random_model(4, 2, 7);
    let lambda = BigRational::from_integer(0.into());
    c.bench_function("regular_average/random_4x2", |b| {
        b.iter(|| AverageAnalyzer::new(&v, &cost, &Budget::quick()).unwrap().query(black_box(&lambda)))
    });
}

fn iqp(c: &mut Criterion) {
    let inst = chain_iqp(4, 3);
    c.bench_function("iqp/chain4_box8", |b| b.iter(|| solve(black_box(&inst), 8, 1_000_000).unwrap()));
}

fn threesat(c: &mut Criterion) {
    let (v, cost) = threesat_instance(3, 4, 1);
    c.bench_function("regular_finite/3sat_3x4", |b| {
        b.iter(|| {
            let q = Query { vass: &v, cost: &cost, problem: Problem::RegularFinite, budget: Budget::quick() };
            decide(black_box(&q)).unwrap()
        })
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = lasso, running_example, random, iqp, threesat
}
criterion_main!(benches);
