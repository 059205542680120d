use condexp_lab::lab::{qiu_sigma, qiu_space};
use condexp_lab::opnorm::{opnorm_ascent_with, opnorm_oracle_with};
use condexp_lab::{AscentOptions, Execution, FiniteProductSpace, MixedExponents, SigmaAlgebra};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn ascent(c: &mut Criterion) {
    let mut group = c.benchmark_group("ascent");
    group.sample_size(10);
    let e = MixedExponents::scalar(10.0, 2.0).unwrap();
    let cases: [(&str, FiniteProductSpace, SigmaAlgebra); 2] = [
        ("two_coin", qiu_space(), qiu_sigma()),
        (
            "two_coin_squared",
            qiu_space().tensor(&qiu_space()),
            qiu_sigma().tensor(&qiu_sigma()),
        ),
    ];
    for (name, space, sigma) in &cases {
        for (label, execution) in STRATEGIES {
            let opts = AscentOptions {
                execution,
                ..AscentOptions::new(32, 1)
            };
            group.bench_with_input(BenchmarkId::new(*name, label), &opts, |b, opts| {
                b.iter(|| opnorm_ascent_with(space, sigma, &e, black_box(opts)).unwrap())
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let space = FiniteProductSpace::new(vec![0.3, 0.7], vec![0.2, 0.5, 0.3]).unwrap();
    let sigma = SigmaAlgebra::from_labels((2, 3), &[0, 1, 1, 2, 0, 2]).unwrap();
    let e = MixedExponents::scalar(4.0, 2.0).unwrap();
    for (label, execution) in STRATEGIES {
        group.bench_function(BenchmarkId::new("six_cells", label), |b| {
            b.iter(|| opnorm_oracle_with(&space, &sigma, &e, black_box(execution)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ascent, oracle);
criterion_main!(benches);
