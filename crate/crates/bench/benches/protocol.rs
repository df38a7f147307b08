use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use eda_bench::{config, fresh_instance};
use eda_core::order_stats::{binomial_order_prob, OrderStatParams};
use eda_core::protocol::median;
use eda_core::sim::run_round;
use eda_core::OrderEstimate;

fn bench_median(c: &mut Criterion) {
    let mut group = c.benchmark_group("median");
    for n in [20usize, 100, 200] {
        let values: Vec<OrderEstimate> = (0..n)
            .map(|i| OrderEstimate::clamped(((i * 7919) % n) as f64 / n as f64))
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &values, |b, v| {
            b.iter(|| median(black_box(v)).unwrap())
        });
    }
    group.finish();
}

fn bench_round(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_round");
    group.sample_size(20);
    for (peers, inbox) in [(1000usize, 20usize), (2000, 100), (20_000, 200)] {
        let cfg = config(peers, inbox);
        let start = fresh_instance(&cfg);
        group.bench_function(format!("{peers}x{inbox}"), |b| {
            b.iter_batched(
                || start.clone(),
                |mut inst| run_round(&mut inst, 1, &cfg),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn bench_binomial(c: &mut Criterion) {
    let mut group = c.benchmark_group("binomial_order_prob");
    for m in [40u64, 200, 1_000_000] {
        let params = OrderStatParams::new(m, 0.5, m / 2).unwrap();
        group.bench_function(format!("M={m}"), |b| {
            b.iter(|| binomial_order_prob(black_box(&params)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_median, bench_round, bench_binomial);
criterion_main!(benches);
