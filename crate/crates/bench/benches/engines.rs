use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use explorebench::adapters::{ExactEngine, ProgressiveEngine};
use explorebench::datagen;
use explorebench::metrics::MetricSet;
use explorebench::workloadgen::{generate, DataProfile, GenerationConfig};
use explorebench::WorkflowType;
use explorebench_bench::{flights, queries};

const ROWS: usize = 1_000_000;

fn exact_scan(c: &mut Criterion) {
    let (table, schema) = flights(ROWS);
    let engine = ExactEngine::with_table(table, schema);
    let mut g = c.benchmark_group("exact_scan");
    g.throughput(Throughput::Elements(ROWS as u64));
    g.sample_size(10);
    for (viz, filter) in queries() {
        g.bench_function(BenchmarkId::from_parameter(&viz.name), |b| {
            b.iter(|| black_box(engine.execute(&viz, &filter, None).unwrap()))
        });
    }
    g.finish();
}

fn progressive_snapshot(c: &mut Criterion) {
    let (table, schema) = flights(ROWS);
    let engine = ProgressiveEngine::with_table(&table, schema, 7);
    let (viz, filter) = queries().swap_remove(1);
    let mut g = c.benchmark_group("progressive_snapshot");
    g.sample_size(10);
    for fraction in [0.01, 0.1, 0.5] {
        let m = (ROWS as f64 * fraction) as usize;
        g.throughput(Throughput::Elements(m as u64));
        g.bench_with_input(BenchmarkId::from_parameter(fraction), &m, |b, &m| {
            b.iter(|| black_box(engine.snapshot(&viz, &filter, m, 0.95).unwrap()))
        });
    }
    g.finish();
}

fn copula(c: &mut Criterion) {
    let (seed, _) = flights(20_000);
    let model = datagen::fit(&seed, 20_000, 3).unwrap();
    let mut g = c.benchmark_group("copula");
    g.sample_size(10);
    g.bench_function("fit_20k", |b| b.iter(|| black_box(datagen::fit(&seed, 20_000, 3).unwrap())));
    g.throughput(Throughput::Elements(100_000));
    g.bench_function("synthesize_100k", |b| b.iter(|| black_box(model.synthesize(100_000, 4))));
    g.finish();
}

fn workload(c: &mut Criterion) {
    let (table, _) = flights(10_000);
    let profile = DataProfile::from_table(&table, "flights");
    c.bench_function("generate_mixed_workflow", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            black_box(generate(&GenerationConfig::new("mixed_0", WorkflowType::Mixed, seed), &profile).unwrap())
        })
    });
}

fn metrics(c: &mut Criterion) {
    let (table, schema) = flights(200_000);
    let exact = ExactEngine::with_table(table.clone(), schema.clone());
    let progressive = ProgressiveEngine::with_table(&table, schema, 1);
    let (viz, filter) = queries().swap_remove(2);
    let truth = exact.execute(&viz, &filter, None).unwrap().unwrap();
    let partial = progressive.snapshot(&viz, &filter, 10_000, 0.95).unwrap();
    c.bench_function("evaluate_metric_set", |b| {
        b.iter(|| black_box(MetricSet::evaluate(Some(&partial), &truth, false)))
    });
}

criterion_group!(benches, exact_scan, progressive_snapshot, copula, workload, metrics);
criterion_main!(benches);
