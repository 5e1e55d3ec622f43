use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use multidraw::rng::replicate_stream;
use multidraw::simulate::{run, RecordOptions};
use multidraw::{DrawSampler, SamplingModel};
use multidraw_bench::{critical, large_index, simulation};
use std::hint::black_box;

fn draws(c: &mut Criterion) {
    let mut group = c.benchmark_group("draw");
    for m in [1usize, 2, 3, 8] {
        for model in SamplingModel::ALL {
            let sampler = DrawSampler::new(model, m);
            let mut rng = replicate_stream(1, 0);
            group.bench_function(BenchmarkId::new(model.symbol(), m), |b| {
                b.iter(|| sampler.sample(black_box(4_000), black_box(10_000), &mut rng))
            });
        }
    }
    // beyond the u64 fast path
    let sampler = DrawSampler::new(SamplingModel::WithReplacement, 3);
    let mut rng = replicate_stream(1, 0);
    group.bench_function("R/3/huge-urn", |b| {
        b.iter(|| sampler.sample(black_box(1 << 40), black_box(3 << 40), &mut rng))
    });
    group.finish();
}

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    let steps = 10_000u64;
    group.throughput(Throughput::Elements(steps * 8));
    for (name, params) in [("critical", critical()), ("large-index", large_index())] {
        let mut cfg = simulation(&params, SamplingModel::WithReplacement, steps, 8);
        cfg.record = RecordOptions::final_only();
        group.bench_function(name, |b| b.iter(|| run(black_box(&cfg)).expect("tenable")));
    }
    group.finish();
}

criterion_group!(benches, draws, paths);
criterion_main!(benches);
