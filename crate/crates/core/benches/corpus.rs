use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::rngs::StdRng;
use rand::SeedableRng;

use tabproc::codec::{encode_clip, TokenMode};
use tabproc::model::Score;
use tabproc::{par, stats};

#[path = "../tests/common/mod.rs"]
mod common;

fn corpus(n: usize) -> Vec<Score> {
    let mut rng = StdRng::seed_from_u64(n as u64);
    (0..n).map(|_| common::random_normalized_score(&mut rng)).collect()
}

fn aggregate(c: &mut Criterion) {
    let mut group = c.benchmark_group("aggregate");
    for n in [64, 512, 2048] {
        let scores = corpus(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sequential", n), &scores, |b, s| {
            b.iter(|| stats::aggregate_sequential(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &scores, |b, s| {
            b.iter(|| stats::aggregate(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn encode(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode");
    let enc = |s: &Score| encode_clip(s, TokenMode::PitchOctave).unwrap().to_json().unwrap();
    for n in [64, 512] {
        let scores = corpus(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("sequential", n), &scores, |b, s| {
            b.iter(|| par::sequential::map(black_box(s), enc))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &scores, |b, s| {
            b.iter(|| par::map(black_box(s), enc))
        });
    }
    group.finish();
}

criterion_group!(benches, aggregate, encode);
criterion_main!(benches);
