use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gfsbox::analysis::{differential_uniformity_with, nonlinearity_with};
use gfsbox::generator::{candidate_stats_with, search_with, SearchConfig};
use gfsbox::{Exec, SBox};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STRATEGIES: [(&str, Exec); 2] = [
    ("parallel", Exec::Parallel),
    ("sequential", Exec::Sequential),
];

fn random_box(bits: u32) -> SBox {
    let mut entries: Vec<u32> = (0..1u32 << bits).collect();
    entries.shuffle(&mut ChaCha8Rng::seed_from_u64(bits as u64));
    SBox::new(bits, entries).unwrap()
}

fn metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinearity");
    group.sample_size(10);
    for bits in [8, 10] {
        let s = random_box(bits);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, bits), &s, |b, s| {
                b.iter(|| nonlinearity_with(black_box(s), exec))
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("differential_uniformity");
    group.sample_size(10);
    for bits in [8, 10] {
        let s = random_box(bits);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, bits), &s, |b, s| {
                b.iter(|| differential_uniformity_with(black_box(s), exec))
            });
        }
    }
    group.finish();
}

fn candidates(c: &mut Criterion) {
    let mut group = c.benchmark_group("candidate_stats");
    group.sample_size(10);
    for bits in [4, 8] {
        let config = SearchConfig::random(bits, 1, 1);
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, bits), &config, |b, config| {
                b.iter(|| candidate_stats_with(black_box(config), 1000, exec).unwrap())
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    let config = SearchConfig::random(4, 1, 4);
    for (name, exec) in STRATEGIES {
        group.bench_function(name, |b| {
            b.iter(|| search_with(black_box(&config), exec).unwrap().count())
        });
    }
    group.finish();
}

criterion_group!(benches, metrics, candidates);
criterion_main!(benches);
