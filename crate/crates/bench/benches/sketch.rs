use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use exaloglog::{estimate_distinct, MartingaleSketch, Params, Sketch, TokenSet};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONFIGS: [(u8, u8); 3] = [(1, 9), (2, 16), (2, 20)];

fn hashes(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.next_u64()).collect()
}

fn filled(params: Params, n: usize, seed: u64) -> Sketch {
    let mut s = Sketch::new(params);
    for h in hashes(n, seed) {
        s.insert_hash(h);
    }
    s
}

fn insert(c: &mut Criterion) {
    let input = hashes(100_000, 1);
    let mut group = c.benchmark_group("insert");
    group.throughput(Throughput::Elements(input.len() as u64));
    for (t, d) in CONFIGS {
        let params = Params::new(t, d, 12).unwrap();
        group.bench_with_input(BenchmarkId::new("sketch", params), &input, |b, input| {
            b.iter_batched_ref(
                || Sketch::new(params),
                |s| {
                    for &h in input {
                        s.insert_hash(h);
                    }
                },
                BatchSize::LargeInput,
            )
        });
        group.bench_with_input(
            BenchmarkId::new("martingale", params),
            &input,
            |b, input| {
                b.iter_batched_ref(
                    || MartingaleSketch::new(params),
                    |s| {
                        for &h in input {
                            s.insert_hash(h);
                        }
                    },
                    BatchSize::LargeInput,
                )
            },
        );
    }
    group.finish();
}

fn estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    for (t, d) in CONFIGS {
        for p in [8, 12] {
            let sketch = filled(Params::new(t, d, p).unwrap(), 1 << (p + 6), 2);
            group.bench_function(BenchmarkId::new("ml", sketch.params()), |b| {
                b.iter(|| estimate_distinct(black_box(&sketch)))
            });
        }
    }
    let mut tokens = TokenSet::new(26).unwrap();
    tokens.extend_hashes(hashes(10_000, 3));
    group.bench_function("tokens r=26 n=1e4", |b| {
        b.iter(|| black_box(&tokens).estimate())
    });
    group.finish();
}

fn merge_and_reduce(c: &mut Criterion) {
    let params = Params::new(2, 20, 12).unwrap();
    let a = filled(params, 200_000, 4);
    let b = filled(params, 200_000, 5);
    c.bench_function("merge t=2 d=20 p=12", |bench| {
        bench.iter(|| black_box(&a).merge(black_box(&b)).unwrap())
    });
    c.bench_function("reduce t=2 d=20 p=12 to d=16 p=10", |bench| {
        bench.iter(|| black_box(&a).reduce(16, 10).unwrap())
    });
}

fn serialize(c: &mut Criterion) {
    let sketch = filled(Params::new(2, 20, 12).unwrap(), 200_000, 6);
    let bytes = sketch.to_bytes();
    let mut group = c.benchmark_group("serialize");
    group.throughput(Throughput::Bytes(bytes.len() as u64));
    group.bench_function("to_bytes", |b| b.iter(|| black_box(&sketch).to_bytes()));
    group.bench_function("from_bytes", |b| {
        b.iter(|| Sketch::from_bytes(black_box(&bytes)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, insert, estimate, merge_and_reduce, serialize);
criterion_main!(benches);
