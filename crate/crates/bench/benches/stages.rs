use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fjlp_core::wht::{wht_full, wht_partial, IndexSet};
use fjlp_core::{FourWiseMatrix, Transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn wht(c: &mut Criterion) {
    let mut group = c.benchmark_group("wht");
    for log_d in [16, 20] {
        let d = 1usize << log_d;
        let x = random_vec(d, 1);
        let outputs = IndexSet::new((0..16).map(|i| i * (d / 16) + i).collect()).unwrap();
        group.throughput(Throughput::Elements(d as u64));
        group.bench_with_input(BenchmarkId::new("full", d), &x, |b, x| b.iter(|| wht_full(x).unwrap()));
        group.bench_with_input(BenchmarkId::new("partial_r16", d), &x, |b, x| {
            b.iter(|| wht_partial(x, &outputs).unwrap())
        });
    }
    group.finish();
}

fn fourwise(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourwise");
    for (k, d) in [(8, 256), (16, 1 << 16), (16, 1 << 20)] {
        let a = FourWiseMatrix::build(k, d).unwrap();
        let v = random_vec(d, 2);
        let id = format!("k{k}_d{d}");
        group.throughput(Throughput::Elements(d as u64));
        group.bench_with_input(BenchmarkId::new("fast", &id), &v, |b, v| b.iter(|| a.multiply_fast(v).unwrap()));
        group.bench_with_input(BenchmarkId::new("explicit", &id), &v, |b, v| {
            b.iter(|| a.multiply_explicit(v).unwrap())
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("apply");
    group.sample_size(20);
    for log_d in [16, 18, 20, 22] {
        let d = 1usize << log_d;
        let t = Transform::plan(d, 16, 1.0, 0, true).unwrap();
        let x = random_vec(d, 3);
        group.throughput(Throughput::Elements(d as u64));
        group.bench_with_input(BenchmarkId::from_parameter(d), &x, |b, x| b.iter(|| t.apply(x).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, wht, fourwise, pipeline);
criterion_main!(benches);
