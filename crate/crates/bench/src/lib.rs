//! Criterion benchmarks for homomorphic gates.
//!
//! Run with `cargo bench -p mvfhe-bench`. The `mvfhe bench` command reports
//! the same per-AND cost as a CSV across presets.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, Throughput};
use mvfhe::keys::{build_evalkey, keygen, EvalKey, Preset, SecretKey};
use mvfhe::she::{encrypt, eval_add, eval_mult_with, Ciphertext, Plaintext};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Fixture {
    sk: SecretKey,
    evk: EvalKey,
    a: Ciphertext,
    b: Ciphertext,
}

fn fixture(preset: Preset) -> Fixture {
    let p = preset.params().expect("preset parameters");
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let sk = keygen(&p, &mut rng).expect("keygen");
    let evk = build_evalkey(&sk, &mut rng).expect("evaluation key");
    let a = encrypt(&sk, &Plaintext::random(p.slots(), &mut rng), &mut rng).expect("encrypt");
    let b = encrypt(&sk, &Plaintext::random(p.slots(), &mut rng), &mut rng).expect("encrypt");
    Fixture { sk, evk, a, b }
}

pub fn benchmarks(c: &mut Criterion) {
    let fixtures: Vec<(Preset, Fixture)> = [Preset::Toy, Preset::Small, Preset::Medium]
        .into_iter()
        .map(|p| (p, fixture(p)))
        .collect();

    let mut group = c.benchmark_group("and");
    group.sample_size(10);
    for (preset, f) in &fixtures {
        let ell = f.sk.params().ell;
        group.throughput(Throughput::Elements(1));
        group.bench_with_input(BenchmarkId::new("serial", ell), preset, |bench, _| {
            bench.iter(|| eval_mult_with(&f.evk, black_box(&f.a), black_box(&f.b), false).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("slices-parallel", ell), preset, |bench, _| {
            bench.iter(|| eval_mult_with(&f.evk, black_box(&f.a), black_box(&f.b), true).unwrap())
        });
    }
    group.finish();

    let (_, toy) = &fixtures[0];
    c.bench_function("xor/toy", |bench| {
        bench.iter(|| eval_add(black_box(&toy.a), black_box(&toy.b)).unwrap())
    });
    c.bench_function("encrypt/toy", |bench| {
        let m = Plaintext::ones(toy.sk.params().slots());
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        bench.iter(|| encrypt(&toy.sk, black_box(&m), &mut rng).unwrap())
    });
}
