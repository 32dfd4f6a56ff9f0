//! Per-AND-gate timing across presets.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use mvfhe::keys::{build_evalkey, keygen, Params, Preset};
use mvfhe::she::{encrypt, eval_mult_with, Ciphertext, Plaintext};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// Mean wall time of one homomorphic AND at one parameter set.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub preset: Preset,
    pub n: usize,
    pub ell: usize,
    pub log_q: u32,
    pub gates: usize,
    /// Gates evaluated one after another.
    pub serial: Duration,
    /// Independent gates spread over the thread pool; wall time per gate.
    pub parallel: Duration,
}

impl BenchRow {
    /// `ell^3 log2(q)^2`, the cost model the timings are compared against.
    pub fn model(&self) -> f64 {
        (self.ell as f64).powi(3) * (self.log_q as f64).powi(2)
    }

    /// Serial nanoseconds per unit of [`model`](Self::model).
    pub fn normalized(&self) -> f64 {
        self.serial.as_nanos() as f64 / self.model()
    }
}

/// Generates keys for `params`, then times `gates` multiplications of fresh
/// ciphertexts. Key generation is not timed.
pub fn bench_params(preset: Preset, params: &Params, gates: usize, seed: u64) -> mvfhe::Result<BenchRow> {
    assert!(gates > 0, "at least one gate");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = keygen(params, &mut rng)?;
    let evk = build_evalkey(&sk, &mut rng)?;
    let pairs: Vec<(Ciphertext, Ciphertext)> = (0..gates)
        .map(|_| {
            let a = encrypt(&sk, &Plaintext::random(params.slots(), &mut rng), &mut rng)?;
            let b = encrypt(&sk, &Plaintext::random(params.slots(), &mut rng), &mut rng)?;
            Ok((a, b))
        })
        .collect::<mvfhe::Result<_>>()?;

    // One untimed gate warms caches and the thread pool.
    eval_mult_with(&evk, &pairs[0].0, &pairs[0].1, false)?;

    let start = Instant::now();
    for (a, b) in &pairs {
        std::hint::black_box(eval_mult_with(&evk, a, b, false)?);
    }
    let serial = start.elapsed() / gates as u32;

    let start = Instant::now();
    let out: Vec<Ciphertext> = pairs
        .par_iter()
        .map(|(a, b)| eval_mult_with(&evk, a, b, false))
        .collect::<mvfhe::Result<_>>()?;
    std::hint::black_box(out);
    let parallel = start.elapsed() / gates as u32;

    Ok(BenchRow {
        preset,
        n: params.n,
        ell: params.ell,
        log_q: params.log_q(),
        gates,
        serial,
        parallel,
    })
}

pub fn bench_preset(preset: Preset, gates: usize, seed: u64) -> mvfhe::Result<BenchRow> {
    bench_params(preset, &preset.params()?, gates, seed)
}

pub const CSV_HEADER: &str = "preset,n,ell,log_q,gates,serial_us,parallel_us,model,serial_ns_per_model";

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{:.1},{:.1},{:.0},{:.4}",
            r.preset.name(),
            r.n,
            r.ell,
            r.log_q,
            r.gates,
            r.serial.as_secs_f64() * 1e6,
            r.parallel.as_secs_f64() * 1e6,
            r.model(),
            r.normalized()
        )
        .expect("writing to a String cannot fail");
    }
    s
}

/// True when serial per-gate time never decreases as `ell` grows.
pub fn is_monotone(rows: &[BenchRow]) -> bool {
    let mut sorted: Vec<&BenchRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.ell);
    sorted.windows(2).all(|w| w[0].serial <= w[1].serial)
}
