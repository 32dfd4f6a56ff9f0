use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::rational::{round_floor, Rational};
use crate::error::{Error, Result};

/// Fixed-point precision used when tabulating the Gaussian weights.
const PREC: u32 = 128;

/// `floor(2^PREC * exp(-a))` for rational `a >= 0`, computed with integers only.
fn exp_neg_fixed(a: &Rational) -> BigInt {
    let one = BigInt::one() << PREC;
    if a.is_zero() {
        return one;
    }
    // Halve the argument until it is below 1/2, then square back up.
    let mut k = 0u32;
    let mut y = a.clone();
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    while y >= half {
        y /= BigInt::from(2);
        k += 1;
    }
    let y_fixed = round_floor(&(y * Rational::from_integer(one.clone())));
    let mut sum = one.clone();
    let mut term = one.clone();
    let mut i = 1u32;
    loop {
        term = ((&term * &y_fixed) >> PREC) / BigInt::from(i);
        if term.is_zero() {
            break;
        }
        if i % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        i += 1;
    }
    for _ in 0..k {
        sum = (&sum * &sum) >> PREC;
    }
    sum
}

/// Discrete Gaussian on `[-B, B]` with weight `exp(-x^2 / (2 sigma^2))`.
///
/// Sampling draws `x` uniformly from the support and accepts it with
/// probability equal to its weight, using a precomputed 64-bit threshold per
/// magnitude. `sigma = 0` gives the degenerate zero-noise distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteGaussian {
    sigma: Rational,
    bound: u64,
    thresholds: Vec<u128>,
}

impl DiscreteGaussian {
    pub fn new(sigma: Rational, bound: u64) -> Result<Self> {
        if sigma.is_zero() {
            return Ok(DiscreteGaussian {
                sigma,
                bound,
                thresholds: Vec::new(),
            });
        }
        if sigma < Rational::one() {
            return Err(Error::InvalidParams("sigma must be 0 or at least 1".into()));
        }
        let six_sigma = (&sigma * BigInt::from(6)).ceil().to_integer();
        if BigInt::from(bound) < six_sigma {
            return Err(Error::InvalidParams(format!(
                "noise bound {bound} is below ceil(6 sigma) = {six_sigma}"
            )));
        }
        let two_var = &sigma * &sigma * BigInt::from(2);
        let thresholds = (0..=bound)
            .map(|x| {
                let a = Rational::from_integer(BigInt::from(x * x)) / &two_var;
                let w = exp_neg_fixed(&a) >> (PREC - 64);
                w.to_u128().expect("threshold fits in 65 bits")
            })
            .collect();
        Ok(DiscreteGaussian {
            sigma,
            bound,
            thresholds,
        })
    }

    /// The degenerate distribution that always returns 0.
    pub fn zero() -> Self {
        DiscreteGaussian {
            sigma: Rational::zero(),
            bound: 0,
            thresholds: Vec::new(),
        }
    }

    pub fn sigma(&self) -> &Rational {
        &self.sigma
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn is_zero_noise(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if self.is_zero_noise() {
            return 0;
        }
        let b = self.bound as i64;
        loop {
            let x = rng.random_range(-b..=b);
            let u = rng.next_u64() as u128;
            if u < self.thresholds[x.unsigned_abs() as usize] {
                return x;
            }
        }
    }
}

/// A Gaussian paired with its own seeded ChaCha20 stream.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    dist: DiscreteGaussian,
    rng: ChaCha20Rng,
}

impl NoiseSampler {
    pub fn new(sigma: Rational, bound: u64, seed: u64) -> Result<Self> {
        Ok(NoiseSampler {
            dist: DiscreteGaussian::new(sigma, bound)?,
            rng: ChaCha20Rng::seed_from_u64(seed),
        })
    }

    pub fn from_parts(dist: DiscreteGaussian, rng: ChaCha20Rng) -> Self {
        NoiseSampler { dist, rng }
    }

    pub fn distribution(&self) -> &DiscreteGaussian {
        &self.dist
    }

    pub fn sample(&mut self) -> i64 {
        self.dist.sample(&mut self.rng)
    }
}

impl Iterator for NoiseSampler {
    type Item = i64;
    fn next(&mut self) -> Option<i64> {
        Some(self.sample())
    }
}
