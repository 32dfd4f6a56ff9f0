use rand::Rng;

use crate::error::{Error, Result};

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Miller–Rabin with the first twelve prime bases, which is exact for every
/// `n < 2^64` (the bound for this witness set is about 3.2e23).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Probabilistic check with `rounds` random bases on top of the fixed set.
/// For 64-bit inputs the fixed set alone is already a proof.
pub fn is_probable_prime<R: Rng + ?Sized>(n: u64, rounds: usize, rng: &mut R) -> bool {
    if !is_prime_u64(n) {
        return false;
    }
    if n < 5 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'round: for _ in 0..rounds {
        let a = rng.random_range(2..n - 1);
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'round;
            }
        }
        return false;
    }
    true
}

/// Uniformly samples odd candidates with exactly `bits` significant bits until
/// one is prime.
pub fn random_prime<R: Rng + ?Sized>(bits: u32, rng: &mut R) -> Result<u64> {
    if !(8..=64).contains(&bits) {
        return Err(Error::InvalidParams(format!(
            "prime size must be between 8 and 64 bits, got {bits}"
        )));
    }
    let top = 1u64 << (bits - 1);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    loop {
        let x = (rng.next_u64() & mask) | top | 1;
        if is_prime_u64(x) {
            return Ok(x);
        }
    }
}
