//! Encryption, decryption and homomorphic evaluation.

mod pk;

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;

use crate::arith::{Modulus, Rational};
use crate::error::{Error, Result};
use crate::keys::{EvalKey, Params, SecretKey, Variant};

pub use pk::{pk_encrypt, pk_encrypt_subset, pk_keygen, PublicKey};

/// A message of `ell - n` bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Plaintext(Vec<u8>);

impl Plaintext {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParams(format!("plaintext bit {b} is not 0 or 1")));
        }
        Ok(Plaintext(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Plaintext(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        Plaintext(vec![1; len])
    }

    /// The `i`-th standard basis vector.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut bits = vec![0; len];
        bits[i] = 1;
        Plaintext(bits)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Plaintext((0..len).map(|_| rng.random_range(0..=1)).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn xor(&self, other: &Plaintext) -> Plaintext {
        Plaintext(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn and(&self, other: &Plaintext) -> Plaintext {
        Plaintext(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

impl fmt::Display for Plaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Plaintext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidParams(format!("'{c}' is not a plaintext bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Plaintext(bits))
    }
}

/// A ciphertext vector with its level and advisory noise bound.
///
/// Equality ignores `noise_hint`.
#[derive(Clone, Debug)]
pub struct Ciphertext {
    c: Vec<i64>,
    modulus: Modulus,
    level: u32,
    noise_hint: Option<Rational>,
}

impl PartialEq for Ciphertext {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.modulus == other.modulus && self.level == other.level
    }
}

impl Eq for Ciphertext {}

impl Ciphertext {
    /// Entries must be balanced residues modulo `modulus`.
    pub fn new(c: Vec<i64>, modulus: Modulus, level: u32, noise_hint: Option<Rational>) -> Result<Self> {
        if let Some(x) = c.iter().find(|&&x| modulus.reduce(x as i128) != x) {
            return Err(Error::InvalidParams(format!(
                "ciphertext entry {x} is not a balanced residue"
            )));
        }
        Ok(Ciphertext {
            c,
            modulus,
            level,
            noise_hint,
        })
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.c
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// Multiplications on the deepest path behind this ciphertext.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn noise_hint(&self) -> Option<&Rational> {
        self.noise_hint.as_ref()
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    fn check(&self, params: &Params) -> Result<()> {
        if self.modulus != params.q || self.c.len() != params.ell {
            return Err(Error::ParamsMismatch);
        }
        Ok(())
    }
}

fn check_plaintext(params: &Params, m: &Plaintext) -> Result<()> {
    if m.len() != params.slots() {
        return Err(Error::DimensionMismatch {
            context: "plaintext length",
            expected: params.slots(),
            found: m.len(),
        });
    }
    Ok(())
}

pub fn encrypt<R: Rng + ?Sized>(sk: &SecretKey, m: &Plaintext, rng: &mut R) -> Result<Ciphertext> {
    let p = sk.params();
    let y: Vec<i64> = (0..p.n).map(|_| p.q.sample(rng)).collect();
    let e: Vec<i64> = (0..p.slots()).map(|_| sk.gaussian().sample(rng)).collect();
    encrypt_with(sk, m, &y, &e)
}

/// Deterministic encryption with caller-chosen `y` (length `n`) and noise
/// `e` (length `ell - n`): `c = (y S_enc + (0, m floor(q/2) + e)) R`.
pub fn encrypt_with(sk: &SecretKey, m: &Plaintext, y: &[i64], e: &[i64]) -> Result<Ciphertext> {
    let p = sk.params();
    let q = p.q;
    check_plaintext(p, m)?;
    if e.len() != p.slots() {
        return Err(Error::DimensionMismatch {
            context: "noise vector",
            expected: p.slots(),
            found: e.len(),
        });
    }
    let mut w = sk.s_enc().left_mul(y)?;
    for (j, (&bit, &ej)) in m.bits().iter().zip(e).enumerate() {
        let x = w[p.n + j] as i128 + bit as i128 * q.half() as i128 + ej as i128;
        w[p.n + j] = q.reduce(x);
    }
    let c = sk.r().left_mul(&w)?;
    Ok(Ciphertext {
        c,
        modulus: q,
        level: 0,
        noise_hint: Some(Rational::from_integer(BigInt::from(p.bound))),
    })
}

/// `c S_dec` as balanced residues.
pub fn decrypt_raw(sk: &SecretKey, ct: &Ciphertext) -> Result<Vec<i64>> {
    ct.check(sk.params())?;
    sk.s_dec().left_mul(&ct.c)
}

/// Rounds each `x / floor(q/2)` to the nearest integer (ties up) and takes it mod 2.
pub fn decode(x: &[i64], q: Modulus) -> Plaintext {
    let h = q.half() as i128;
    Plaintext(
        x.iter()
            .map(|&x| {
                let r = (2 * x as i128 + h).div_euclid(2 * h);
                r.rem_euclid(2) as u8
            })
            .collect(),
    )
}

pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    let x = decrypt_raw(sk, ct)?;
    if let Some(h) = &ct.noise_hint {
        if *h >= sk.params().decryption_margin() {
            log::warn!("noise hint {} reaches floor(q/2)/2; decryption may be wrong", h.round());
        }
    }
    Ok(decode(&x, sk.params().q))
}

/// `bal(c S_dec - m floor(q/2))`, the decryption noise against an expected message.
#[cfg(any(test, feature = "noise-oracle"))]
pub fn noise_of(sk: &SecretKey, ct: &Ciphertext, m: &Plaintext) -> Result<Vec<i64>> {
    let p = sk.params();
    check_plaintext(p, m)?;
    let q = p.q;
    let x = decrypt_raw(sk, ct)?;
    Ok(x.iter()
        .zip(m.bits())
        .map(|(&x, &b)| q.reduce(x as i128 - b as i128 * q.half() as i128))
        .collect())
}

fn same_ring(a: &Ciphertext, b: &Ciphertext) -> Result<()> {
    if a.modulus != b.modulus || a.c.len() != b.c.len() {
        return Err(Error::ParamsMismatch);
    }
    Ok(())
}

pub fn eval_add(a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    same_ring(a, b)?;
    let q = a.modulus;
    let noise_hint = match (&a.noise_hint, &b.noise_hint) {
        (Some(h1), Some(h2)) => Some(Params::add_noise_bound(h1, h2)),
        _ => None,
    };
    Ok(Ciphertext {
        c: a.c.iter().zip(&b.c).map(|(&x, &y)| q.add(x, y)).collect(),
        modulus: q,
        level: a.level.max(b.level),
        noise_hint,
    })
}

pub fn eval_mult(evk: &EvalKey, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    eval_mult_with(evk, a, b, false)
}

/// [`eval_mult`], optionally spreading the output slices over threads.
pub fn eval_mult_with(evk: &EvalKey, a: &Ciphertext, b: &Ciphertext, parallel: bool) -> Result<Ciphertext> {
    let p = evk.params();
    a.check(p)?;
    b.check(p)?;
    if evk.variant() != Variant::of(p) {
        return Err(Error::VariantMismatch(match p.gadget {
            true => "parameters call for a gadget key",
            false => "parameters call for a plain key",
        }));
    }
    let level = a.level.max(b.level) + 1;
    if level > p.depth {
        return Err(Error::DepthExceeded {
            needed: level as usize,
            budget: p.depth as usize,
        });
    }
    let noise_hint = match (&a.noise_hint, &b.noise_hint) {
        (Some(h1), Some(h2)) => Some(p.mult_noise_bound(h1, h2)),
        _ => None,
    };
    Ok(Ciphertext {
        c: evk.apply(&a.c, &b.c, parallel)?,
        modulus: p.q,
        level,
        noise_hint,
    })
}

/// True when a hint is present and below the decryption threshold.
pub fn hint_admits(params: &Params, ct: &Ciphertext) -> bool {
    ct.noise_hint.as_ref().is_some_and(|h| *h < params.decryption_margin())
}

#[cfg(test)]
mod tests;
