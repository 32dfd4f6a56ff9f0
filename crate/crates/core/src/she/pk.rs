use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::keys::{Params, SecretKey};

use super::{check_plaintext, encrypt, Ciphertext, Plaintext};

/// Public key: `d` encryptions of zero and one encryption per basis vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    params: Params,
    eps: Rational,
    c0: Vec<Vec<i64>>,
    c_pk: Vec<Vec<i64>>,
}

impl PublicKey {
    /// Rebuilds a key, checking `d = ceil((1 + eps) ell log2 q)` and every row.
    pub fn from_parts(params: Params, eps: Rational, c0: Vec<Vec<i64>>, c_pk: Vec<Vec<i64>>) -> Result<Self> {
        if eps <= Rational::zero() {
            return Err(Error::InvalidParams("public-key slack must be positive".into()));
        }
        let d = params.pk_rows(&eps);
        for (context, found, expected) in [("C0 rows", c0.len(), d), ("C_pk rows", c_pk.len(), params.slots())] {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                });
            }
        }
        let q = params.q;
        for row in c0.iter().chain(&c_pk) {
            if row.len() != params.ell {
                return Err(Error::DimensionMismatch {
                    context: "public-key row",
                    expected: params.ell,
                    found: row.len(),
                });
            }
            if row.iter().any(|&x| q.reduce(x as i128) != x) {
                return Err(Error::InvalidParams(
                    "public-key entry is not a balanced residue".into(),
                ));
            }
        }
        Ok(PublicKey { params, eps, c0, c_pk })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    /// Zero encryptions `C0`, `d x ell`.
    pub fn c0(&self) -> &[Vec<i64>] {
        &self.c0
    }

    /// Basis encryptions `C_pk`, `(ell - n) x ell`.
    pub fn c_pk(&self) -> &[Vec<i64>] {
        &self.c_pk
    }
}

pub fn pk_keygen<R: Rng + ?Sized>(sk: &SecretKey, eps: &Rational, rng: &mut R) -> Result<PublicKey> {
    let p = sk.params();
    if *eps <= Rational::zero() {
        return Err(Error::InvalidParams("public-key slack must be positive".into()));
    }
    let zero = Plaintext::zeros(p.slots());
    let c0 = (0..p.pk_rows(eps))
        .map(|_| encrypt(sk, &zero, rng).map(|c| c.c))
        .collect::<Result<_>>()?;
    let c_pk = (0..p.slots())
        .map(|i| encrypt(sk, &Plaintext::unit(p.slots(), i), rng).map(|c| c.c))
        .collect::<Result<_>>()?;
    Ok(PublicKey {
        params: p.clone(),
        eps: eps.clone(),
        c0,
        c_pk,
    })
}

/// Encrypts `m` with each `C0` row included independently with probability 1/2.
pub fn pk_encrypt<R: Rng + ?Sized>(pk: &PublicKey, m: &Plaintext, rng: &mut R) -> Result<Ciphertext> {
    let subset: Vec<bool> = (0..pk.c0.len()).map(|_| rng.random()).collect();
    pk_encrypt_subset(pk, m, &subset)
}

/// `c = m C_pk + sum of the C0 rows selected by `subset``.
pub fn pk_encrypt_subset(pk: &PublicKey, m: &Plaintext, subset: &[bool]) -> Result<Ciphertext> {
    let p = &pk.params;
    check_plaintext(p, m)?;
    if subset.len() != pk.c0.len() {
        return Err(Error::DimensionMismatch {
            context: "subset mask",
            expected: pk.c0.len(),
            found: subset.len(),
        });
    }
    let q = p.q;
    let mut acc = vec![0i128; p.ell];
    let rows = m
        .bits()
        .iter()
        .zip(&pk.c_pk)
        .filter(|(b, _)| **b == 1)
        .map(|(_, r)| r)
        .chain(pk.c0.iter().zip(subset).filter(|(_, s)| **s).map(|(r, _)| r));
    for row in rows {
        for (a, &x) in acc.iter_mut().zip(row) {
            *a += x as i128;
        }
    }
    let count = m.weight() + subset.iter().filter(|&&s| s).count();
    Ok(Ciphertext {
        c: acc.into_iter().map(|a| q.reduce(a)).collect(),
        modulus: q,
        level: 0,
        noise_hint: Some(Rational::from_integer(BigInt::from(count as u64 * p.bound))),
    })
}
