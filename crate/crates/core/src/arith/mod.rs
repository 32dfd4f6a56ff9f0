//! Exact arithmetic: balanced residues modulo an odd prime, big rationals,
//! prime generation and bounded discrete Gaussian noise.

mod noise;
mod prime;
mod rational;

pub use noise::{DiscreteGaussian, NoiseSampler};
pub use prime::{is_prime_u64, is_probable_prime, random_prime};
pub(crate) use rational::rational_mod;
pub use rational::{rational, round_floor, round_nearest, Rational};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// An odd prime modulus `q < 2^64`.
///
/// Residues are kept in the balanced interval `(-q/2, q/2]`, which for odd
/// `q` is `[-(q-1)/2, (q-1)/2]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    q: u64,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 || q % 2 == 0 || !is_prime_u64(q) {
            return Err(Error::InvalidModulus(q.to_string()));
        }
        Ok(Modulus { q })
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.q
    }

    /// `floor(q/2)`.
    #[inline]
    pub fn half(self) -> i64 {
        (self.q / 2) as i64
    }

    /// Number of significant bits; equals `ceil(log2 q)` for odd `q > 1`.
    #[inline]
    pub fn bits(self) -> u32 {
        64 - self.q.leading_zeros()
    }

    #[inline]
    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.q)
    }

    /// Balanced reduction of a machine integer.
    #[inline]
    pub fn reduce(self, x: i128) -> i64 {
        let q = self.q as i128;
        let mut r = x.rem_euclid(q);
        if r > q / 2 {
            r -= q;
        }
        r as i64
    }

    /// Balanced reduction of an arbitrary-precision integer.
    pub fn reduce_big(self, x: &BigInt) -> i64 {
        let r = x.mod_floor(&self.as_bigint());
        let r = r.to_i128().expect("residue fits in i128");
        self.reduce(r)
    }

    #[inline]
    pub fn add(self, a: i64, b: i64) -> i64 {
        self.reduce(a as i128 + b as i128)
    }

    #[inline]
    pub fn sub(self, a: i64, b: i64) -> i64 {
        self.reduce(a as i128 - b as i128)
    }

    #[inline]
    pub fn mul(self, a: i64, b: i64) -> i64 {
        self.reduce(a as i128 * b as i128)
    }

    #[inline]
    pub fn neg(self, a: i64) -> i64 {
        self.reduce(-(a as i128))
    }

    pub fn pow(self, base: i64, mut exp: u64) -> i64 {
        let mut acc = 1i64;
        let mut b = self.reduce(base as i128);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        self.reduce(acc as i128)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: i64) -> Option<i64> {
        let a = self.reduce(a as i128);
        if a == 0 {
            return None;
        }
        Some(self.pow(a, self.q - 2))
    }

    /// Uniform element of `Z_q` in balanced form.
    pub fn sample<R: rand::Rng + ?Sized>(self, rng: &mut R) -> i64 {
        let x = rng.random_range(0..self.q);
        self.reduce(x as i128)
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({})", self.q)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// An element of `Z_q` stored as its balanced representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Residue {
    value: i64,
    modulus: Modulus,
}

impl Residue {
    pub fn new(x: i128, modulus: Modulus) -> Self {
        Residue {
            value: modulus.reduce(x),
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        Residue { value: 0, modulus }
    }

    #[inline]
    pub fn value(self) -> i64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    fn check(self, other: Residue) -> Result<Modulus> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: other.modulus.value(),
            });
        }
        Ok(self.modulus)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Residue) -> Result<Residue> {
        let m = self.check(other)?;
        Ok(Residue::new(self.value as i128 + other.value as i128, m))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Residue) -> Result<Residue> {
        let m = self.check(other)?;
        Ok(Residue::new(self.value as i128 - other.value as i128, m))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Residue) -> Result<Residue> {
        let m = self.check(other)?;
        Ok(Residue::new(self.value as i128 * other.value as i128, m))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Residue {
        Residue::new(-(self.value as i128), self.modulus)
    }

    pub fn inv(self) -> Option<Residue> {
        self.modulus.inv(self.value).map(|value| Residue {
            value,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `[x]_q`: the representative of `x mod q` in `(-q/2, q/2]`.
pub fn balanced_mod(x: &BigInt, q: u64) -> Result<Residue> {
    let modulus = Modulus::new(q)?;
    Ok(Residue {
        value: modulus.reduce_big(x),
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bm(x: i64, q: u64) -> i64 {
        balanced_mod(&BigInt::from(x), q).unwrap().value()
    }

    #[test]
    fn balanced_mod_examples() {
        assert_eq!(bm(7, 5), 2);
        assert_eq!(bm(3, 5), -2);
        assert_eq!(bm(-8, 7), -1);
        assert_eq!(bm(2, 5), 2);
        assert_eq!(bm(-2, 5), -2);
    }

    #[test]
    fn rejects_bad_moduli() {
        for q in [0u64, 1, 2, 4, 9, 15, 21, 1 << 20] {
            assert!(matches!(
                balanced_mod(&BigInt::from(1), q),
                Err(Error::InvalidModulus(_))
            ));
        }
    }

    #[test]
    fn mixed_moduli_rejected() {
        let a = Residue::new(3, Modulus::new(7).unwrap());
        let b = Residue::new(3, Modulus::new(11).unwrap());
        assert!(matches!(a.add(b), Err(Error::ModulusMismatch { .. })));
        assert!(a.mul(b).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = Modulus::new(1_000_003).unwrap();
        for a in [1i64, 2, -5, 12345, -499_999] {
            let ai = m.inv(a).unwrap();
            assert_eq!(m.mul(a, ai), 1);
        }
        assert_eq!(m.inv(0), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn balanced_interval_and_congruence(x in any::<i64>(), idx in 0usize..6) {
            let q = [3u64, 5, 7, 65_537, 1_000_000_007, 0xffff_ffff_ffff_ffc5][idx];
            let r = bm(x, q);
            let h = (q / 2) as i128;
            prop_assert!(-(h) <= r as i128 && r as i128 <= h);
            prop_assert_eq!((x as i128 - r as i128).rem_euclid(q as i128), 0);
        }

        #[test]
        fn ring_homomorphism(a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
            let q = 1_000_000_007u64;
            let m = Modulus::new(q).unwrap();
            let (ra, rb, rc) = (bm(a, q), bm(b, q), bm(c, q));
            let lhs = m.reduce(a as i128 * b as i128 + c as i128);
            let rhs = m.add(m.mul(ra, rb), rc);
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(m.reduce(a as i128 - b as i128), m.sub(ra, rb));
        }
    }
}
