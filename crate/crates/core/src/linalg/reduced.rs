use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{Modulus, Rational};
use crate::error::{Error, Result};

use super::Tensor3Q;

/// Non-negative integer below `2^192`, little-endian `u64` limbs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Wide(pub [u64; 3]);

impl Wide {
    pub fn from_biguint(x: &BigUint) -> Wide {
        let mut limbs = [0u64; 3];
        for (slot, d) in limbs.iter_mut().zip(x.iter_u64_digits()) {
            *slot = d;
        }
        debug_assert!(x.bits() <= 192);
        Wide(limbs)
    }

    #[cfg(test)]
    pub fn to_biguint(self) -> BigUint {
        let mut bytes = Vec::with_capacity(24);
        for l in self.0 {
            bytes.extend_from_slice(&l.to_le_bytes());
        }
        BigUint::from_bytes_le(&bytes)
    }

    fn cmp_limbs(&self, other: &Wide) -> std::cmp::Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }

    /// `(self + other) mod m` for `self, other < m`.
    #[inline]
    pub fn add_mod(self, other: Wide, m: Wide) -> Wide {
        let mut s = [0u64; 3];
        let mut carry = false;
        for i in 0..3 {
            let (a, c1) = self.0[i].overflowing_add(other.0[i]);
            let (b, c2) = a.overflowing_add(carry as u64);
            s[i] = b;
            carry = c1 || c2;
        }
        let s = Wide(s);
        if carry || s.cmp_limbs(&m) != std::cmp::Ordering::Less {
            let mut d = [0u64; 3];
            let mut borrow = false;
            for i in 0..3 {
                let (a, b1) = s.0[i].overflowing_sub(m.0[i]);
                let (b, b2) = a.overflowing_sub(borrow as u64);
                d[i] = b;
                borrow = b1 || b2;
            }
            Wide(d)
        } else {
            s
        }
    }
}

/// An order-3 rational tensor `M` stored for fast evaluation of
/// `floor(M(a, b)) mod q`.
///
/// Entries are kept as numerators `M * d` over a common denominator `d` and
/// reduced modulo `Lambda = q * d * 4^f`, where `f` is the number of
/// fractional bits allowed in the input vectors. When both inputs have
/// denominators dividing `2^f`, changing a numerator by a multiple of
/// `Lambda` moves `M(a, b)` by a multiple of `q`, so the floored result
/// modulo `q` is unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedTensor {
    dims: [usize; 3],
    modulus: Modulus,
    denom: BigUint,
    frac_bits: u32,
    lambda: BigUint,
    limbs: usize,
    data: Vec<u32>,
}

/// Bits of input magnitude supported by the evaluation kernel.
const INPUT_LIMBS: usize = 3;

impl ReducedTensor {
    pub fn zeros(dims: [usize; 3], modulus: Modulus, denom: BigUint, frac_bits: u32) -> Result<Self> {
        let lambda = (BigUint::from(modulus.value()) * &denom) << (2 * frac_bits);
        if lambda.bits() > 192 {
            return Err(Error::InvalidParams(format!(
                "reduced tensor modulus needs {} bits; at most 192 supported",
                lambda.bits()
            )));
        }
        let limbs = (lambda.bits() as usize).div_ceil(32).max(1);
        Ok(ReducedTensor {
            dims,
            modulus,
            denom,
            frac_bits,
            lambda,
            limbs,
            data: vec![0; dims[0] * dims[1] * dims[2] * limbs],
        })
    }

    /// Scales an exact tensor by `denom` and reduces it.
    pub fn from_exact(t: &Tensor3Q, modulus: Modulus, denom: BigUint, frac_bits: u32) -> Result<Self> {
        let mut out = Self::zeros(t.dims(), modulus, denom, frac_bits)?;
        let d = BigInt::from(out.denom.clone());
        let lambda = BigInt::from(out.lambda.clone());
        let [d0, d1, d2] = t.dims();
        for k in 0..d2 {
            for i in 0..d0 {
                for j in 0..d1 {
                    let scaled: Rational = t.get(i, j, k) * &d;
                    if !scaled.is_integer() {
                        return Err(Error::InvalidParams(format!(
                            "tensor entry {} has a denominator not dividing {}",
                            t.get(i, j, k),
                            out.denom
                        )));
                    }
                    let n = scaled.to_integer().mod_floor(&lambda);
                    out.set_wide(i, j, k, Wide::from_biguint(&n.to_biguint().expect("nonnegative")));
                }
            }
        }
        Ok(out)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn denom(&self) -> &BigUint {
        &self.denom
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// `q * d * 4^f`.
    pub fn lambda(&self) -> &BigUint {
        &self.lambda
    }

    pub(crate) fn lambda_wide(&self) -> Wide {
        Wide::from_biguint(&self.lambda)
    }

    /// Number of 32-bit limbs per stored numerator.
    pub fn limbs(&self) -> usize {
        self.limbs
    }

    /// Raw numerator limbs in storage order (slice-major, then row-major).
    pub fn raw(&self) -> &[u32] {
        &self.data
    }

    /// Rebuilds a tensor from raw limbs, validating shape and range.
    pub fn from_raw(
        dims: [usize; 3],
        modulus: Modulus,
        denom: BigUint,
        frac_bits: u32,
        data: Vec<u32>,
    ) -> Result<Self> {
        let mut out = Self::zeros(dims, modulus, denom, frac_bits)?;
        if data.len() != out.data.len() {
            return Err(Error::DimensionMismatch {
                context: "reduced tensor limbs",
                expected: out.data.len(),
                found: data.len(),
            });
        }
        out.data = data;
        for idx in 0..out.data.len() / out.limbs {
            if out.numerator_at(idx) >= out.lambda {
                return Err(Error::InvalidParams("reduced tensor entry out of range".into()));
            }
        }
        Ok(out)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        ((k * self.dims[0] + i) * self.dims[1] + j) * self.limbs
    }

    pub(crate) fn set_wide(&mut self, i: usize, j: usize, k: usize, x: Wide) {
        let off = self.offset(i, j, k);
        for l in 0..self.limbs {
            let word = x.0[l / 2];
            self.data[off + l] = if l % 2 == 0 { word as u32 } else { (word >> 32) as u32 };
        }
    }

    /// Writes a whole frontal slice given row-major wide values.
    pub(crate) fn set_slice(&mut self, k: usize, values: &[Wide]) {
        debug_assert_eq!(values.len(), self.dims[0] * self.dims[1]);
        for i in 0..self.dims[0] {
            for j in 0..self.dims[1] {
                self.set_wide(i, j, k, values[i * self.dims[1] + j]);
            }
        }
    }

    fn numerator_at(&self, idx: usize) -> BigUint {
        let off = idx * self.limbs;
        BigUint::from_slice(&self.data[off..off + self.limbs])
    }

    /// Stored numerator of entry `(i, j, k)`, in `[0, Lambda)`.
    pub fn numerator(&self, i: usize, j: usize, k: usize) -> BigUint {
        self.numerator_at(self.offset(i, j, k) / self.limbs)
    }

    /// `floor(sum_ij a_i b_j M_ijk) mod q` for every `k`, where the actual
    /// inputs are `a / 2^f` and `b / 2^f`. Inputs are the integer numerators
    /// and must be below `2^96` in magnitude.
    pub fn eval(&self, a: &[i128], b: &[i128], parallel: bool) -> Result<Vec<i64>> {
        for (v, dim, context) in [
            (a, self.dims[0], "reduced tensor left input"),
            (b, self.dims[1], "reduced tensor right input"),
        ] {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| x.unsigned_abs() >> (32 * INPUT_LIMBS) != 0) {
                return Err(Error::InvalidParams("tensor input exceeds 96 bits".into()));
            }
        }
        let (b_limbs, b_sign): (Vec<[u64; INPUT_LIMBS]>, Vec<usize>) = b
            .iter()
            .map(|&x| {
                let m = x.unsigned_abs();
                let l = [m as u32 as u64, (m >> 32) as u32 as u64, (m >> 64) as u32 as u64];
                (l, (x < 0) as usize)
            })
            .unzip();
        let slice = |k: usize| self.eval_slice(k, a, &b_limbs, &b_sign);
        let out: Vec<i64> = if parallel {
            (0..self.dims[2]).into_par_iter().map(slice).collect()
        } else {
            (0..self.dims[2]).map(slice).collect()
        };
        Ok(out)
    }

    fn eval_slice(&self, k: usize, a: &[i128], b_limbs: &[[u64; INPUT_LIMBS]], b_sign: &[usize]) -> i64 {
        let nl = self.limbs;
        let cols = nl + INPUT_LIMBS;
        let mut x = BigInt::zero();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let mut acc = [[0u128; 6 + INPUT_LIMBS]; 2];
            let base = self.offset(i, 0, k);
            let row = &self.data[base..base + self.dims[1] * nl];
            for (j, entry) in row.chunks_exact(nl).enumerate() {
                let bl = &b_limbs[j];
                let dst = &mut acc[b_sign[j]];
                for (p, &nlimb) in entry.iter().enumerate() {
                    let nlimb = nlimb as u64;
                    for (s, &bs) in bl.iter().enumerate() {
                        dst[p + s] += (nlimb * bs) as u128;
                    }
                }
            }
            let s = combine(&acc[0][..cols]) - combine(&acc[1][..cols]);
            x += BigInt::from(ai) * s;
        }
        let div = BigInt::from(self.denom.clone()) << (2 * self.frac_bits);
        let lambda = BigInt::from(self.lambda.clone());
        let floored = x.mod_floor(&lambda).div_floor(&div);
        self.modulus.reduce(floored.to_i128().expect("quotient below q"))
    }
}

/// `sum_c acc[c] * 2^(32c)` as a big integer.
fn combine(acc: &[u128]) -> BigInt {
    let mut out = BigUint::zero();
    for &v in acc.iter().rev() {
        out <<= 32;
        out += BigUint::from(v);
    }
    BigInt::from_biguint(Sign::Plus, out)
}
