use num_bigint::BigInt;

use crate::arith::{rational_mod, Modulus, Rational};
use crate::error::{Error, Result};

/// Bits per decomposed entry: `u + ceil(log2 q)`.
pub fn gadget_width(q: Modulus, u: u32) -> usize {
    (u + q.bits()) as usize
}

/// Decomposes each entry `x` of `v` as the binary expansion of
/// `(x mod q) * 2^u`, an integer in `[0, q 2^u)`.
///
/// Output is plane-major: bit `p` of entry `i` sits at `p * len + i`.
pub fn bitdecomp(v: &[Rational], q: Modulus, u: u32) -> Result<Vec<u8>> {
    let width = gadget_width(q, u);
    let qb = q.as_bigint();
    let scale = BigInt::from(1) << u;
    let mut out = vec![0u8; v.len() * width];
    for (i, x) in v.iter().enumerate() {
        let scaled = rational_mod(x, &qb) * &scale;
        if !scaled.is_integer() {
            return Err(Error::NotDyadic(x.to_string()));
        }
        let n = scaled.to_integer();
        for p in 0..width {
            out[p * v.len() + i] = n.bit(p as u64) as u8;
        }
    }
    Ok(out)
}

/// Numerators over `2^u` of [`powersoftwo`].
///
/// Entry `p * len + i` is `2^(p-u) w_i` reduced into the balanced range
/// modulo `q` at fixed denominator `2^u`, i.e. its numerator is the balanced
/// residue of `w_i 2^p` modulo `q 2^u`.
pub fn powersoftwo_numerators(w: &[i64], q: Modulus, u: u32) -> Vec<i128> {
    let width = gadget_width(q, u);
    let mut out = vec![0i128; w.len() * width];
    for (i, &x) in w.iter().enumerate() {
        let x = q.reduce(x as i128);
        for p in 0..width as u32 {
            out[p as usize * w.len() + i] = if p < u {
                // |x 2^p| < q 2^(u-1): already balanced.
                (x as i128) << p
            } else {
                (q.mul(x, q.pow(2, (p - u) as u64)) as i128) << u
            };
        }
    }
    out
}

/// `PowersOfTwo_{q,u}(w)`, paired with [`bitdecomp`] so that
/// `<v, w> = <BitDecomp(v), PowersOfTwo(w)> mod q`.
pub fn powersoftwo(w: &[i64], q: Modulus, u: u32) -> Vec<Rational> {
    let den = BigInt::from(1) << u;
    powersoftwo_numerators(w, q, u)
        .into_iter()
        .map(|n| Rational::new(BigInt::from(n), den.clone()))
        .collect()
}

/// Inner product of a bit vector and a rational vector.
pub fn inner_bits(bits: &[u8], w: &[Rational]) -> Rational {
    bits.iter()
        .zip(w)
        .filter(|(b, _)| **b == 1)
        .map(|(_, x)| x.clone())
        .sum()
}

/// True when `a - b` is an integer multiple of `q`.
pub fn congruent_mod_q(a: &Rational, b: &Rational, q: Modulus) -> bool {
    let d: Rational = (a - b) / q.as_bigint();
    d.is_integer()
}
