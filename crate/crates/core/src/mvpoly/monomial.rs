use std::cmp::Ordering;
use std::fmt;

use crate::arith::Modulus;

/// Exponent vector ordered by degree-reverse-lexicographic order.
///
/// `a > b` when `a` has larger total degree, or equal degree and the last
/// nonzero entry of `a - b` is negative.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
    degree: u32,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        let degree = exps.iter().sum();
        Monomial { exps, degree }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial::new(vec![0; nvars])
    }

    /// `x_i` (zero-based index).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `self / d` when `d` divides `self`.
    pub fn div(&self, d: &Monomial) -> Option<Monomial> {
        d.divides(self)
            .then(|| Monomial::new(self.exps.iter().zip(&d.exps).map(|(a, b)| a - b).collect()))
    }

    pub fn eval(&self, z: &[i64], q: Modulus) -> i64 {
        self.exps
            .iter()
            .zip(z)
            .fold(1i64, |acc, (&e, &zi)| q.mul(acc, q.pow(zi, e as u64)))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.exps.iter().zip(&other.exps).rev() {
                if a != b {
                    // Smaller exponent in the last differing variable is larger.
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// All monomials in `nvars` variables of exact total degree `d`, ascending.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == nvars {
            prefix.push(d);
            out.push(Monomial::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for a in 0..=d {
            prefix.push(a);
            rec(nvars, d - a, prefix, out);
            prefix.pop();
        }
    }
    assert!(nvars >= 1, "at least one variable");
    let mut out = Vec::new();
    rec(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    out.sort();
    out
}

/// All monomials of total degree at most `r`, ascending in degrevlex;
/// there are `C(nvars + r, r)` of them.
pub fn enumerate_monomials(nvars: usize, r: u32) -> Vec<Monomial> {
    (0..=r).flat_map(|d| monomials_of_degree(nvars, d)).collect()
}
