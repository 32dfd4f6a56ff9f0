//! Sparse multivariate polynomials over `Z_q` in degrevlex order.

mod monomial;

pub use monomial::{enumerate_monomials, monomials_of_degree, Monomial};

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::arith::Modulus;
use crate::error::{Error, Result};

/// A polynomial with balanced coefficients; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    modulus: Modulus,
    terms: BTreeMap<Monomial, i64>,
}

impl Polynomial {
    pub fn zero(nvars: usize, modulus: Modulus) -> Self {
        Polynomial {
            nvars,
            modulus,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64, nvars: usize, modulus: Modulus) -> Self {
        Self::from_terms(nvars, modulus, [(Monomial::one(nvars), c)])
    }

    pub fn monomial(m: Monomial, c: i64, modulus: Modulus) -> Self {
        let nvars = m.nvars();
        Self::from_terms(nvars, modulus, [(m, c)])
    }

    /// Builds a polynomial, summing repeated monomials and dropping zeros.
    pub fn from_terms<I>(nvars: usize, modulus: Modulus, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, i64)>,
    {
        let mut p = Polynomial::zero(nvars, modulus);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: i64) {
        let q = self.modulus;
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = q.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                let c = q.reduce(c as i128);
                if c != 0 {
                    v.insert(c);
                }
            }
        }
    }

    /// Uniformly random coefficients on every monomial of degree at most `deg`.
    pub fn random<R: Rng + ?Sized>(nvars: usize, deg: u32, modulus: Modulus, rng: &mut R) -> Self {
        Self::from_terms(
            nvars,
            modulus,
            enumerate_monomials(nvars, deg)
                .into_iter()
                .map(|m| (m, modulus.sample(rng))),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn coeff(&self, m: &Monomial) -> i64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Terms in ascending degrevlex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn check(&self, other: &Polynomial) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: other.modulus.value(),
            });
        }
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                context: "polynomial variables",
                expected: self.nvars,
                found: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> Polynomial {
        let q = self.modulus;
        Self::from_terms(self.nvars, q, self.terms().map(|(m, a)| (m.clone(), q.mul(a, c))))
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check(other)?;
        let q = self.modulus;
        let mut out = Polynomial::zero(self.nvars, q);
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a.mul(b), q.mul(ca, cb));
            }
        }
        Ok(out)
    }

    /// `c * m * self`.
    pub fn mul_term(&self, m: &Monomial, c: i64) -> Polynomial {
        let q = self.modulus;
        Self::from_terms(self.nvars, q, self.terms().map(|(a, ca)| (a.mul(m), q.mul(ca, c))))
    }

    /// The degrevlex-largest term.
    pub fn leading_term(&self) -> Result<(Monomial, i64)> {
        self.terms
            .iter()
            .next_back()
            .map(|(m, &c)| (m.clone(), c))
            .ok_or(Error::ZeroPolynomial)
    }

    pub fn eval(&self, z: &[i64]) -> Result<i64> {
        if z.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                context: "evaluation point",
                expected: self.nvars,
                found: z.len(),
            });
        }
        let q = self.modulus;
        let mut acc = 0i64;
        for (m, c) in self.terms() {
            acc = q.add(acc, q.mul(c, m.eval(z, q)));
        }
        Ok(acc)
    }

    /// Repeated top-reduction by `set` until the degree is at most `r`.
    ///
    /// At each step the degrevlex-leading monomial (necessarily of degree
    /// above `r`) is cancelled with the first element of `set` whose leading
    /// monomial divides it. The divisor choice depends only on the monomial,
    /// so the result is a linear function of `self`.
    pub fn reduce_by_set(&self, set: &[Polynomial], r: u32) -> Result<Polynomial> {
        let leads = set
            .iter()
            .map(|g| {
                self.check(g)?;
                let (m, c) = g.leading_term()?;
                let inv = self.modulus.inv(c).ok_or(Error::ZeroPolynomial)?;
                Ok((m, inv))
            })
            .collect::<Result<Vec<_>>>()?;
        let q = self.modulus;
        let mut f = self.clone();
        while let Some((mu, c)) = f.terms.iter().next_back().map(|(m, &c)| (m.clone(), c)) {
            if mu.degree() <= r {
                break;
            }
            let (idx, quot) = leads
                .iter()
                .enumerate()
                .find_map(|(i, (lm, _))| mu.div(lm).map(|d| (i, d)))
                .ok_or_else(|| Error::ReductionStalled(mu.to_string()))?;
            let factor = q.mul(c, leads[idx].1);
            for (m, cg) in set[idx].terms() {
                f.add_term(m.mul(&quot), -q.mul(cg, factor));
            }
        }
        Ok(f)
    }
}

impl fmt::Display for Polynomial {
    /// `c*x1^a*x2^b + ...` in descending degrevlex order with balanced
    /// coefficients; the zero polynomial prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().rev().enumerate() {
            let sep = match (i, c < 0) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let mag = c.unsigned_abs();
            if m.degree() == 0 {
                write!(f, "{sep}{mag}")?;
            } else {
                write!(f, "{sep}{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self} mod {})", self.modulus)
    }
}
