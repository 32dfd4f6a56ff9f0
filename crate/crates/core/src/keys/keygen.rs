use rand::Rng;

use crate::arith::{DiscreteGaussian, Modulus};
use crate::error::{Error, Result};
use crate::linalg::MatrixZq;
use crate::mvpoly::{enumerate_monomials, monomials_of_degree, Monomial, Polynomial};

use super::Params;

/// Rejection-sampling cap for generator and point selection.
pub const RETRY_CAP: usize = 100;

/// How the lower-left block `R2` of the mixing matrix `R` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum R2Mode {
    /// `R2 = 0`. Needed for multiplication to decrypt correctly.
    #[default]
    Zero,
    /// Uniform `R2`. Encryption and addition still work, but the floor in
    /// multiplication leaks fractional parts through `S_dec`.
    Uniform,
}

/// Secret key: ideal generator, evaluation points and the derived matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    params: Params,
    g: Polynomial,
    basis_h: Vec<Polynomial>,
    points: Vec<Vec<i64>>,
    s: MatrixZq,
    r1: MatrixZq,
    r2: MatrixZq,
    r: MatrixZq,
    r_inv: MatrixZq,
    s_enc: MatrixZq,
    s_dec: MatrixZq,
    gaussian: DiscreteGaussian,
}

/// `g * m` for every monomial `m` of degree at most `deg`.
pub fn ideal_basis(g: &Polynomial, deg: u32) -> Vec<Polynomial> {
    enumerate_monomials(g.nvars(), deg)
        .iter()
        .map(|m| g.mul_term(m, 1))
        .collect()
}

/// Evaluation matrix: row `k` holds `polys[k]` evaluated at each point.
pub fn eval_matrix(polys: &[Polynomial], points: &[Vec<i64>], q: Modulus) -> Result<MatrixZq> {
    let mut m = MatrixZq::zeros(polys.len(), points.len(), q);
    for (k, f) in polys.iter().enumerate() {
        for (j, z) in points.iter().enumerate() {
            m.set(k, j, f.eval(z)?);
        }
    }
    Ok(m)
}

fn random_point<R: Rng + ?Sized>(v: usize, q: Modulus, rng: &mut R) -> Vec<i64> {
    (0..v).map(|_| q.sample(rng)).collect()
}

/// Random monic `g` of degree `r_g` with a nonzero constant term.
fn sample_generator<R: Rng + ?Sized>(p: &Params, rng: &mut R) -> Polynomial {
    let q = p.q;
    let top = monomials_of_degree(p.v, p.r_g).pop().expect("at least one monomial");
    loop {
        let mut g = Polynomial::random(p.v, p.r_g, q, rng);
        let c = g.coeff(&top);
        g = g.add(&Polynomial::monomial(top.clone(), 1 - c, q)).expect("same ring");
        if g.coeff(&Monomial::one(p.v)) != 0 {
            return g;
        }
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Result<SecretKey> {
    keygen_with(params, R2Mode::Zero, rng)
}

pub fn keygen_with<R: Rng + ?Sized>(params: &Params, r2_mode: R2Mode, rng: &mut R) -> Result<SecretKey> {
    params.validate()?;
    keygen_unchecked(params, r2_mode, rng)
}

/// Key generation without the noise checks of [`Params::validate`]; lets tests
/// run the exact algebra at moduli too small to decrypt reliably.
pub(crate) fn keygen_unchecked<R: Rng + ?Sized>(params: &Params, r2_mode: R2Mode, rng: &mut R) -> Result<SecretKey> {
    let p = params;
    let q = p.q;
    let g = sample_generator(p, rng);
    let basis = ideal_basis(&g, p.r_prime);
    let all_monos: Vec<Polynomial> = enumerate_monomials(p.v, p.r)
        .into_iter()
        .map(|m| Polynomial::monomial(m, 1, q))
        .collect();
    let nonzero_g = |pts: &[Vec<i64>]| -> Result<bool> {
        for z in pts {
            if g.eval(z)? == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let enc_points = (0..RETRY_CAP)
        .find_map(|_| {
            let pts: Vec<Vec<i64>> = (0..p.ell).map(|_| random_point(p.v, q, rng)).collect();
            let ok = (|| -> Result<bool> {
                if !nonzero_g(&pts)? {
                    return Ok(false);
                }
                // Every vector in Z_q^ell is an evaluation of some degree <= r polynomial.
                if eval_matrix(&all_monos, &pts, q)?.rank() != p.ell {
                    return Ok(false);
                }
                // Every vector in Z_q^n is an evaluation of I_{<=r} at the first n points.
                let e1 = eval_matrix(&basis, &pts[..p.n], q)?;
                Ok(e1.rank() == p.n)
            })();
            match ok {
                Ok(true) => Some(Ok(pts)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .ok_or(Error::GenerationFailure {
            what: "encryption point selection",
            attempts: RETRY_CAP,
        })??;

    let ext_basis = ideal_basis(&g, 2 * p.r - p.r_g);
    let extra = (0..RETRY_CAP)
        .find_map(|_| {
            let pts: Vec<Vec<i64>> = (p.ell..p.t).map(|_| random_point(p.v, q, rng)).collect();
            let ok = (|| -> Result<bool> {
                if !nonzero_g(&pts)? {
                    return Ok(false);
                }
                let mut sel: Vec<Vec<i64>> = enc_points[..p.n].to_vec();
                sel.extend(pts.iter().cloned());
                Ok(eval_matrix(&ext_basis, &sel, q)?.rank() == p.n1)
            })();
            match ok {
                Ok(true) => Some(Ok(pts)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .ok_or(Error::GenerationFailure {
            what: "multiplication point selection",
            attempts: RETRY_CAP,
        })??;

    let mut points = enc_points;
    points.extend(extra);

    let e = eval_matrix(&basis, &points[..p.ell], q)?;
    let first: Vec<usize> = (0..p.n).collect();
    let rest: Vec<usize> = (p.n..p.ell).collect();
    let x = e.select_cols(&first).solve(&e.select_cols(&rest))?;
    let s = MatrixZq::from_fn(p.slots(), p.n, q, |j, i| -x.get(i, j));

    let r1 = (0..RETRY_CAP)
        .map(|_| MatrixZq::random(p.n, p.n, q, rng))
        .find(|m| m.rank() == p.n)
        .ok_or(Error::GenerationFailure {
            what: "invertible R1",
            attempts: RETRY_CAP,
        })?;
    let r2 = match r2_mode {
        R2Mode::Zero => MatrixZq::zeros(p.slots(), p.n, q),
        R2Mode::Uniform => MatrixZq::random(p.slots(), p.n, q, rng),
    };
    SecretKey::from_parts(params.clone(), g, points, s, r1, r2)
}

impl SecretKey {
    /// Assembles a key from its sampled parts and recomputes every derived matrix.
    pub fn from_parts(
        params: Params,
        g: Polynomial,
        points: Vec<Vec<i64>>,
        s: MatrixZq,
        r1: MatrixZq,
        r2: MatrixZq,
    ) -> Result<SecretKey> {
        let p = &params;
        let q = p.q;
        let dims = [
            ("points", points.len(), p.t),
            ("S rows", s.rows(), p.slots()),
            ("S cols", s.cols(), p.n),
            ("R1 rows", r1.rows(), p.n),
            ("R1 cols", r1.cols(), p.n),
            ("R2 rows", r2.rows(), p.slots()),
            ("R2 cols", r2.cols(), p.n),
        ];
        for (context, found, expected) in dims {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                });
            }
        }
        if points.iter().any(|z| z.len() != p.v) {
            return Err(Error::InvalidParams("point arity differs from v".into()));
        }
        if g.modulus() != q || g.degree() != Some(p.r_g) {
            return Err(Error::InvalidParams("generator has the wrong degree or modulus".into()));
        }
        for z in &points {
            if g.eval(z)? == 0 {
                return Err(Error::InvalidParams("generator vanishes at an evaluation point".into()));
            }
        }
        let n = p.n;
        let r = MatrixZq::from_fn(p.ell, p.ell, q, |i, j| match (i < n, j < n) {
            (true, true) => r1.get(i, j),
            (true, false) => 0,
            (false, true) => r2.get(i - n, j),
            (false, false) => (i == j) as i64,
        });
        let r_inv = r.inverse()?;
        let s_enc = MatrixZq::from_fn(
            n,
            p.ell,
            q,
            |i, j| {
                if j < n {
                    (i == j) as i64
                } else {
                    -s.get(j - n, i)
                }
            },
        );
        let s_i_t = MatrixZq::from_fn(p.ell, p.slots(), q, |i, j| {
            if i < n {
                s.get(j, i)
            } else {
                (i - n == j) as i64
            }
        });
        let s_dec = r_inv.mul(&s_i_t)?;
        let gaussian = if p.is_zero_noise() {
            DiscreteGaussian::zero()
        } else {
            DiscreteGaussian::new(p.sigma.clone(), p.bound)?
        };
        let basis_h = enumerate_monomials(p.v, p.r_prime)
            .into_iter()
            .map(|m| Polynomial::monomial(m, 1, q))
            .collect();
        Ok(SecretKey {
            params,
            g,
            basis_h,
            points,
            s,
            r1,
            r2,
            r,
            r_inv,
            s_enc,
            s_dec,
            gaussian,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn generator(&self) -> &Polynomial {
        &self.g
    }

    /// `h_1..h_n`: the monomials of degree at most `r'`.
    pub fn basis_h(&self) -> &[Polynomial] {
        &self.basis_h
    }

    /// Basis `g * h_k` of `I_{<=r}`.
    pub fn ideal_basis(&self) -> Vec<Polynomial> {
        self.basis_h.iter().map(|h| self.g.mul(h).expect("same ring")).collect()
    }

    /// All `t` points; the first `ell` are used for encryption.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn s(&self) -> &MatrixZq {
        &self.s
    }

    pub fn r1(&self) -> &MatrixZq {
        &self.r1
    }

    pub fn r2(&self) -> &MatrixZq {
        &self.r2
    }

    pub fn r(&self) -> &MatrixZq {
        &self.r
    }

    pub fn r_inv(&self) -> &MatrixZq {
        &self.r_inv
    }

    /// `[I_n | -S^T]`.
    pub fn s_enc(&self) -> &MatrixZq {
        &self.s_enc
    }

    /// `R^{-1} [S | I]^T`.
    pub fn s_dec(&self) -> &MatrixZq {
        &self.s_dec
    }

    pub fn gaussian(&self) -> &DiscreteGaussian {
        &self.gaussian
    }

    /// Evaluations of `f` at the first `ell` points.
    pub fn evaluate(&self, f: &Polynomial) -> Result<Vec<i64>> {
        self.points[..self.params.ell].iter().map(|z| f.eval(z)).collect()
    }

    /// The ordered reduction set `g_i = g * m_i`, `deg m_i = r' + 1`, sorted
    /// ascending by leading monomial `mu_i`.
    pub fn reduction_set(&self) -> Vec<Polynomial> {
        build_g(&self.g, self.params.r_prime)
    }
}

/// `{g * m : deg m = r' + 1}` ordered by leading monomial in degrevlex.
///
/// `g` is monic, so each leading term is exactly `LM(g) * m` with coefficient 1.
pub fn build_g(g: &Polynomial, r_prime: u32) -> Vec<Polynomial> {
    let mut set: Vec<Polynomial> = monomials_of_degree(g.nvars(), r_prime + 1)
        .iter()
        .map(|m| g.mul_term(m, 1))
        .collect();
    set.sort_by_key(|p| p.leading_term().expect("nonzero").0);
    set
}
