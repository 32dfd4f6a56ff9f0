use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::arith::{rational_mod, Modulus, Rational};
use crate::error::{Error, Result};
use crate::linalg::{MatrixQ, MatrixZq, ReducedTensor, Tensor3Q, Wide};
use crate::mvpoly::Polynomial;

use super::gadget::{gadget_width, powersoftwo_numerators};
use super::keygen::{eval_matrix, ideal_basis, SecretKey};
use super::Params;

/// Shape of the evaluation key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Bit-decomposed key; inputs pass through `PowersOfTwo`.
    Gadget,
    /// `ell x ell x ell` key applied to raw ciphertexts. Reference only: its
    /// `K` terms grow with `q`.
    Plain,
}

impl Variant {
    pub fn of(params: &Params) -> Variant {
        if params.gadget {
            Variant::Gadget
        } else {
            Variant::Plain
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gadget => "gadget",
            Variant::Plain => "plain",
        }
    }
}

/// How the perturbations `eps_1, eps_2` are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EpsMode {
    #[default]
    Random,
    /// `eps = 0`, for exact pipeline checks.
    Zero,
}

/// Evaluation key for multiplication.
///
/// Holds the tensor `M` in reduced form: numerators over a fixed denominator,
/// modulo `q * d * 4^f`. That is all `floor(M(a, b)) mod q` depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalKey {
    params: Params,
    variant: Variant,
    tensor: ReducedTensor,
}

/// Every intermediate of [`build_evalkey_traced`], indexed from zero.
#[derive(Clone, Debug)]
pub struct EvalKeyTrace {
    pub eps: [MatrixQ; 2],
    pub d: [MatrixQ; 2],
    /// `ell x t` extension of evaluations from the first `n` points.
    pub a: MatrixZq,
    /// Slot weights `w_k`: `2/q` on the message slots, `1` elsewhere.
    pub weights: Vec<Rational>,
    /// `t x t`.
    pub b: MatrixZq,
    pub g: Vec<Polynomial>,
    /// `n1 x t`.
    pub f1: MatrixZq,
    /// `n1 x ell`.
    pub f2: MatrixZq,
    /// `t x ell`.
    pub q_mat: MatrixZq,
    /// `(B Q R)^T`, `ell x t`.
    pub p3: MatrixZq,
    /// `T x3 P3`, dims `ell x ell x ell`.
    pub w: Tensor3Q,
}

/// `(dims, denominator, fractional bits)` of the reduced key.
fn layout(params: &Params, variant: Variant) -> ([usize; 3], BigUint, u32) {
    let ell = params.ell;
    let q = BigUint::from(params.q.value());
    match variant {
        Variant::Gadget => {
            let len = params.gadget_len();
            ([len, len, ell], q, params.u)
        }
        Variant::Plain => ([ell, ell, ell], q << (2 * params.u), 0),
    }
}

impl EvalKey {
    /// Wraps a stored tensor after checking it fits `params` and `variant`.
    pub fn from_parts(params: Params, variant: Variant, tensor: ReducedTensor) -> Result<Self> {
        let (dims, denom, frac) = layout(&params, variant);
        if tensor.dims() != dims
            || tensor.modulus() != params.q
            || *tensor.denom() != denom
            || tensor.frac_bits() != frac
        {
            return Err(Error::InvalidParams(format!(
                "evaluation key tensor does not match the {} layout",
                variant.name()
            )));
        }
        Ok(EvalKey {
            params,
            variant,
            tensor,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn tensor(&self) -> &ReducedTensor {
        &self.tensor
    }

    /// Input numerators for the tensor: `PowersOfTwo(c)` over `2^u`, or `c`.
    pub fn encode(&self, c: &[i64]) -> Vec<i128> {
        match self.variant {
            Variant::Gadget => powersoftwo_numerators(c, self.params.q, self.params.u),
            Variant::Plain => c.iter().map(|&x| x as i128).collect(),
        }
    }

    /// `floor(M(enc(c1), enc(c2))) mod q`, a ciphertext vector of length `ell`.
    pub fn apply(&self, c1: &[i64], c2: &[i64], parallel: bool) -> Result<Vec<i64>> {
        for c in [c1, c2] {
            if c.len() != self.params.ell {
                return Err(Error::DimensionMismatch {
                    context: "ciphertext length",
                    expected: self.params.ell,
                    found: c.len(),
                });
            }
        }
        self.tensor.eval(&self.encode(c1), &self.encode(c2), parallel)
    }
}

pub fn build_evalkey<R: Rng + ?Sized>(sk: &SecretKey, rng: &mut R) -> Result<EvalKey> {
    build_evalkey_with(sk, Variant::of(sk.params()), EpsMode::Random, rng)
}

pub fn build_evalkey_with<R: Rng + ?Sized>(
    sk: &SecretKey,
    variant: Variant,
    eps_mode: EpsMode,
    rng: &mut R,
) -> Result<EvalKey> {
    build_evalkey_traced(sk, variant, eps_mode, rng).map(|(k, _)| k)
}

/// Largest `|k|` with `|k| / 2^u < B / (q n)`.
pub fn eps_limit(params: &Params) -> u64 {
    let num = BigUint::from(params.bound) << params.u;
    let den = BigUint::from(params.q.value()) * BigUint::from(params.n);
    let ceil = num.div_ceil(&den);
    (ceil.to_u64().unwrap_or(u64::MAX)).saturating_sub(1)
}

fn sample_eps<R: Rng + ?Sized>(params: &Params, mode: EpsMode, rng: &mut R) -> MatrixQ {
    let lim = eps_limit(params) as i64;
    let den = BigInt::one() << params.u;
    MatrixQ::from_fn(params.n, params.slots(), |_, _| {
        let k = match mode {
            EpsMode::Zero => 0,
            EpsMode::Random => rng.random_range(-lim..=lim),
        };
        Rational::new(k.into(), den.clone())
    })
}

/// Diagonal `t x t x t` tensor `U` with `U[k][k][k] = w_k`.
pub fn weight_tensor(n: usize, ell: usize, t: usize, q: Modulus) -> Tensor3Q {
    let w = slot_weights(n, ell, t, q);
    Tensor3Q::from_fn([t, t, t], |i, j, k| {
        if i == j && j == k {
            w[k].clone()
        } else {
            Rational::zero()
        }
    })
}

fn slot_weights(n: usize, ell: usize, t: usize, q: Modulus) -> Vec<Rational> {
    let two_over_q = Rational::new(BigInt::from(2), q.as_bigint());
    (0..t)
        .map(|k| {
            if (n..ell).contains(&k) {
                two_over_q.clone()
            } else {
                Rational::one()
            }
        })
        .collect()
}

pub fn build_evalkey_traced<R: Rng + ?Sized>(
    sk: &SecretKey,
    variant: Variant,
    eps_mode: EpsMode,
    rng: &mut R,
) -> Result<(EvalKey, EvalKeyTrace)> {
    let p = sk.params();
    let q = p.q;
    let (n, ell, t) = (p.n, p.ell, p.t);
    let points = sk.points();

    let eps = [sample_eps(p, eps_mode, rng), sample_eps(p, eps_mode, rng)];
    let lift = MatrixZq::from_fn(ell, ell, q, |i, j| match (i < n, j < n) {
        (true, true) => (i == j) as i64,
        (true, false) => sk.s().get(j - n, i),
        (false, true) => 0,
        (false, false) => (i == j) as i64,
    });
    let base = sk.r_inv().mul(&lift)?.to_rational();
    let d = eps.clone().map(|e| {
        let mut m = base.clone();
        for i in 0..n {
            for j in 0..p.slots() {
                let x = m.get(i, n + j) + e.get(i, j);
                m.set(i, n + j, x);
            }
        }
        m
    });

    let basis = sk.ideal_basis();
    let e1 = eval_matrix(&basis, &points[..n], q)?;
    let alpha = e1.solve(&eval_matrix(&basis, &points[ell..], q)?)?;
    let a = MatrixZq::from_fn(ell, t, q, |i, k| {
        if k < ell {
            (i == k) as i64
        } else if i < n {
            alpha.get(i, k - ell)
        } else {
            0
        }
    });
    let weights = slot_weights(n, ell, t, q);

    let ext = ideal_basis(sk.generator(), 2 * p.r - p.r_g);
    let f1 = eval_matrix(&ext, points, q)?;
    let cols_p: Vec<usize> = (0..n).chain(ell..t).collect();
    let mid: Vec<usize> = (n..ell).collect();
    let f1p = f1.select_cols(&cols_p);
    let beta = f1p.solve(&f1.select_cols(&mid))?;
    let mut b = MatrixZq::identity(t, q);
    for (ai, &row) in cols_p.iter().enumerate() {
        for j in 0..p.slots() {
            b.set(row, n + j, beta.get(ai, j));
        }
    }

    let g = sk.reduction_set();
    let reduced: Vec<Polynomial> = ext.iter().map(|f| f.reduce_by_set(&g, p.r)).collect::<Result<_>>()?;
    let f2 = eval_matrix(&reduced, &points[..ell], q)?;
    let rhs = MatrixZq::from_fn(p.n1, ell, q, |k, j| {
        let sub = if j >= n { f1.get(k, j) } else { 0 };
        q.sub(f2.get(k, j), sub)
    });
    let x = f1p.solve(&rhs)?;
    let mut q_mat = MatrixZq::zeros(t, ell, q);
    for (ai, &row) in cols_p.iter().enumerate() {
        for j in 0..ell {
            q_mat.set(row, j, x.get(ai, j));
        }
    }
    for j in n..ell {
        q_mat.set(j, j, 1);
    }
    if f1.mul(&q_mat)? != f2 {
        return Err(Error::InvalidParams("evaluation key check F1 Q = F2 failed".into()));
    }

    let p3 = b.mul(&q_mat)?.mul(sk.r())?.transpose();
    let qw = scaled_w(&a, &weights, &p3, q);
    let w = Tensor3Q::from_fn([ell, ell, ell], |i, j, k| {
        Rational::new(qw[(k * ell + i) * ell + j].clone(), q.as_bigint())
    });

    let (dims, denom, frac) = layout(p, variant);
    let tensor = match variant {
        Variant::Plain => {
            let m = w.n_mode_product(&d[0], 1)?.n_mode_product(&d[1], 2)?;
            ReducedTensor::from_exact(&m, q, denom, frac)?
        }
        Variant::Gadget => {
            let mut out = ReducedTensor::zeros(dims, q, denom, frac)?;
            gadget_numerators(&mut out, p, &qw, &d)?;
            out
        }
    };
    let key = EvalKey {
        params: p.clone(),
        variant,
        tensor,
    };
    let trace = EvalKeyTrace {
        eps,
        d,
        a,
        weights,
        b,
        g,
        f1,
        f2,
        q_mat,
        p3,
        w,
    };
    Ok((key, trace))
}

/// `q W[a][b][k'] = sum_k A[a][k] A[b][k] (q w_k) P3[k'][k]`, exact and
/// slice-major.
fn scaled_w(a: &MatrixZq, weights: &[Rational], p3: &MatrixZq, q: Modulus) -> Vec<BigInt> {
    let (ell, t) = (a.rows(), a.cols());
    let qb = q.as_bigint();
    let qw: Vec<BigInt> = weights.iter().map(|w| (w * &qb).to_integer()).collect();
    let mut out = vec![BigInt::zero(); ell * ell * ell];
    for kp in 0..ell {
        // c_k = (q w_k) P3[k'][k]
        let c: Vec<BigInt> = (0..t).map(|k| &qw[k] * p3.get(kp, k)).collect();
        for i in 0..ell {
            for j in 0..ell {
                let mut s = BigInt::zero();
                for k in 0..t {
                    let (x, y) = (a.get(i, k), a.get(j, k));
                    if x != 0 && y != 0 {
                        s += &c[k] * (x as i128 * y as i128);
                    }
                }
                out[(kp * ell + i) * ell + j] = s;
            }
        }
    }
    out
}

/// Chunk width of the subset-sum tables.
const CHUNK: usize = 8;

/// `(D mod q) * 2^u` entrywise, row-major.
fn scaled_residues(d: &MatrixQ, q: Modulus, u: u32) -> Result<Vec<u128>> {
    let qb = q.as_bigint();
    let mut out = Vec::with_capacity(d.rows() * d.cols());
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let x = rational_mod(d.get(i, j), &qb) * (BigInt::one() << u);
            if !x.is_integer() {
                return Err(Error::NotDyadic(d.get(i, j).to_string()));
            }
            out.push(x.to_integer().to_u128().expect("below q 2^u"));
        }
    }
    Ok(out)
}

/// Masks of the gadget matrix `D~`: entry `[row_b][chunk]` packs bits
/// `D~[row_b][chunk * CHUNK ..]`, where `D~[p * ell + i][j]` is bit `p` of
/// `X[i][j]`.
fn gadget_masks(x: &[u128], ell: usize, width: usize) -> Vec<Vec<usize>> {
    let chunks = ell.div_ceil(CHUNK);
    (0..width * ell)
        .map(|row| {
            let (plane, i) = (row / ell, row % ell);
            (0..chunks)
                .map(|c| {
                    (c * CHUNK..ell.min((c + 1) * CHUNK))
                        .enumerate()
                        .map(|(bit, j)| (((x[i * ell + j] >> plane) & 1) as usize) << bit)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// All subset sums of `vals` (at most `CHUNK` of them) modulo `m`.
fn subset_table(vals: &[Wide], m: Wide) -> Vec<Wide> {
    let mut tab = vec![Wide::default(); 1 << vals.len()];
    for mask in 1..tab.len() {
        let low = mask.trailing_zeros() as usize;
        tab[mask] = tab[mask & (mask - 1)].add_mod(vals[low], m);
    }
    tab
}

/// Fills `out` with `D~1 (q W_k mod Lambda) D~2^T mod Lambda` for every slice.
fn gadget_numerators(out: &mut ReducedTensor, p: &Params, qw: &[BigInt], d: &[MatrixQ; 2]) -> Result<()> {
    let ell = p.ell;
    let width = gadget_width(p.q, p.u);
    let len = ell * width;
    let lambda = BigInt::from(out.lambda().clone());
    let m = out.lambda_wide();
    let masks1 = gadget_masks(&scaled_residues(&d[0], p.q, p.u)?, ell, width);
    let masks2 = gadget_masks(&scaled_residues(&d[1], p.q, p.u)?, ell, width);
    let chunks = ell.div_ceil(CHUNK);
    let chunk_range = |c: usize| c * CHUNK..ell.min((c + 1) * CHUNK);

    let mut slice = vec![Wide::default(); len * len];
    for kp in 0..ell {
        let wk: Vec<Wide> = qw[kp * ell * ell..(kp + 1) * ell * ell]
            .iter()
            .map(|x| Wide::from_biguint(&x.mod_floor(&lambda).to_biguint().expect("nonnegative")))
            .collect();
        // y[b][i] = sum_j wk[i][j] D~2[b][j]
        let mut y = vec![Wide::default(); len * ell];
        for i in 0..ell {
            let tables: Vec<Vec<Wide>> = (0..chunks)
                .map(|c| subset_table(&wk[i * ell..][chunk_range(c)], m))
                .collect();
            for (bi, mk) in masks2.iter().enumerate() {
                y[bi * ell + i] = (0..chunks).fold(Wide::default(), |acc, c| acc.add_mod(tables[c][mk[c]], m));
            }
        }
        // N[a][b] = sum_i D~1[a][i] y[b][i]
        for bi in 0..len {
            let tables: Vec<Vec<Wide>> = (0..chunks)
                .map(|c| subset_table(&y[bi * ell..][chunk_range(c)], m))
                .collect();
            for (ai, mk) in masks1.iter().enumerate() {
                slice[ai * len + bi] = (0..chunks).fold(Wide::default(), |acc, c| acc.add_mod(tables[c][mk[c]], m));
            }
        }
        out.set_slice(kp, &slice);
    }
    Ok(())
}

impl EvalKeyTrace {
    /// Gadget matrix `D~_i` (`ell L x ell`, entries 0 or 1).
    pub fn gadget_matrix(&self, i: usize, params: &Params) -> Result<MatrixQ> {
        let ell = params.ell;
        let width = gadget_width(params.q, params.u);
        let x = scaled_residues(&self.d[i], params.q, params.u)?;
        Ok(MatrixQ::from_fn(ell * width, ell, |row, j| {
            let (plane, r) = (row / ell, row % ell);
            Rational::from_integer(BigInt::from((x[r * ell + j] >> plane) & 1))
        }))
    }

    /// `T = U x1 A x2 A` with `U` from [`weight_tensor`], dims `ell x ell x t`.
    pub fn t_tensor(&self, params: &Params) -> Result<Tensor3Q> {
        let a = self.a.to_rational();
        weight_tensor(params.n, params.ell, params.t, params.q)
            .n_mode_product(&a, 1)?
            .n_mode_product(&a, 2)
    }

    /// The exact key tensor `M` composed by mode products.
    pub fn exact_tensor(&self, params: &Params, variant: Variant) -> Result<Tensor3Q> {
        let (x1, x2) = match variant {
            Variant::Plain => (self.d[0].clone(), self.d[1].clone()),
            Variant::Gadget => (self.gadget_matrix(0, params)?, self.gadget_matrix(1, params)?),
        };
        self.w.n_mode_product(&x1, 1)?.n_mode_product(&x2, 2)
    }
}
