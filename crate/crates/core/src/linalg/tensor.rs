use num_traits::Zero;

use crate::arith::Rational;
use crate::error::{Error, Result};

/// Dense row-major matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixQ {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl MatrixQ {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixQ {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| Rational::from_integer(((i == j) as i64).into()))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        MatrixQ { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn transpose(&self) -> MatrixQ {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &MatrixQ) -> Result<MatrixQ> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "rational matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = MatrixQ::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "vector-matrix product",
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let m = self.get(i, j);
                if !m.is_zero() {
                    *o += x * m;
                }
            }
        }
        Ok(out)
    }
}

/// Order-3 tensor of exact rationals with dims `(I1, I2, I3)`.
///
/// Storage is slice-major: frontal slice `T_k` (fixed third index) is a
/// contiguous row-major `I1 x I2` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor3Q {
    dims: [usize; 3],
    data: Vec<Rational>,
}

impl Tensor3Q {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Tensor3Q {
            dims,
            data: vec![Rational::zero(); dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> Rational) -> Self {
        let mut t = Self::zeros(dims);
        for k in 0..dims[2] {
            for i in 0..dims[0] {
                for j in 0..dims[1] {
                    let idx = t.index(i, j, k);
                    t.data[idx] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[0] + i) * self.dims[1] + j
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.data[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, x: Rational) {
        let idx = self.index(i, j, k);
        self.data[idx] = x;
    }

    /// Frontal slice `T_k`.
    pub fn slice(&self, k: usize) -> MatrixQ {
        MatrixQ::from_fn(self.dims[0], self.dims[1], |i, j| self.get(i, j, k).clone())
    }

    /// `(T x_mode X)`, replacing `dims[mode]` by `X.rows`; each new entry is
    /// `sum_i T[.., i, ..] * X[i', i]` along the chosen mode (1-based).
    pub fn n_mode_product(&self, x: &MatrixQ, mode: usize) -> Result<Tensor3Q> {
        if !(1..=3).contains(&mode) {
            return Err(Error::InvalidParams(format!("tensor mode {mode} is not 1, 2 or 3")));
        }
        let m = mode - 1;
        if x.cols() != self.dims[m] {
            return Err(Error::DimensionMismatch {
                context: "n-mode product",
                expected: self.dims[m],
                found: x.cols(),
            });
        }
        let mut dims = self.dims;
        dims[m] = x.rows();
        let mut out = Tensor3Q::zeros(dims);
        let [d0, d1, d2] = self.dims;
        for k in 0..d2 {
            for i in 0..d0 {
                for j in 0..d1 {
                    let t = self.get(i, j, k);
                    if t.is_zero() {
                        continue;
                    }
                    for r in 0..x.rows() {
                        let (src, dst) = match m {
                            0 => (i, [r, j, k]),
                            1 => (j, [i, r, k]),
                            _ => (k, [i, j, r]),
                        };
                        let c = x.get(r, src);
                        if !c.is_zero() {
                            let idx = out.index(dst[0], dst[1], dst[2]);
                            out.data[idx] += t * c;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `out[k] = v1 * T_k * v2^T`.
    pub fn bilinear_eval(&self, v1: &[Rational], v2: &[Rational]) -> Result<Vec<Rational>> {
        for (len, dim, context) in [
            (v1.len(), self.dims[0], "bilinear left vector"),
            (v2.len(), self.dims[1], "bilinear right vector"),
        ] {
            if len != dim {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: dim,
                    found: len,
                });
            }
        }
        let mut out = vec![Rational::zero(); self.dims[2]];
        for (k, o) in out.iter_mut().enumerate() {
            for (i, a) in v1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut row = Rational::zero();
                for (j, b) in v2.iter().enumerate() {
                    let t = self.get(i, j, k);
                    if !t.is_zero() && !b.is_zero() {
                        row += t * b;
                    }
                }
                *o += a * row;
            }
        }
        Ok(out)
    }

    /// Entries in storage order.
    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.data.iter()
    }
}
