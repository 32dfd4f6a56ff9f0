use std::fmt;

use rand::Rng;

use crate::arith::{Modulus, Rational};
use crate::error::{Error, Result};

use super::MatrixQ;

/// Dense row-major matrix over `Z_q` with balanced entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MatrixZq {
    rows: usize,
    cols: usize,
    modulus: Modulus,
    data: Vec<i64>,
}

impl MatrixZq {
    pub fn zeros(rows: usize, cols: usize, modulus: Modulus) -> Self {
        MatrixZq {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Self {
        Self::from_fn(n, n, modulus, |i, j| (i == j) as i64)
    }

    /// Entries are reduced into balanced form.
    pub fn from_fn(rows: usize, cols: usize, modulus: Modulus, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(modulus.reduce(f(i, j) as i128));
            }
        }
        MatrixZq {
            rows,
            cols,
            modulus,
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<i64>], modulus: Modulus) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                context: "matrix rows",
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(rows.len(), cols, modulus, |i, j| rows[i][j]))
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, modulus: Modulus, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, modulus, |_, _| modulus.sample(rng))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: i64) {
        self.data[i * self.cols + j] = self.modulus.reduce(x as i128);
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn transpose(&self) -> MatrixZq {
        Self::from_fn(self.cols, self.rows, self.modulus, |i, j| self.get(j, i))
    }

    /// The sub-matrix made of the listed columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> MatrixZq {
        Self::from_fn(self.rows, cols.len(), self.modulus, |i, j| self.get(i, cols[j]))
    }

    fn check_mod(&self, other: &MatrixZq) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.value(),
                right: other.modulus.value(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &MatrixZq) -> Result<MatrixZq> {
        self.check_mod(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let q = self.modulus;
        let mut out = MatrixZq::zeros(self.rows, other.cols, q);
        let mut acc = vec![0i128; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for (j, slot) in acc.iter_mut().enumerate() {
                    *slot += q.mul(a, other.get(k, j)) as i128;
                }
            }
            for (j, a) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = q.reduce(*a);
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[i64]) -> Result<Vec<i64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "vector-matrix product",
                expected: self.rows,
                found: v.len(),
            });
        }
        let q = self.modulus;
        let mut acc = vec![0i128; self.cols];
        for (i, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, slot) in acc.iter_mut().enumerate() {
                *slot += q.mul(x, self.get(i, j)) as i128;
            }
        }
        Ok(acc.into_iter().map(|a| q.reduce(a)).collect())
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref(&mut self, limit_cols: usize) -> Vec<usize> {
        let q = self.modulus;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = q.inv(self.get(r, c)).expect("nonzero pivot");
            for j in 0..self.cols {
                let x = q.mul(self.get(r, j), inv);
                self.data[r * self.cols + j] = x;
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i == r || f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let x = q.sub(self.get(i, j), q.mul(f, self.get(r, j)));
                    self.data[i * self.cols + j] = x;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref(cols).len()
    }

    pub fn inverse(&self) -> Result<MatrixZq> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                context: "inverse of non-square matrix",
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = Self::from_fn(n, 2 * n, self.modulus, |i, j| {
            if j < n {
                self.get(i, j)
            } else {
                (j - n == i) as i64
            }
        });
        let pivots = aug.rref(n);
        if pivots.len() < n {
            let column = (0..n).find(|c| !pivots.contains(c)).unwrap_or(n);
            return Err(Error::Singular { column });
        }
        Ok(Self::from_fn(n, n, self.modulus, |i, j| aug.get(i, n + j)))
    }

    /// Some `X` with `self * X = y`; free variables are set to zero.
    pub fn solve(&self, y: &MatrixZq) -> Result<MatrixZq> {
        self.check_mod(y)?;
        if y.rows != self.rows {
            return Err(Error::DimensionMismatch {
                context: "right-hand side rows",
                expected: self.rows,
                found: y.rows,
            });
        }
        let (m, n, k) = (self.rows, self.cols, y.cols);
        let mut aug = Self::from_fn(m, n + k, self.modulus, |i, j| {
            if j < n {
                self.get(i, j)
            } else {
                y.get(i, j - n)
            }
        });
        let pivots = aug.rref(n);
        for i in pivots.len()..m {
            if (0..k).any(|j| aug.get(i, n + j) != 0) {
                return Err(Error::Inconsistent);
            }
        }
        let mut x = MatrixZq::zeros(n, k, self.modulus);
        for (r, &c) in pivots.iter().enumerate() {
            for j in 0..k {
                x.data[c * k + j] = aug.get(r, n + j);
            }
        }
        Ok(x)
    }

    /// Balanced representatives as exact rationals.
    pub fn to_rational(&self) -> MatrixQ {
        MatrixQ::from_fn(self.rows, self.cols, |i, j| {
            Rational::from_integer(self.get(i, j).into())
        })
    }
}

impl fmt::Debug for MatrixZq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixZq {}x{} mod {}", self.rows, self.cols, self.modulus)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for MatrixZq {
    /// One bracketed row per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(i64::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}
