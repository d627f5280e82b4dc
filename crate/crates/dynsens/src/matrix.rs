//! Dense row-major matrices for transition and observation tables.
//!
//! The models in this crate stay small (a few thousand states at most after
//! flattening), so a plain contiguous buffer is all that is needed.

use thiserror::Error;

use crate::scalar::Real;

/// Raised when a matrix is built from rows of unequal length.
#[derive(Debug, Error)]
#[error("matrix rows have unequal lengths: row {row} has {got} entries, expected {expected}")]
pub struct ShapeError {
    pub row: usize,
    pub got: usize,
    pub expected: usize,
}

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    /// Build from nested rows; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self, ShapeError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(ShapeError {
                    row: i,
                    got: row.len(),
                    expected: n_cols,
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, R::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [R] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: R) {
        self.data[i * self.cols + j] = value;
    }

    /// Push a probability row vector through the matrix: `out_j = Σ_i mu_i · self[i][j]`.
    ///
    /// For a row-stochastic transition matrix this is one prediction step of
    /// a Markov chain.
    pub fn apply_to_distribution(&self, mu: &[R]) -> Vec<R> {
        assert_eq!(mu.len(), self.rows, "distribution length must match rows");
        let mut out = vec![R::zero(); self.cols];
        for (i, &mass) in mu.iter().enumerate() {
            if mass == R::zero() {
                continue;
            }
            for (j, &a) in self.row(i).iter().enumerate() {
                out[j] = out[j] + mass * a;
            }
        }
        out
    }

    /// Kronecker product; `self` indexes the most significant digit of the
    /// joint row/column order.
    pub fn kronecker(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i0 in 0..self.rows {
            for j0 in 0..self.cols {
                let a = self.get(i0, j0);
                for i1 in 0..other.rows {
                    for j1 in 0..other.cols {
                        out.set(
                            i0 * other.rows + i1,
                            j0 * other.cols + j1,
                            a * other.get(i1, j1),
                        );
                    }
                }
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == R::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[R]> {
        (0..self.rows).map(move |i| self.row(i))
    }
}
