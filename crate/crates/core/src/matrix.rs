//! Dense matrices of exact rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {lhs_rows}x{lhs_cols} against {rhs_rows}x{rhs_cols}")]
    DimensionMismatch {
        lhs_rows: usize,
        lhs_cols: usize,
        rhs_rows: usize,
        rhs_cols: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular (no pivot in column {column})")]
    Singular { column: usize },
    #[error("ragged rows: expected {expected} columns, row {row} has {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Row-major rectangular grid of [`Rational`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::Ragged {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(RationalMatrix {
            rows: n,
            cols,
            data,
        })
    }

    /// Parses rows of `p/q` strings; convenient for fixtures.
    pub fn from_strs(rows: &[&[&str]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| s.parse().expect("fraction literal")).collect())
            .collect();
        Self::from_rows(rows).expect("rectangular literal")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
        if self.cols != rhs.rows {
            return Err(self.mismatch(rhs));
        }
        let mut out = RationalMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = &out[(i, j)] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(self.mismatch(rhs));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Exact inverse by Gauss-Jordan elimination on `[A | I]`.
    ///
    /// The pivot in each column is the entry of largest magnitude among the
    /// remaining rows.
    pub fn inverse(&self) -> Result<RationalMatrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = RationalMatrix::identity(n).to_rows();

        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .max_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()).then(y.cmp(&x)))
                .ok_or(MatrixError::Singular { column: col })?;
            a.swap(col, pivot);
            inv.swap(col, pivot);

            let p = a[col][col].clone();
            let scale = p.recip().expect("pivot is nonzero");
            for j in 0..n {
                a[col][j] = &a[col][j] * &scale;
                inv[col][j] = &inv[col][j] * &scale;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    if !a[col][j].is_zero() {
                        a[r][j] = &a[r][j] - &(&f * &a[col][j]);
                    }
                    if !inv[col][j].is_zero() {
                        inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
                    }
                }
            }
        }
        Ok(RationalMatrix::from_rows(inv).expect("square"))
    }

    fn mismatch(&self, rhs: &RationalMatrix) -> MatrixError {
        MatrixError::DimensionMismatch {
            lhs_rows: self.rows,
            lhs_cols: self.cols,
            rhs_rows: rhs.rows,
            rhs_cols: rhs.cols,
        }
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_times_anything() {
        let m = RationalMatrix::from_strs(&[&["1/2", "3"], &["-1/3", "0"]]);
        assert_eq!(RationalMatrix::identity(2).mul(&m).unwrap(), m);
        assert_eq!(m.mul(&RationalMatrix::identity(2)).unwrap(), m);
    }

    #[test]
    fn inverse_needs_row_swap() {
        let m = RationalMatrix::from_strs(&[&["0", "1"], &["1", "0"]]);
        assert_eq!(m.inverse().unwrap(), m);
    }

    #[test]
    fn singular_and_shape_errors() {
        let m = RationalMatrix::from_strs(&[&["1", "2"], &["2", "4"]]);
        assert_eq!(m.inverse(), Err(MatrixError::Singular { column: 1 }));
        let r = RationalMatrix::zeros(2, 3);
        assert!(matches!(r.inverse(), Err(MatrixError::NotSquare { .. })));
        assert!(matches!(r.mul(&r), Err(MatrixError::DimensionMismatch { .. })));
        assert!(matches!(
            RationalMatrix::from_rows(vec![vec![Rational::one()], vec![]]),
            Err(MatrixError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn inverse_of_3x3() {
        let m = RationalMatrix::from_strs(&[&["2", "1", "0"], &["1", "3", "1"], &["0", "1", "4"]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RationalMatrix::identity(3));
        assert_eq!(inv.mul(&m).unwrap(), RationalMatrix::identity(3));
    }
}
