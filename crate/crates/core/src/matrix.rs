//! Dense matrices over a prime field.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::Rng;

use crate::field::{FieldElem, PrimeField};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<u64>> = self.to_rows();
        write!(f, "{rows:?}")
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        Self::scalar(field, n, field.one())
    }

    /// `c * I_n`.
    pub fn scalar(field: PrimeField, n: usize, c: FieldElem) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = c;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing each entry mod `p`.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(field, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = field.elem(v);
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(field: PrimeField, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            field,
            rows,
            cols,
            data: (0..rows * cols).map(|_| field.sample(rng)).collect(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
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

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElem::is_zero)
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(FieldElem::value).collect())
            .collect()
    }

    /// First nonzero entry in row-major order.
    pub fn first_nonzero(&self) -> Option<(usize, usize, FieldElem)> {
        self.data
            .iter()
            .position(|e| !e.is_zero())
            .map(|k| (k / self.cols, k % self.cols, self.data[k]))
    }

    /// Matrix product; `None` on a shape mismatch.
    pub fn mul(&self, rhs: &Matrix) -> Option<Matrix> {
        if self.cols != rhs.rows || self.field != rhs.field {
            return None;
        }
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Some(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Option<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols || self.field != rhs.field {
            return None;
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect();
        Some(Matrix { data, ..*self })
    }

    pub fn scale(&self, c: FieldElem) -> Matrix {
        Matrix {
            data: self.data.iter().map(|a| *a * c).collect(),
            ..*self
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce().len()
    }

    pub fn determinant(&self) -> Option<FieldElem> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.field.one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m[(r, col)].is_zero());
            let Some(pr) = pivot else {
                return Some(self.field.zero());
            };
            if pr != col {
                m.swap_rows(pr, col);
                det = -det;
            }
            let pv = m[(col, col)];
            det *= pv;
            let inv = pv.inv().expect("nonzero pivot");
            for r in col + 1..n {
                let factor = m[(r, col)] * inv;
                if !factor.is_zero() {
                    for c in col..n {
                        let sub = factor * m[(col, c)];
                        m[(r, c)] -= sub;
                    }
                }
            }
        }
        Some(det)
    }

    /// Inverse by Gauss-Jordan; `None` if singular or not square.
    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(self.field, n);
        for col in 0..n {
            let pr = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(pr, col);
            inv.swap_rows(pr, col);
            let pv_inv = a[(col, col)].inv().ok()?;
            for c in 0..n {
                a[(col, c)] *= pv_inv;
                inv[(col, c)] *= pv_inv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let (sa, si) = (factor * a[(col, c)], factor * inv[(col, c)]);
                    a[(r, c)] -= sa;
                    inv[(r, c)] -= si;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(pr, row);
            let inv = self[(row, col)].inv().expect("nonzero pivot");
            for c in 0..self.cols {
                self[(row, c)] *= inv;
            }
            for r in 0..self.rows {
                if r != row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)];
                    for c in 0..self.cols {
                        let sub = factor * self[(row, c)];
                        self[(r, c)] -= sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = FieldElem;
    fn index(&self, (r, c): (usize, usize)) -> &FieldElem {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut FieldElem {
        &mut self.data[r * self.cols + c]
    }
}
