//! Small dense linear algebra used by the interpolators.
//!
//! Systems here are at most a few dozen unknowns (kriging and spline systems
//! over a handful of neighbors, 3x3 trend normal equations), so a plain
//! row-major matrix with partially pivoted Gaussian elimination suffices.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::scalar::Scalar;

/// Row-major dense square-or-rectangular matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Solves `self · x = rhs` by Gaussian elimination with partial pivoting.
    ///
    /// Returns `None` when a pivot falls below `n · ε · max|a_ij|`, i.e. the
    /// matrix is singular to working precision.
    pub fn solve(&self, rhs: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols, "solve requires a square matrix");
        assert_eq!(self.rows, rhs.len(), "rhs length mismatch");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();

        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() || !scale.is_finite() {
            return None;
        }
        let tol = T::from_count(n.max(1)) * T::epsilon() * scale;

        for k in 0..n {
            let (piv, piv_abs) =
                (k..n)
                    .map(|i| (i, a[i * n + k].abs()))
                    .fold(
                        (k, -T::one()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if piv_abs <= tol {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                b.swap(k, piv);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                if factor == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - factor * v;
                }
                let bk = b[k];
                b[i] = b[i] - factor * bk;
            }
        }

        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc = acc - a[i * n + j] * x[j];
            }
            x[i] = acc / a[i * n + i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| {
            [[2.0f64, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]][i][j]
        });
        let x = a.solve(&[8.0, -11.0, -3.0]).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = DenseMatrix::from_fn(2, 2, |i, j| [[0.0, 1.0], [1.0, 0.0]][i][j]);
        assert_eq!(a.solve(&[3.0, 4.0]).unwrap(), vec![4.0, 3.0]);
    }

    #[test]
    fn singular_is_none() {
        let a = DenseMatrix::from_fn(2, 2, |i, _| [1.0, 2.0][i] * 1.0);
        assert!(a.solve(&[1.0, 1.0]).is_none());
        assert!(DenseMatrix::<f64>::zeros(2, 2).solve(&[0.0, 0.0]).is_none());
    }
}
