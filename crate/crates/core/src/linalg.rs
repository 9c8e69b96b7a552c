//! Dense LU factorization with partial pivoting.
//!
//! Kept separate from nalgebra's LU so that the pivot threshold is explicit and
//! a transposed solve is available from the same factors.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold: a pivot with `|p| <= PIVOT_REL_TOL * ‖A‖_F` means
/// the matrix is numerically singular.
pub const PIVOT_REL_TOL: f64 = 1e-13;

/// `PA = LU` with unit lower-triangular `L`, stored row-major in one buffer.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix, failing when a pivot falls below
    /// `PIVOT_REL_TOL * ‖A‖_F`.
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                what: "LU needs a square matrix",
                expected: n,
                found: a.ncols(),
            });
        }
        let mut lu = Vec::with_capacity(n * n);
        for i in 0..n {
            lu.extend(a.row(i).iter());
        }
        Self::from_row_major(n, lu)
    }

    /// Factors an `n x n` row-major buffer in place.
    pub fn from_row_major(n: usize, mut lu: Vec<f64>) -> Result<Self> {
        assert_eq!(lu.len(), n * n, "buffer must hold n*n entries");
        let fro = lu.iter().map(|v| v * v).sum::<f64>();
        let threshold = PIVOT_REL_TOL * crate::math::sqrt(fro);
        if n > 0 && fro == 0.0 {
            return Err(Error::Singular {
                pivot: 0.0,
                threshold,
            });
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut best) = (k, lu[k * n + k].abs());
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    p = i;
                    best = v;
                }
            }
            if best <= threshold {
                return Err(Error::Singular {
                    pivot: best,
                    threshold,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let row_k = &head[k * n..];
            for row in tail.chunks_exact_mut(n) {
                let f = row[k] / pivot;
                row[k] = f;
                if f != 0.0 {
                    for (r, &u) in row[k + 1..].iter_mut().zip(&row_k[k + 1..]) {
                        *r -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A z = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&z[..i]).map(|(l, v)| l * v).sum();
            z[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&z[i + 1..]).map(|(u, v)| u * v).sum();
            z[i] = (z[i] - s) / row[i];
        }
        b.copy_from_slice(&z);
    }

    /// Solves `Aᵀ z = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        // Uᵀ w = b
        let mut w = b.to_vec();
        for i in 0..n {
            w[i] /= self.lu[i * n + i];
            let wi = w[i];
            let row = &self.lu[i * n..(i + 1) * n];
            for j in i + 1..n {
                w[j] -= row[j] * wi;
            }
        }
        // Lᵀ v = w
        for i in (0..n).rev() {
            let vi = w[i];
            let row = &self.lu[i * n..i * n + i];
            for j in 0..i {
                w[j] -= row[j] * vi;
            }
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = w[i];
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut z = b.clone();
        self.solve_in_place(z.as_mut_slice());
        z
    }

    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut z = b.clone();
        self.solve_transpose_in_place(z.as_mut_slice());
        z
    }
}
