//! Dense square matrices of small order and a Jacobi eigensolver.
//!
//! The systems treated here couple at most a handful of species, so all
//! matrices are dense row-major `N x N` with `N <= 8`; no sparse machinery.

// Float methods (ln, exp, powf, ...) for pure no_std dependency graphs; when a
// std crate sits anywhere in the graph the inherent methods shadow these.
#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from a row-major nested slice; panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "ragged matrix rows");
            rows[i][j]
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A + A^t`.
    pub fn plus_transpose(&self) -> SquareMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j) + self.get(j, i))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            let mut row = 0.0;
            for j in 0..self.n {
                row += self.get(i, j).abs();
            }
            best = best.max(row);
        }
        best
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Quadratic form `x^t A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += x[i] * self.get(i, j) * x[j];
            }
        }
        acc
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps,
    /// returned in ascending order. The caller is responsible for symmetry;
    /// only the symmetric part participates.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        // Work on the symmetrized copy so near-symmetric inputs are accepted.
        let mut a = Self::from_fn(n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)));
        let scale = a.inf_norm().max(1.0);
        let tol = 1e-15 * scale;
        for _sweep in 0..64 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a.get(i, j).abs());
                }
            }
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() <= tol * 1e-2 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    // Stable tangent of the rotation angle.
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("non-finite eigenvalue"));
        eig
    }

    /// Smallest eigenvalue of the symmetric part of `self`.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        self.symmetric_eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Solves a small dense linear system `A x = b` by Gaussian elimination with
/// partial pivoting. Returns `None` when the pivot collapses.
pub fn solve_dense(a: &SquareMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n();
    debug_assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m.get(r, col).abs() > m.get(piv, col).abs() {
                piv = r;
            }
        }
        if m.get(piv, col).abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                let tmp = m.get(col, k);
                m.set(col, k, m.get(piv, k));
                m.set(piv, k, tmp);
            }
            rhs.swap(col, piv);
        }
        for r in (col + 1)..n {
            let factor = m.get(r, col) / m.get(col, col);
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m.get(r, k) - factor * m.get(col, k);
                m.set(r, k, v);
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m.get(row, k) * x[k];
        }
        x[row] = acc / m.get(row, row);
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let m = SquareMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let eig = m.symmetric_eigenvalues();
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_handles_indefinite_4x4() {
        // diag(-3, -1, 2, 5) conjugated stays similar; build via a known form.
        let m = SquareMatrix::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 4.0, 1.0],
            &[0.0, 0.0, 1.0, 4.0],
        ]);
        let eig = m.symmetric_eigenvalues();
        let expected = [-1.0, 1.0, 3.0, 5.0];
        for (got, want) in eig.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "eig {got} vs {want}");
        }
    }

    #[test]
    fn min_eigenvalue_detects_indefiniteness() {
        let m = SquareMatrix::from_rows(&[&[820.0, 400.0], &[400.0, 20.0]]);
        let lo = m.min_symmetric_eigenvalue();
        assert!(lo < -100.0, "expected strongly negative, got {lo}");
    }

    #[test]
    fn dense_solve_roundtrip() {
        let a = SquareMatrix::from_rows(&[&[3.0, 1.0, 0.0], &[1.0, 4.0, 1.0], &[0.0, 1.0, 5.0]]);
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a.get(i, j) * x_true[j];
            }
        }
        let x = solve_dense(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
