//! Small dense kernels: a cyclic Jacobi symmetric eigensolver and an
//! incrementally grown thin QR factorisation used by the greedy and
//! active-set solvers.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{PceError, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with eigenvectors stored as columns. No
/// ordering is imposed here.
pub fn symmetric_eigen<T: Real>(input: &Array2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let n = input.nrows();
    if input.ncols() != n {
        return Err(PceError::DimensionMismatch {
            expected: n,
            got: input.ncols(),
        });
    }
    let half = T::lit(0.5);
    let mut a = Array2::from_shape_fn((n, n), |(i, j)| (input[[i, j]] + input[[j, i]]) * half);
    let mut v = Array2::<T>::eye(n);
    let total: T = a.iter().map(|x| *x * *x).sum();
    if total == T::zero() {
        return Ok((Array1::zeros(n), v));
    }
    let threshold = T::epsilon() * T::epsilon() * total;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off <= threshold {
            return Ok((a.diag().to_owned(), v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (apq + apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (theta + theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(PceError::Eigensolver { sweeps: MAX_SWEEPS })
}

/// Thin QR factorisation `A = QR` built one column at a time with
/// re-orthogonalised modified Gram-Schmidt.
#[derive(Clone, Debug)]
pub struct IncrementalQr<T> {
    rows: usize,
    q: Vec<Array1<T>>,
    /// Column `j` of the upper-triangular factor, `j + 1` entries.
    r: Vec<Vec<T>>,
    dependence_tol: T,
}

impl<T: Real> IncrementalQr<T> {
    pub fn new(rows: usize) -> Self {
        Self {
            rows,
            q: Vec::new(),
            r: Vec::new(),
            dependence_tol: T::tol_floor(1e-10),
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Appends a column. Returns `false` (and leaves the factorisation
    /// untouched) when the column is numerically dependent on those already
    /// present.
    pub fn push(&mut self, column: ArrayView1<T>) -> bool {
        debug_assert_eq!(column.len(), self.rows);
        let col_norm = column.dot(&column).sqrt();
        if col_norm == T::zero() || self.q.len() >= self.rows {
            return false;
        }
        let mut w = column.to_owned();
        let mut coeffs = vec![T::zero(); self.q.len() + 1];
        for _pass in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let h = qk.dot(&w);
                coeffs[k] += h;
                w.scaled_add(-h, qk);
            }
        }
        let w_norm = w.dot(&w).sqrt();
        if w_norm <= self.dependence_tol * col_norm {
            return false;
        }
        w.mapv_inplace(|x| x / w_norm);
        coeffs[self.q.len()] = w_norm;
        self.q.push(w);
        self.r.push(coeffs);
        true
    }

    /// `Qᵀ v`
    pub fn qt(&self, v: ArrayView1<T>) -> Vec<T> {
        self.q.iter().map(|qk| qk.dot(&v)).collect()
    }

    /// `Q z`
    pub fn q_times(&self, z: &[T]) -> Array1<T> {
        let mut out = Array1::zeros(self.rows);
        for (qk, &zk) in self.q.iter().zip(z) {
            out.scaled_add(zk, qk);
        }
        out
    }

    /// Solves `R x = rhs` by back substitution.
    pub fn solve_r(&self, rhs: &[T]) -> Vec<T> {
        let k = self.r.len();
        let mut x = rhs.to_vec();
        for j in (0..k).rev() {
            x[j] /= self.r[j][j];
            let xj = x[j];
            for (xi, rji) in x[..j].iter_mut().zip(&self.r[j]) {
                *xi -= *rji * xj;
            }
        }
        x
    }

    /// Solves `Rᵀ z = rhs` by forward substitution.
    pub fn solve_rt(&self, rhs: &[T]) -> Vec<T> {
        let k = self.r.len();
        let mut z = rhs.to_vec();
        for j in 0..k {
            let mut s = z[j];
            for (zi, rji) in z[..j].iter().zip(&self.r[j]) {
                s -= *rji * *zi;
            }
            z[j] = s / self.r[j][j];
        }
        z
    }

    /// Least-squares coefficients `argmin ‖A x − b‖₂`.
    pub fn least_squares(&self, b: ArrayView1<T>) -> Vec<T> {
        self.solve_r(&self.qt(b))
    }
}
