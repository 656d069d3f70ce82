//! Minimal dense linear algebra: row-major matrices, a cyclic Jacobi
//! eigensolver for symmetric matrices, and a one-sided Jacobi SVD for square
//! matrices.
//!
//! Jacobi methods are chosen over faster decompositions because they are
//! simple to make deterministic: fixed sweep order, no pivoting heuristics,
//! and an explicit sign convention applied by the callers. Problem sizes in
//! this crate are small (d <= a few hundred), where Jacobi accuracy is
//! excellent.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Shape("ragged rows in matrix construction".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
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

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * other`, ikj loop order.
    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a_ik) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                for (o, &b_kj) in out_row.iter_mut().zip(b_row) {
                    *o += a_ik * b_kj;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    fn col_dot(&self, p: usize, q: usize) -> T {
        let mut acc = T::zero();
        let mut i = 0;
        while i < self.rows * self.cols {
            acc += self.data[i + p] * self.data[i + q];
            i += self.cols;
        }
        acc
    }

    fn rotate_cols(&mut self, p: usize, q: usize, c: T, s: T) {
        let mut i = 0;
        while i < self.rows * self.cols {
            let vp = self.data[i + p];
            let vq = self.data[i + q];
            self.data[i + p] = c * vp - s * vq;
            self.data[i + q] = s * vp + c * vq;
            i += self.cols;
        }
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

const MAX_SWEEPS: usize = 64;

/// tan of the Jacobi rotation angle for the quadratic `t^2 + 2*tau*t - 1 = 0`,
/// taking the root of smaller magnitude.
fn jacobi_tan<T: Scalar>(tau: T) -> T {
    let root = (T::one() + tau * tau).sqrt();
    if tau >= T::zero() {
        T::one() / (tau + root)
    } else {
        -T::one() / (-tau + root)
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in non-increasing order and the matching eigenvectors
/// as the columns of the returned matrix.
pub fn sym_eigen<T: Scalar>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if a.rows() != a.cols() {
        return Err(Error::Shape("sym_eigen requires a square matrix".into()));
    }
    let n = a.rows();
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let tol = T::epsilon() * a.frobenius_norm();
    if tol == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol {
                    continue;
                }
                changed = true;
                let tau = (a.get(q, q) - a.get(p, p)) / ((T::one() + T::one()) * apq);
                let t = jacobi_tan(tau);
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // A <- G^T A G with G the (p,q) rotation.
                for k in 0..n {
                    let akp = a.get(p, k);
                    let akq = a.get(q, k);
                    a.set(p, k, c * akp - s * akq);
                    a.set(q, k, s * akp + c * akq);
                }
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                v.rotate_cols(p, q, c, s);
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(
            "Jacobi eigensolver did not converge".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .partial_cmp(&a.get(i, i))
            .expect("eigenvalues are finite")
    });
    let values: Vec<T> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok((values, vectors))
}

/// Full SVD of a square matrix: `m = u * diag(sigma) * v^T`.
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix.
///
/// Columns of the working copy stay equal to `m * v` throughout, so left and
/// right singular vectors remain correctly paired. Columns whose singular
/// value underflows the rank threshold get their `u` replaced by a
/// deterministic orthonormal completion (the result is still a valid SVD).
pub fn svd_square<T: Scalar>(m: &Matrix<T>) -> Result<Svd<T>> {
    if m.rows() != m.cols() {
        return Err(Error::Shape("svd_square requires a square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = a.col_dot(p, p);
                let beta = a.col_dot(q, q);
                let gamma = a.col_dot(p, q);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                changed = true;
                let tau = (beta - alpha) / ((T::one() + T::one()) * gamma);
                let t = jacobi_tan(tau);
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                a.rotate_cols(p, q, c, s);
                v.rotate_cols(p, q, c, s);
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }

    let mut norms: Vec<T> = (0..n).map(|j| a.col_dot(j, j).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .expect("finite singular values")
    });

    let sigma_max = order.first().map_or(T::zero(), |&i| norms[i]);
    let rank_tol = sigma_max * eps * T::from_config(n as f64).max(T::one());

    let mut u = Matrix::zeros(n, n);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut deficient = Vec::new();
    let mut sigma = Vec::with_capacity(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let s = norms[old_col];
        for r in 0..n {
            v_sorted.set(r, new_col, v.get(r, old_col));
        }
        if s > rank_tol && s > T::zero() {
            for r in 0..n {
                u.set(r, new_col, a.get(r, old_col) / s);
            }
            sigma.push(s);
        } else {
            deficient.push(new_col);
            sigma.push(T::zero());
            norms[old_col] = T::zero();
        }
    }
    if !deficient.is_empty() {
        complete_orthonormal(&mut u, &deficient)?;
    }
    Ok(Svd {
        u,
        sigma,
        v: v_sorted,
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fill the listed columns of `u` with an orthonormal completion of the
/// remaining columns: Gram-Schmidt with re-orthogonalization over a fixed
/// pseudo-random candidate stream (deterministic; standard basis vectors can
/// run out of usable candidates at high deficiency).
fn complete_orthonormal<T: Scalar>(u: &mut Matrix<T>, missing: &[usize]) -> Result<()> {
    let n = u.rows();
    let mut filled: Vec<usize> = (0..n).filter(|c| !missing.contains(c)).collect();
    let mut state = 0x0DDB_1A5E_5BAD_5EEDu64;
    let threshold = T::from_config(1e-3);
    'targets: for &target in missing {
        for _ in 0..64 {
            let mut w: Vec<T> = (0..n)
                .map(|_| {
                    let z = splitmix64(&mut state);
                    T::from_config((z >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                })
                .collect();
            for _ in 0..2 {
                for &col in &filled {
                    let mut proj = T::zero();
                    for r in 0..n {
                        proj += u.get(r, col) * w[r];
                    }
                    for r in 0..n {
                        w[r] -= proj * u.get(r, col);
                    }
                }
            }
            let nw = norm(&w);
            if nw > threshold {
                for r in 0..n {
                    u.set(r, target, w[r] / nw);
                }
                filled.push(target);
                continue 'targets;
            }
        }
        return Err(Error::Numerical(
            "failed to complete orthonormal basis".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eigen_of_diagonal() {
        let m = Matrix::from_vec(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let (vals, vecs) = sym_eigen(&m).unwrap();
        assert!(close(vals[0], 3.0, 1e-12) && close(vals[1], 1.0, 1e-12));
        assert!(close(vecs.get(0, 0).abs(), 1.0, 1e-12));
    }

    #[test]
    fn eigen_known_2x2() {
        // [[1,2],[2,4]] has eigenvalues 5 and 0, top eigenvector (1,2)/sqrt(5)
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let (vals, vecs) = sym_eigen(&m).unwrap();
        assert!(close(vals[0], 5.0, 1e-12));
        assert!(close(vals[1], 0.0, 1e-12));
        let (x, y) = (vecs.get(0, 0), vecs.get(1, 0));
        let s = 1.0 / 5.0_f64.sqrt();
        assert!(close(x.abs(), s, 1e-12) && close(y.abs(), 2.0 * s, 1e-12));
    }

    #[test]
    fn svd_reconstructs() {
        let m =
            Matrix::from_vec(3, 3, vec![2.0, -1.0, 0.5, 0.0, 3.0, 1.0, -2.0, 0.25, 4.0]).unwrap();
        let svd = svd_square(&m).unwrap();
        // reconstruct u * diag(sigma) * v^T
        let mut us = svd.u.clone();
        for r in 0..3 {
            for c in 0..3 {
                let v = us.get(r, c) * svd.sigma[c];
                us.set(r, c, v);
            }
        }
        let rec = us.matmul(&svd.v.transpose()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert!(close(rec.get(r, c), m.get(r, c), 1e-10));
            }
        }
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rank_deficient_keeps_u_orthogonal() {
        // outer product -> rank 1
        let m = Matrix::from_vec(3, 3, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 3.0, 6.0, 9.0]).unwrap();
        let svd = svd_square(&m).unwrap();
        let utu = svd.u.transpose().matmul(&svd.u).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!(close(utu.get(r, c), expect, 1e-10));
            }
        }
        assert!(svd.sigma[1].abs() < 1e-10 && svd.sigma[2].abs() < 1e-10);
    }

    #[test]
    fn matmul_shapes() {
        let a = Matrix::<f64>::zeros(2, 3);
        let b = Matrix::<f64>::zeros(4, 2);
        assert!(a.matmul(&b).is_err());
    }
}
