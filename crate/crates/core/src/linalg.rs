//! Small dense linear algebra kernels: row-major matrices, Jacobi
//! eigenvalues, one-sided Jacobi SVD and power iteration.
//!
//! The experiment sizes here top out around 1024 columns, so everything is
//! plain O(n³) dense code chosen for determinism rather than speed.

use alloc::vec;
use alloc::vec::Vec;

use crate::num;
use crate::rng::SplitMix64;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape/data length mismatch");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            out.push(dot(self.row(i), x));
        }
        out
    }

    /// `Aᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += row[j] * xi;
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        num::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    num::sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    num::sqrt(s)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Panics on non-square input; symmetry is the caller's responsibility.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    assert_eq!(
        a.rows, a.cols,
        "symmetric_eigenvalues needs a square matrix"
    );
    let n = a.rows;
    let mut m = a.clone();
    let scale = m.frobenius_norm();
    if scale == 0.0 || n == 1 {
        let mut eigs: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return eigs;
    }
    let tol = 1e-15 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if num::sqrt(2.0 * off) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if num::abs(apq) <= tol / (n as f64) {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let zeta = (aqq - app) / (2.0 * apq);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + num::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + num::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ` with σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × min(rows, cols)`, orthonormal columns (zero where σ = 0).
    pub u: DenseMatrix,
    /// `min(rows, cols)` singular values, descending.
    pub singular: Vec<f64>,
    /// `cols × min(rows, cols)`, orthonormal columns.
    pub v: DenseMatrix,
}

impl Svd {
    /// Reassemble `U diag(s) Vᵀ` with a caller-supplied spectrum `s`.
    pub fn recompose(&self, s: &[f64]) -> DenseMatrix {
        let m = self.u.rows;
        let n = self.v.rows;
        let r = self.singular.len();
        assert_eq!(s.len(), r);
        let mut out = DenseMatrix::zeros(m, n);
        for (k, &sk) in s.iter().enumerate().take(r) {
            if sk == 0.0 {
                continue;
            }
            for i in 0..m {
                let uik = self.u.get(i, k) * sk;
                if uik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += uik * self.v.get(j, k);
                }
            }
        }
        out
    }
}

/// One-sided Jacobi SVD. Exact enough for the desk-scale matrices used here
/// (worst case a few hundred on a side) and fully deterministic.
pub fn svd(a: &DenseMatrix) -> Svd {
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            singular: t.singular,
            v: t.u,
        };
    }
    let m = a.rows;
    let n = a.cols;
    // Work on columns of U (initially A), accumulate rotations in V.
    let mut u = a.clone();
    let mut v = DenseMatrix::zeros(n, n);
    for j in 0..n {
        v.set(j, j, 1.0);
    }
    let col_dot = |mat: &DenseMatrix, p: usize, q: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..mat.rows {
            s += mat.get(i, p) * mat.get(i, q);
        }
        s
    };
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = col_dot(&u, p, p);
                let beta = col_dot(&u, q, q);
                let gamma = col_dot(&u, p, q);
                if num::abs(gamma) <= eps * num::sqrt(alpha * beta) || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + num::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + num::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let uip = u.get(i, p);
                    let uiq = u.get(i, q);
                    u.set(i, p, c * uip - s * uiq);
                    u.set(i, q, s * uip + c * uiq);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // Column norms are the singular values; normalize U in place.
    let mut order: Vec<usize> = (0..n).collect();
    let mut sigmas = vec![0.0; n];
    for (j, s) in sigmas.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..m {
            acc += u.get(i, j) * u.get(i, j);
        }
        *s = num::sqrt(acc);
    }
    order.sort_by(|&x, &y| sigmas[y].partial_cmp(&sigmas[x]).unwrap());
    let mut us = DenseMatrix::zeros(m, n);
    let mut vs = DenseMatrix::zeros(n, n);
    let mut ss = vec![0.0; n];
    for (dst, &src) in order.iter().enumerate() {
        ss[dst] = sigmas[src];
        let inv = if sigmas[src] > 0.0 {
            1.0 / sigmas[src]
        } else {
            0.0
        };
        for i in 0..m {
            us.set(i, dst, u.get(i, src) * inv);
        }
        for i in 0..n {
            vs.set(i, dst, v.get(i, src));
        }
    }
    Svd {
        u: us,
        singular: ss,
        v: vs,
    }
}

/// Power iteration failed to reach the requested relative tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerIterationError {
    pub iterations: usize,
}

impl core::fmt::Display for PowerIterationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "power iteration did not converge within {} steps",
            self.iterations
        )
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PowerIterationError {}

/// Largest eigenvalue of a symmetric positive semi-definite operator given as
/// a closure `x ↦ Sx`, via Rayleigh-quotient power iteration from a seeded
/// start vector.
pub fn power_iteration<F>(
    dim: usize,
    apply: F,
    rel_tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<f64, PowerIterationError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = SplitMix64::new(seed ^ 0x9e3779b97f4a7c15);
    let mut v = rng.gaussian_vec(dim);
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut lambda_prev = 0.0;
    for it in 0..max_iters {
        let w = apply(&v);
        let lambda = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if it > 0 && num::abs(lambda - lambda_prev) <= rel_tol * num::abs(lambda) {
            return Ok(lambda);
        }
        lambda_prev = lambda;
    }
    Err(PowerIterationError {
        iterations: max_iters,
    })
}
