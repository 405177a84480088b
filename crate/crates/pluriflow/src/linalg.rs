//! Small dense complex linear algebra.
//!
//! Everything in this crate runs on matrices of size at most ~70, so the
//! implementations favour robustness over asymptotics: partial-pivot LU,
//! cyclic Jacobi for Hermitian eigenproblems and a one-sided Jacobi SVD
//! whose right singular vectors give kernels directly.

use crate::{Error, Result, C64};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian symmetrization `(M + M†)/2`.
    pub fn hermitize(&self) -> CMat {
        assert_eq!(self.rows, self.cols);
        CMat::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn herm_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    fn lu(&self) -> Result<(CMat, Vec<usize>, i32)> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let (mut piv, mut best) = (k, a[(k, k)].norm());
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMetric(format!("zero pivot at column {k}")));
            }
            if piv != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let d = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / d;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn det(&self) -> C64 {
        match self.lu() {
            Ok((lu, _, sign)) => {
                let mut d = C64::new(sign as f64, 0.0);
                for i in 0..self.rows {
                    d *= lu[(i, i)];
                }
                d
            }
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn solve_vec(&self, b: &[C64]) -> Result<Vec<C64>> {
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut x: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let xj = x[j];
                x[i] -= lu[(i, j)] * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let xj = x[j];
                x[i] -= lu[(i, j)] * xj;
            }
            x[i] /= lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMat> {
        let n = self.rows;
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let col = self.solve_vec(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns eigenvalues in ascending order and the matrix of
    /// eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMat) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.hermitize();
        let mut v = CMat::identity(n);
        let off = |a: &CMat| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        s += a[(i, j)].norm_sqr();
                    }
                }
            }
            s.sqrt()
        };
        let scale = self.max_abs().max(1e-300);
        for _sweep in 0..60 {
            if off(&a) <= 1e-15 * scale * n as f64 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.norm() <= 1e-300 {
                        continue;
                    }
                    // Diagonalize the 2x2 Hermitian block [[app, apq],[apq*, aqq]].
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Unitary J with J^† A J killing (p,q):
                    // col_p' = c*col_p - s*phase^†... apply G = [[c, s*phase],[-s*phase^†, c]]
                    let sp = phase * s;
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip * c - aiq * sp.conj();
                        a[(i, q)] = aip * sp + aiq * c;
                    }
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = apj * c - aqj * sp;
                        a[(q, j)] = apj * sp.conj() + aqj * c;
                    }
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * c - viq * sp.conj();
                        v[(i, q)] = vip * sp + viq * c;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let evals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
        let vals = order.iter().map(|&i| evals[i]).collect();
        let vecs = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    /// One-sided Jacobi SVD. Returns singular values (descending) and the
    /// right singular vectors as columns; kernel vectors are the columns
    /// whose singular value falls below the caller's threshold.
    pub fn svd_values_rsv(&self) -> (Vec<f64>, CMat) {
        let m = self.rows;
        let n = self.cols;
        let mut a = self.clone();
        let mut v = CMat::identity(n);
        let col_dot = |a: &CMat, p: usize, q: usize| -> C64 {
            (0..m).map(|i| a[(i, p)].conj() * a[(i, q)]).sum()
        };
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let app = col_dot(&a, p, p).re;
                    let aqq = col_dot(&a, q, q).re;
                    let apq = col_dot(&a, p, q);
                    if apq.norm() <= 1e-30 * (app * aqq).sqrt().max(1e-300) {
                        continue;
                    }
                    rotated = true;
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let sp = phase * s;
                    for i in 0..m {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip * c - aiq * sp.conj();
                        a[(i, q)] = aip * sp + aiq * c;
                    }
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * c - viq * sp.conj();
                        v[(i, q)] = vip * sp + viq * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..n)
            .map(|j| col_dot(&a, j, j).re.max(0.0).sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
        sv = order.iter().map(|&i| sv[i]).collect();
        let vv = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
        (sv, vv)
    }

    /// Rank at the same threshold rule as [`CMat::kernel`].
    pub fn rank(&self, rel_tol: f64) -> usize {
        let (sv, _) = self.svd_values_rsv();
        let top = sv.first().copied().unwrap_or(0.0);
        let cut = if top > 0.0 {
            rel_tol * top.max(1.0)
        } else {
            rel_tol
        };
        sv.iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal kernel basis at a relative threshold (absolute when the
    /// matrix is numerically zero).
    pub fn kernel(&self, rel_tol: f64) -> Vec<Vec<C64>> {
        let (sv, v) = self.svd_values_rsv();
        let top = sv.first().copied().unwrap_or(0.0);
        let cut = if top > 0.0 {
            rel_tol * top.max(1.0)
        } else {
            rel_tol
        };
        let mut out = Vec::new();
        for j in 0..self.cols {
            if sv[j] <= cut {
                out.push((0..self.cols).map(|i| v[(i, j)]).collect());
            }
        }
        out
    }

    /// Cholesky factor `L` (lower triangular) of a Hermitian positive
    /// definite matrix, `self = L L†`.
    pub fn cholesky(&self) -> Result<CMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let a = self.hermitize();
        let mut l = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    if s.re <= 0.0 {
                        return Err(Error::SingularMetric(format!(
                            "cholesky pivot {:.3e} at {i}",
                            s.re
                        )));
                    }
                    l[(i, j)] = C64::new(s.re.sqrt(), 0.0);
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(l)
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}
