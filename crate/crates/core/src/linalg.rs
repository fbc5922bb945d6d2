//! Dense solves and restarted GMRES.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition estimate from the pivots of a triangular factor.
fn pivot_ratio<I: Iterator<Item = f64>>(diag: I) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for d in diag {
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Pivot ratio above which a factorization is treated as singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e14;

/// LU factorization with partial pivoting of a complex square matrix.
pub struct ComplexLu {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ComplexLu {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let lu = m.lu();
        let cond = pivot_ratio(lu.u().diagonal().iter().map(|z| z.norm()));
        if !(cond < SINGULAR_PIVOT_RATIO) {
            return Err(Error::SingularSystem { condition: cond });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let b = DVector::from_column_slice(rhs);
        let x = self
            .lu
            .solve(&b)
            .ok_or(Error::SingularSystem { condition: f64::INFINITY })?;
        Ok(x.as_slice().to_vec())
    }
}

/// Solves the real symmetric system `a x = b`.
///
/// Tries a Cholesky factorization first and falls back to LU with partial
/// pivoting when the matrix is not numerically positive definite.
pub fn solve_symmetric(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    if let Some(ch) = a.clone().cholesky() {
        let l = ch.l_dirty();
        let ratio = pivot_ratio(l.diagonal().iter().map(|d| d.abs()));
        // squared: pivots of L are square roots of those of the matrix
        if ratio * ratio < SINGULAR_PIVOT_RATIO {
            return Ok(ch.solve(&rhs).as_slice().to_vec());
        }
    }
    let lu = a.lu();
    let cond = pivot_ratio(lu.u().diagonal().iter().map(|d| d.abs()));
    if !(cond < SINGULAR_PIVOT_RATIO) {
        return Err(Error::SingularSystem { condition: cond });
    }
    lu.solve(&rhs)
        .map(|x| x.as_slice().to_vec())
        .ok_or(Error::SingularSystem { condition: cond })
}

/// Settings for restarted GMRES.
#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub restart: usize,
    /// Relative tolerance on the 2-norm residual.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { restart: 50, tol: 1e-12, max_iters: 2000 }
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Restarted GMRES with Givens rotations, starting from `x = 0`.
///
/// Returns the solution and the number of inner iterations performed.
pub fn gmres<F>(matvec: F, b: &[Complex64], opts: GmresOptions) -> Result<(Vec<Complex64>, usize)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let m = opts.restart.max(1);
    let mut total = 0usize;
    let mut r = b.to_vec();
    let mut ax = vec![zero; n];
    loop {
        let beta = norm2(&r);
        if beta <= opts.tol * bnorm {
            return Ok((x, total));
        }
        if total >= opts.max_iters {
            return Err(Error::SolveTolerance { residual: beta / bnorm });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut hess = vec![vec![zero; m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let mut w = vec![zero; n];
            matvec(&basis[j], &mut w);
            // modified Gram-Schmidt
            for (i, v) in basis.iter().enumerate() {
                let hij: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                hess[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            hess[j + 1][j] = Complex64::new(hn, 0.0);
            for i in 0..j {
                let t = cs[i] * hess[i][j] + sn[i] * hess[i + 1][j];
                hess[i + 1][j] = -sn[i].conj() * hess[i][j] + cs[i] * hess[i + 1][j];
                hess[i][j] = t;
            }
            let (a, bb) = (hess[j][j], hess[j + 1][j]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[j] = 1.0;
                sn[j] = zero;
            } else if a.norm() == 0.0 {
                cs[j] = 0.0;
                sn[j] = bb.conj() / bb.norm();
            } else {
                cs[j] = a.norm() / denom;
                sn[j] = (a / a.norm()) * bb.conj() / denom;
            }
            hess[j][j] = cs[j] * a + sn[j] * bb;
            hess[j + 1][j] = zero;
            g[j + 1] = -sn[j].conj() * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            if g[j + 1].norm() <= opts.tol * bnorm || hn == 0.0 || total >= opts.max_iters {
                break;
            }
            basis.push(w.iter().map(|z| z / hn).collect());
        }
        // back substitution on the triangular Hessenberg block
        let mut y = vec![zero; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= hess[i][k] * y[k];
            }
            y[i] = s / hess[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[k]) {
                *xi += yk * vi;
            }
        }
        matvec(&x, &mut ax);
        for ((ri, bi), axi) in r.iter_mut().zip(b).zip(&ax) {
            *ri = bi - axi;
        }
    }
}
