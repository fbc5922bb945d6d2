//! Mixed L1/H1 regularized inversion of the linearized scattering model.
//!
//! With `A` the discretized operator `eta -> int_D G(x, y) u(y) eta(y) dy`
//! (total field `u` frozen at the initial guess) and `L` the Dirichlet
//! Laplacian `-Delta` on `D`, the solver minimizes over real `eta`
//!
//! ```text
//! J(eta) = 1/2 |A eta - y|^2 + alpha w sum |eta_j| + beta/2 w eta^T L eta
//! ```
//!
//! where `w = h_D^dim` is the cell volume of the inversion mesh. The
//! optimality system
//!
//! ```text
//! N eta + beta w L eta - g + alpha w lambda = 0,   N = Re(A^H A), g = Re(A^H y)
//! lambda = (lambda + c eta) / max(1, |lambda + c eta|)
//! ```
//!
//! is solved by a primal-dual active set (semi-smooth Newton) iteration. On
//! the active set `{|lambda + c eta| <= 1}` the primal variable is zero; on
//! the inactive set the damped and regularized Newton step gives
//!
//! ```text
//! (N + alpha w c (1 - a b) / (d - 1) + beta w L) eta = g - alpha w a
//! lambda = c (1 - a b) / (d - 1) eta + a
//! ```
//!
//! with `a = lambda / max(|lambda|, 1)`, `b = sign(lambda + c eta)` and
//! `d = |lambda + c eta|`. The multiplier on the active set comes from the
//! first optimality equation.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{total_field_on, ForwardSystem, MeasurementSet};
use crate::grid::{distance, RealField, SubdomainMask};
use crate::linalg::solve_symmetric;
use crate::special::{green_radial, Dim};

/// Dense complex operator from cells of `D` to stacked (wave, receiver) samples.
///
/// Stored as the real matrix `B = [Re A; Im A]`, so that `Re(A^H A) = B^T B`
/// and `Re(A^H v) = B^T [Re v; Im v]`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    rows: usize,
    stacked: DMatrix<f64>,
    /// `B^T B`, formed on first use and shared by every Newton step.
    normal: OnceLock<DMatrix<f64>>,
}

impl LinearizedOperator {
    pub fn from_matrix(a: &DMatrix<Complex64>) -> Self {
        let rows = a.nrows();
        let stacked = DMatrix::from_fn(2 * rows, a.ncols(), |i, j| {
            if i < rows {
                a[(i, j)].re
            } else {
                a[(i - rows, j)].im
            }
        });
        Self { rows, stacked, normal: OnceLock::new() }
    }

    /// Number of complex rows (waves times receivers).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of cells of `D`.
    pub fn cols(&self) -> usize {
        self.stacked.ncols()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.stacked[(i, j)], self.stacked[(i + self.rows, j)])
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols(), |i, j| self.entry(i, j))
    }

    /// `A eta`.
    pub fn apply(&self, eta: &[f64]) -> Vec<Complex64> {
        let v = &self.stacked * DVector::from_column_slice(eta);
        (0..self.rows).map(|i| Complex64::new(v[i], v[i + self.rows])).collect()
    }

    /// `Re(A^H v)`.
    pub fn adjoint_re(&self, v: &[Complex64]) -> Vec<f64> {
        let stacked = DVector::from_iterator(
            2 * self.rows,
            v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)),
        );
        self.stacked.tr_mul(&stacked).as_slice().to_vec()
    }

    /// `Re(A^H A eta)`.
    pub fn normal_apply(&self, eta: &[f64]) -> Vec<f64> {
        let v = &self.stacked * DVector::from_column_slice(eta);
        self.stacked.tr_mul(&v).as_slice().to_vec()
    }

    /// `Re(A^H A)` restricted to the columns `idx`.
    pub fn normal_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        let n = self.normal_ref();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| n[(idx[i], idx[j])])
    }

    pub fn normal_matrix(&self) -> DMatrix<f64> {
        self.normal_ref().clone()
    }

    fn normal_ref(&self) -> &DMatrix<f64> {
        self.normal.get_or_init(|| self.stacked.tr_mul(&self.stacked))
    }
}

/// Discrete `-Delta` on the cells of `D` with zero Dirichlet data outside.
#[derive(Debug, Clone)]
pub struct LaplacianOperator {
    h: f64,
    dim: Dim,
    neighbors: Vec<Vec<usize>>,
}

impl LaplacianOperator {
    pub fn new(d: &SubdomainMask) -> Self {
        let local = d.local_index();
        let neighbors = d
            .cells()
            .iter()
            .map(|&c| d.grid.face_neighbors(c).filter_map(|n| local[n]).collect())
            .collect();
        Self { h: d.grid.h(), dim: d.grid.dim(), neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Quadrature weight `h^dim` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim.as_usize() as i32)
    }

    fn diag(&self) -> f64 {
        2.0 * self.dim.as_usize() as f64 / (self.h * self.h)
    }

    /// `(2 dim eta_p - sum_{q ~ p, q in D} eta_q) / h^2`.
    pub fn apply(&self, eta: &[f64]) -> Vec<f64> {
        assert_eq!(eta.len(), self.len(), "vector size does not match the Laplacian");
        let inv_h2 = 1.0 / (self.h * self.h);
        self.neighbors
            .iter()
            .enumerate()
            .map(|(p, nb)| self.diag() * eta[p] - inv_h2 * nb.iter().map(|&q| eta[q]).sum::<f64>())
            .collect()
    }

    /// `eta^T L eta`.
    pub fn quadratic_form(&self, eta: &[f64]) -> f64 {
        self.apply(eta).iter().zip(eta).map(|(a, b)| a * b).sum()
    }

    /// Adds `scale * L[idx, idx]` to `m`.
    fn add_submatrix(&self, m: &mut DMatrix<f64>, idx: &[usize], pos: &[Option<usize>], scale: f64) {
        let diag = scale * self.diag();
        let off = -scale / (self.h * self.h);
        for (r, &p) in idx.iter().enumerate() {
            m[(r, r)] += diag;
            for &q in &self.neighbors[p] {
                if let Some(s) = pos[q] {
                    m[(r, s)] += off;
                }
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let idx: Vec<usize> = (0..n).collect();
        let pos: Vec<Option<usize>> = (0..n).map(Some).collect();
        let mut m = DMatrix::zeros(n, n);
        self.add_submatrix(&mut m, &idx, &pos, 1.0);
        m
    }
}

/// Stopping rule of the active-set iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop as soon as two consecutive active sets coincide.
    ActiveSet,
    /// Additionally require the complementarity residual to be below `tol`.
    ActiveSetAndComplementarity { tol: f64 },
}

/// Parameters of the mixed model and its solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedRegConfig {
    /// L1 weight.
    pub alpha: f64,
    /// H1 weight.
    pub beta: f64,
    /// Complementarity constant.
    pub c: f64,
    pub max_iters: usize,
    /// Floor on `d - 1` in the inactive-set coefficients.
    pub d_floor: f64,
    pub stop: StopRule,
}

impl Default for MixedRegConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            c: 50.0,
            max_iters: 50,
            d_floor: 1e-12,
            stop: StopRule::ActiveSetAndComplementarity { tol: 1e-8 },
        }
    }
}

impl MixedRegConfig {
    pub fn with_weights(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !(self.beta >= 0.0) {
            return Err(Error::InvalidArgument("alpha and beta must be non-negative".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Domain { what: "complementarity constant", value: self.c });
        }
        if !(self.d_floor > 0.0) {
            return Err(Error::Domain { what: "d floor", value: self.d_floor });
        }
        Ok(())
    }
}

/// Primal-dual iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonState {
    pub eta: Vec<f64>,
    /// Multiplier as produced by the last update; on the active set it may
    /// transiently leave `[-1, 1]`.
    pub lambda: Vec<f64>,
    pub active: Vec<bool>,
    pub iteration: usize,
    pub complementarity: f64,
}

impl NewtonState {
    /// The multiplier projected onto `[-1, 1]`.
    pub fn multiplier(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l.clamp(-1.0, 1.0)).collect()
    }
}

/// One row of the iteration history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub active: usize,
    pub inactive: usize,
    pub complementarity: f64,
    pub stationarity: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsnDiagnostics {
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
}

impl SsnDiagnostics {
    /// `iteration,active,inactive,complementarity,stationarity,objective` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,active,inactive,complementarity,stationarity,objective\n");
        for r in &self.history {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iteration,
                r.active,
                r.inactive,
                crate::io::fmt_f64(r.complementarity),
                crate::io::fmt_f64(r.stationarity),
                crate::io::fmt_f64(r.objective),
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsnResult {
    pub state: NewtonState,
    pub diagnostics: SsnDiagnostics,
}

impl SsnResult {
    pub fn eta(&self) -> &[f64] {
        &self.state.eta
    }
}

/// `sup |lambda - (lambda + c eta) / max(1, |lambda + c eta|)|`.
pub fn complementarity_residual(eta: &[f64], lambda: &[f64], c: f64) -> f64 {
    assert_eq!(eta.len(), lambda.len(), "eta and lambda sizes differ");
    eta.iter()
        .zip(lambda)
        .map(|(&e, &l)| {
            let t = l + c * e;
            (l - t / t.abs().max(1.0)).abs()
        })
        .fold(0.0, f64::max)
}

/// `1/2 |A eta - y|^2 + alpha w |eta|_1 + beta/2 w eta^T L eta`.
pub fn objective(
    a: &LinearizedOperator,
    y: &[Complex64],
    lap: &LaplacianOperator,
    alpha: f64,
    beta: f64,
    eta: &[f64],
) -> f64 {
    let w = lap.cell_volume();
    let misfit: f64 = a.apply(eta).iter().zip(y).map(|(p, q)| (p - q).norm_sqr()).sum();
    0.5 * misfit
        + alpha * w * eta.iter().map(|e| e.abs()).sum::<f64>()
        + 0.5 * beta * w * lap.quadratic_form(eta)
}

/// `Re(A^H (A eta - y)) + beta w L eta`, the gradient of the smooth part.
pub fn smooth_gradient(
    a: &LinearizedOperator,
    y: &[Complex64],
    lap: &LaplacianOperator,
    beta: f64,
    eta: &[f64],
) -> Vec<f64> {
    let w = lap.cell_volume();
    let r: Vec<Complex64> = a.apply(eta).iter().zip(y).map(|(p, q)| p - q).collect();
    let lr = lap.apply(eta);
    a.adjoint_re(&r).iter().zip(lr).map(|(g, l)| g + beta * w * l).collect()
}

/// Sup-norm of `Re(A^H (A eta - y)) + beta w L eta + alpha w lambda`.
pub fn stationarity_residual(
    a: &LinearizedOperator,
    y: &[Complex64],
    lap: &LaplacianOperator,
    alpha: f64,
    beta: f64,
    eta: &[f64],
    lambda: &[f64],
) -> f64 {
    let w = lap.cell_volume();
    smooth_gradient(a, y, lap, beta, eta)
        .iter()
        .zip(lambda)
        .map(|(g, l)| (g + alpha * w * l).abs())
        .fold(0.0, f64::max)
}

/// Semi-smooth Newton / primal-dual active set solver for the mixed model.
///
/// `init_eta` and `init_lambda` default to zero.
pub fn ssn_solve(
    a: &LinearizedOperator,
    y: &[Complex64],
    lap: &LaplacianOperator,
    cfg: &MixedRegConfig,
    init_eta: Option<&[f64]>,
    init_lambda: Option<&[f64]>,
) -> Result<SsnResult> {
    cfg.validate()?;
    let n = a.cols();
    if lap.len() != n || y.len() != a.rows() {
        return Err(Error::InvalidArgument(format!(
            "size mismatch: operator {}x{}, data {}, Laplacian {}",
            a.rows(),
            n,
            y.len(),
            lap.len()
        )));
    }
    let w = lap.cell_volume();
    let alpha = cfg.alpha * w;
    let beta = cfg.beta * w;
    let c = cfg.c;
    let g = a.adjoint_re(y);
    let mut eta = init_eta.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut lambda = init_lambda.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if eta.len() != n || lambda.len() != n {
        return Err(Error::InvalidArgument("initial iterate has the wrong size".into()));
    }
    let mut history = Vec::new();

    if alpha == 0.0 {
        // No L1 term: a single smooth solve on all of D.
        let idx: Vec<usize> = (0..n).collect();
        let pos: Vec<Option<usize>> = (0..n).map(Some).collect();
        let mut m = a.normal_submatrix(&idx);
        lap.add_submatrix(&mut m, &idx, &pos, beta);
        eta = solve_symmetric(m, &g)?;
        lambda = vec![0.0; n];
        let stationarity = stationarity_residual(a, y, lap, cfg.alpha, cfg.beta, &eta, &lambda);
        history.push(IterationRecord {
            iteration: 1,
            active: 0,
            inactive: n,
            complementarity: 0.0,
            stationarity,
            objective: objective(a, y, lap, cfg.alpha, cfg.beta, &eta),
        });
        let state = NewtonState { eta, lambda, active: vec![false; n], iteration: 1, complementarity: 0.0 };
        return Ok(SsnResult {
            state,
            diagnostics: SsnDiagnostics { history, converged: true, iterations: 1 },
        });
    }

    let active_of = |eta: &[f64], lambda: &[f64]| -> Vec<bool> {
        eta.iter().zip(lambda).map(|(e, l)| (l + c * e).abs() <= 1.0).collect()
    };
    let mut active = active_of(&eta, &lambda);
    let mut converged = false;
    let mut iteration = 0;
    let mut complementarity = complementarity_residual(&eta, &lambda, c);
    let mut used_active = active.clone();
    while iteration < cfg.max_iters {
        iteration += 1;
        used_active.clone_from(&active);
        let inactive: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let mut pos = vec![None; n];
        for (r, &i) in inactive.iter().enumerate() {
            pos[i] = Some(r);
        }
        // pointwise a, b, d on the inactive set
        let mut coef = vec![0.0; inactive.len()];
        let mut shift = vec![0.0; inactive.len()];
        for (r, &i) in inactive.iter().enumerate() {
            let t = lambda[i] + c * eta[i];
            let d = t.abs();
            debug_assert!(d > 1.0);
            let av = lambda[i] / lambda[i].abs().max(1.0);
            let bv = t.signum();
            coef[r] = c * (1.0 - av * bv) / (d - 1.0).max(cfg.d_floor);
            shift[r] = av;
        }
        let mut next_eta = vec![0.0; n];
        if !inactive.is_empty() {
            let mut m = a.normal_submatrix(&inactive);
            for r in 0..inactive.len() {
                m[(r, r)] += alpha * coef[r];
            }
            lap.add_submatrix(&mut m, &inactive, &pos, beta);
            let rhs: Vec<f64> = inactive.iter().zip(&shift).map(|(&i, s)| g[i] - alpha * s).collect();
            let sol = solve_symmetric(m, &rhs)?;
            for (&i, v) in inactive.iter().zip(sol) {
                next_eta[i] = v;
            }
        }
        // dual update: second equation on I, first equation on A
        let mut residual = a.normal_apply(&next_eta);
        let lr = lap.apply(&next_eta);
        for ((r, gi), li) in residual.iter_mut().zip(&g).zip(&lr) {
            *r = gi - *r - beta * li;
        }
        let mut next_lambda = vec![0.0; n];
        for i in 0..n {
            next_lambda[i] = match pos[i] {
                Some(r) => coef[r] * next_eta[i] + shift[r],
                None => residual[i] / alpha,
            };
        }
        eta = next_eta;
        lambda = next_lambda;
        complementarity = complementarity_residual(&eta, &lambda, c);
        let stationarity = residual
            .iter()
            .zip(&lambda)
            .map(|(r, l)| (r - alpha * l).abs())
            .fold(0.0, f64::max);
        history.push(IterationRecord {
            iteration,
            active: n - inactive.len(),
            inactive: inactive.len(),
            complementarity,
            stationarity,
            objective: objective(a, y, lap, cfg.alpha, cfg.beta, &eta),
        });
        let next_active = active_of(&eta, &lambda);
        let same = next_active == active;
        active = next_active;
        let done = match cfg.stop {
            StopRule::ActiveSet => same,
            StopRule::ActiveSetAndComplementarity { tol } => same && complementarity <= tol,
        };
        if done {
            converged = true;
            break;
        }
    }
    // eta vanishes exactly on the active set of the last Newton step
    let state = NewtonState { eta, lambda, active: used_active, iteration, complementarity };
    Ok(SsnResult {
        state,
        diagnostics: SsnDiagnostics { history, converged, iterations: iteration },
    })
}

/// Linearized operator on `D` and the matching stacked data vector.
///
/// For every wave the induced current of `init` (restricted to `D`) is
/// computed on the inversion mesh and the resulting total field `u_i` on `D`
/// freezes the kernel: `A[(i, m), j] = G(x_m, y_j) u_i(y_j) h_D^dim`.
pub fn build_linearized(
    init: &RealField,
    d: &SubdomainMask,
    data: &MeasurementSet,
) -> Result<(LinearizedOperator, Vec<Complex64>)> {
    if init.grid != d.grid {
        return Err(Error::GridMismatch("initial guess and D must share a grid".into()));
    }
    if d.is_empty() {
        return Err(Error::InvalidArgument("inversion domain D is empty".into()));
    }
    if init.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial guess must be finite".into()));
    }
    let grid = d.grid;
    if grid.dim() != data.dim {
        return Err(Error::GridMismatch("measurement and grid dimensions differ".into()));
    }
    let mut eta = RealField::zeros(grid);
    for &c in d.cells() {
        eta.values[c] = init.values[c];
    }
    let waves = data.waves()?;
    let system = ForwardSystem::new(&eta, data.k)?;
    let receivers = &data.receivers.points;
    let per_wave = receivers.len();
    let cols = d.len();
    let vol = grid.cell_volume();
    let centers: Vec<_> = d.cells().iter().map(|&c| grid.center(c)).collect();
    // receiver-to-cell kernel, shared by all waves
    let kernel: Vec<Complex64> = (0..per_wave * cols)
        .into_par_iter()
        .map(|e| {
            let (m, j) = (e / cols, e % cols);
            green_radial(data.k, distance(&receivers[m], &centers[j]), grid.dim()) * vol
        })
        .collect();
    let mut a = DMatrix::from_element(waves.len() * per_wave, cols, Complex64::new(0.0, 0.0));
    let mut y = Vec::with_capacity(waves.len() * per_wave);
    for (i, wave) in waves.iter().enumerate() {
        let current = system.solve(wave)?;
        let total = total_field_on(d, &current, wave)?;
        for m in 0..per_wave {
            for (j, &c) in d.cells().iter().enumerate() {
                a[(i * per_wave + m, j)] = kernel[m * cols + j] * total.values[c];
            }
        }
        y.extend_from_slice(&data.data[i]);
    }
    Ok((LinearizedOperator::from_matrix(&a), y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformGrid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_lap(n: usize) -> LaplacianOperator {
        // n isolated cells in a row on a unit mesh: weight 1
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [2 * n, 1, 1]).unwrap();
        let cells: Vec<usize> = (0..n).map(|i| 2 * i).collect();
        LaplacianOperator::new(&SubdomainMask::from_cells(g, &cells).unwrap())
    }

    #[test]
    fn complementarity_examples() {
        assert_eq!(complementarity_residual(&[0.0, 0.0], &[0.3, -1.0], 50.0), 0.0);
        assert_eq!(complementarity_residual(&[0.7], &[1.0], 50.0), 0.0);
        assert_eq!(complementarity_residual(&[1.0], &[0.0], 50.0), 1.0);
    }

    #[test]
    fn laplacian_single_cell_and_zero() {
        let g = UniformGrid::new(Dim::Three, [0.0; 3], 0.1, [3, 3, 3]).unwrap();
        let lap = LaplacianOperator::new(&SubdomainMask::from_cells(g, &[13]).unwrap());
        let v = lap.apply(&[2.0]);
        assert!((v[0] - 6.0 * 2.0 / 0.01).abs() < 1e-9);
        let full = LaplacianOperator::new(&SubdomainMask::full(g));
        assert!(full.apply(&[0.0; 27]).iter().all(|&x| x == 0.0));
        let dense = full.to_dense();
        assert_eq!(dense.clone(), dense.transpose());
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        let g = UniformGrid::new(Dim::Two, [0.0; 3], 0.02, [9, 7, 1]).unwrap();
        let cells: Vec<usize> = (0..g.len()).filter(|i| i % 5 != 0).collect();
        let lap = LaplacianOperator::new(&SubdomainMask::from_cells(g, &cells).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let eta: Vec<f64> = (0..lap.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            assert!(lap.quadratic_form(&eta) >= 0.0);
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DMatrix::from_fn(8, 5, |_, _| Complex64::new(rng.random(), rng.random()));
        let op = LinearizedOperator::from_matrix(&a);
        let y = vec![Complex64::new(0.0, 0.0); 8];
        let res = ssn_solve(&op, &y, &unit_lap(5), &MixedRegConfig::with_weights(0.1, 0.0), None, None)
            .unwrap();
        assert!(res.eta().iter().all(|&e| e == 0.0));
        assert!(res.diagnostics.converged);
        assert!(res.diagnostics.iterations <= 2);
    }

    #[test]
    fn soft_threshold_on_identity() {
        let n = 6;
        let a = DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let op = LinearizedOperator::from_matrix(&a);
        let yr = [2.0, -0.3, 0.05, -1.7, 0.5, 0.49];
        let y: Vec<Complex64> = yr.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let alpha = 0.5;
        let res = ssn_solve(&op, &y, &unit_lap(n), &MixedRegConfig::with_weights(alpha, 0.0), None, None)
            .unwrap();
        for (e, v) in res.eta().iter().zip(yr) {
            let expect = v.signum() * (v.abs() - alpha).max(0.0);
            assert!((e - expect).abs() < 1e-12, "{e} vs {expect}");
        }
    }

    #[test]
    fn least_squares_without_penalties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(12, 4, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let y: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let op = LinearizedOperator::from_matrix(&a);
        let res = ssn_solve(&op, &y, &unit_lap(4), &MixedRegConfig::with_weights(0.0, 0.0), None, None)
            .unwrap();
        // normal equations on the real form
        let n = op.normal_matrix();
        let g = DVector::from_vec(op.adjoint_re(&y));
        let ls = n.lu().solve(&g).unwrap();
        for (e, l) in res.eta().iter().zip(ls.iter()) {
            assert!((e - l).abs() <= 1e-8 * l.abs().max(1.0));
        }
    }

    #[test]
    fn objective_at_zero_is_half_data_norm() {
        let a = DMatrix::from_element(3, 2, Complex64::new(1.0, 1.0));
        let op = LinearizedOperator::from_matrix(&a);
        let y = vec![Complex64::new(1.0, 2.0); 3];
        let j = objective(&op, &y, &unit_lap(2), 1.0, 1.0, &[0.0, 0.0]);
        assert_eq!(j, 0.5 * 15.0);
    }

    #[test]
    fn rejects_bad_config() {
        let op = LinearizedOperator::from_matrix(&DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
        let y = vec![Complex64::new(1.0, 0.0)];
        let mut cfg = MixedRegConfig::with_weights(-1.0, 0.0);
        assert!(ssn_solve(&op, &y, &unit_lap(1), &cfg, None, None).is_err());
        cfg.alpha = 1.0;
        cfg.c = 0.0;
        assert!(ssn_solve(&op, &y, &unit_lap(1), &cfg, None, None).is_err());
    }

    proptest! {
        #[test]
        fn complementarity_zero_iff_subdifferential(
            eta in prop_oneof![Just(0.0), -3.0f64..3.0],
            lambda in prop_oneof![Just(1.0), Just(-1.0), -1.5f64..1.5],
            c in 0.1f64..100.0,
        ) {
            let r = complementarity_residual(&[eta], &[lambda], c);
            let inclusion = if eta > 0.0 {
                lambda == 1.0
            } else if eta < 0.0 {
                lambda == -1.0
            } else {
                lambda.abs() <= 1.0
            };
            prop_assert_eq!(r == 0.0, inclusion);
        }
    }
}
