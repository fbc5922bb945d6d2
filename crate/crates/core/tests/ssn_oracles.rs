//! Semi-smooth Newton solver against closed-form and brute-force minimizers.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use scatter_core::inversion::{smooth_gradient, stationarity_residual};
use scatter_core::{
    complementarity_residual, objective, ssn_solve, Complex64, Dim, LaplacianOperator,
    LinearizedOperator, MixedRegConfig, SsnResult, SubdomainMask, UniformGrid,
};

fn cnormal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `n` isolated cells on a unit mesh, so the Laplacian is diagonal and the weight is 1.
fn isolated(n: usize) -> LaplacianOperator {
    let g = UniformGrid::new(Dim::Two, [0.0; 3], 1.0, [2 * n, 1, 1]).unwrap();
    let cells: Vec<usize> = (0..n).map(|i| 2 * i).collect();
    LaplacianOperator::new(&SubdomainMask::from_cells(g, &cells).unwrap())
}

/// `n` random cells of a 7x7 mesh of width `h`; neighbours couple through the stencil.
fn random_domain(n: usize, h: f64, rng: &mut ChaCha8Rng) -> LaplacianOperator {
    let g = UniformGrid::new(Dim::Two, [0.0; 3], h, [7, 7, 1]).unwrap();
    let mut all: Vec<usize> = (0..49).collect();
    for i in 0..n {
        let j = rng.random_range(i..49);
        all.swap(i, j);
    }
    LaplacianOperator::new(&SubdomainMask::from_cells(g, &all[..n]).unwrap())
}

fn soft(y: f64, t: f64) -> f64 {
    y.signum() * (y.abs() - t).max(0.0)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn assert_kkt(a: &LinearizedOperator, y: &[Complex64], lap: &LaplacianOperator, cfg: &MixedRegConfig, r: &SsnResult) {
    assert!(r.diagnostics.converged, "not converged: {:?}", r.diagnostics.history);
    let s = &r.state;
    assert!(complementarity_residual(&s.eta, &s.lambda, cfg.c) <= 1e-8);
    let g = a.adjoint_re(y);
    let stat = stationarity_residual(a, y, lap, cfg.alpha, cfg.beta, &s.eta, &s.lambda);
    assert!(stat <= 1e-6 * (1.0 + sup(&g)), "stationarity {stat}");
    assert!(s.lambda.iter().all(|l| l.abs() <= 1.0 + 1e-10));
    for (e, act) in s.eta.iter().zip(&s.active) {
        if *act {
            assert_eq!(*e, 0.0);
        }
    }
}

#[test]
fn diagonal_operator_is_soft_thresholding() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(1..=25);
        let a = LinearizedOperator::from_matrix(&DMatrix::identity(n, n));
        let y: Vec<Complex64> = (0..n).map(|_| cnormal(&mut rng)).collect();
        let alpha = rng.random_range(0.01..1.5);
        let lap = isolated(n);
        let cfg = MixedRegConfig::with_weights(alpha, 0.0);
        let r = ssn_solve(&a, &y, &lap, &cfg, None, None).unwrap();
        for (e, yj) in r.eta().iter().zip(&y) {
            assert!((e - soft(yj.re, alpha)).abs() <= 1e-8, "{e} vs {}", soft(yj.re, alpha));
        }
        assert_kkt(&a, &y, &lap, &cfg, &r);
    }
}

/// Projected gradient on the split problem `eta = p - q`, `p, q >= 0`.
fn split_qp(a: &LinearizedOperator, y: &[Complex64], lap: &LaplacianOperator, alpha: f64, beta: f64) -> Vec<f64> {
    let n = a.cols();
    let w = lap.cell_volume();
    let (al, be) = (alpha * w, beta * w);
    let h = &a.normal_matrix() + lap.to_dense() * be;
    let g = a.adjoint_re(y);
    // step from the largest eigenvalue of the split Hessian [[H, -H], [-H, H]]
    let lmax = h.clone().symmetric_eigenvalues().max() * 2.0;
    let step = 1.0 / lmax;
    let (mut p, mut q) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..2_000_000 {
        let eta: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a - b).collect();
        let he = &h * nalgebra::DVector::from_column_slice(&eta);
        let mut change = 0.0f64;
        for j in 0..n {
            let grad = he[j] - g[j];
            let np = (p[j] - step * (grad + al)).max(0.0);
            let nq = (q[j] - step * (-grad + al)).max(0.0);
            change = change.max((np - p[j]).abs()).max((nq - q[j]).abs());
            p[j] = np;
            q[j] = nq;
        }
        if change < 1e-15 {
            break;
        }
    }
    p.iter().zip(&q).map(|(a, b)| a - b).collect()
}

#[test]
fn dense_problems_match_split_quadratic_program() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for inst in 0..20 {
        let n = rng.random_range(4..=30);
        let m = 2 * n;
        let h = 0.5;
        let lap = random_domain(n, h, &mut rng);
        let mat = DMatrix::from_fn(m, n, |_, _| cnormal(&mut rng) / (m as f64).sqrt());
        let a = LinearizedOperator::from_matrix(&mat);
        let truth: Vec<f64> = (0..n)
            .map(|_| if rng.random::<f64>() < 0.3 { rng.random_range(-2.0..2.0) } else { 0.0 })
            .collect();
        let mut y = a.apply(&truth);
        for v in &mut y {
            *v += cnormal(&mut rng) * 0.05;
        }
        let w = lap.cell_volume();
        let alpha = rng.random_range(0.02..0.3) / w;
        let beta = rng.random_range(0.0..0.01) / w;
        let cfg = MixedRegConfig::with_weights(alpha, beta);
        let r = ssn_solve(&a, &y, &lap, &cfg, None, None).unwrap();
        let oracle = split_qp(&a, &y, &lap, alpha, beta);
        let err = r.eta().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-6, "instance {inst}: err {err}");
        assert_kkt(&a, &y, &lap, &cfg, &r);
        let f = objective(&a, &y, &lap, alpha, beta, r.eta());
        assert!(f <= objective(&a, &y, &lap, alpha, beta, &oracle) + 1e-9);
    }
}

#[test]
fn zero_data_gives_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lap = random_domain(12, 0.1, &mut rng);
    let a = LinearizedOperator::from_matrix(&DMatrix::from_fn(20, 12, |_, _| cnormal(&mut rng)));
    let cfg = MixedRegConfig::with_weights(1e-3, 1e-5);
    let r = ssn_solve(&a, &vec![Complex64::new(0.0, 0.0); 20], &lap, &cfg, None, None).unwrap();
    assert!(r.eta().iter().all(|&e| e == 0.0));
    assert!(r.diagnostics.iterations <= 2);
}

#[test]
fn least_squares_without_penalties() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, n) = (40, 15);
    let mat = DMatrix::from_fn(m, n, |_, _| cnormal(&mut rng));
    let a = LinearizedOperator::from_matrix(&mat);
    let y: Vec<Complex64> = (0..m).map(|_| cnormal(&mut rng)).collect();
    let lap = random_domain(n, 0.2, &mut rng);
    let r = ssn_solve(&a, &y, &lap, &MixedRegConfig::with_weights(0.0, 0.0), None, None).unwrap();
    // real least squares on the stacked system [Re A; Im A] x = [Re y; Im y]
    let b = DMatrix::from_fn(2 * m, n, |i, j| if i < m { mat[(i, j)].re } else { mat[(i - m, j)].im });
    let rhs = nalgebra::DVector::from_fn(2 * m, |i, _| if i < m { y[i].re } else { y[i - m].im });
    let x = b.svd(true, true).solve(&rhs, 1e-14).unwrap();
    for (e, o) in r.eta().iter().zip(x.iter()) {
        assert!((e - o).abs() <= 1e-8 * o.abs().max(1.0));
    }
}

#[test]
fn smooth_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 10;
    let lap = random_domain(n, 0.3, &mut rng);
    let a = LinearizedOperator::from_matrix(&DMatrix::from_fn(16, n, |_, _| cnormal(&mut rng)));
    let y: Vec<Complex64> = (0..16).map(|_| cnormal(&mut rng)).collect();
    let beta = 0.7;
    for _ in 0..10 {
        let eta: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let grad = smooth_gradient(&a, &y, &lap, beta, &eta);
        let scale = sup(&grad);
        for j in 0..n {
            let d = 1e-5;
            let (mut ep, mut em) = (eta.clone(), eta.clone());
            ep[j] += d;
            em[j] -= d;
            let fd = (objective(&a, &y, &lap, 0.0, beta, &ep) - objective(&a, &y, &lap, 0.0, beta, &em)) / (2.0 * d);
            assert!((fd - grad[j]).abs() <= 1e-5 * scale, "{fd} vs {}", grad[j]);
        }
    }
}
