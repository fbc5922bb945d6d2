//! Forward solver consistency checks.

use std::f64::consts::PI;

use scatter_core::grid::unit;
use scatter_core::{
    add_noise, make_receivers_circle, rasterize, scattered_field, simulate, total_field_on, 
    Complex64, Dim, ForwardSystem, IncidentWave, Primitive, RealField, ScattererSpec, SubdomainMask,
    UniformGrid,
};

const K: f64 = 2.0 * PI;

fn two_squares(h: f64) -> RealField {
    let grid = UniformGrid::covering(Dim::Two, [-1.0, -1.0, 0.0], [1.0, 1.0, 0.0], h).unwrap();
    let spec = ScattererSpec {
        primitives: vec![
            Primitive::Box { center: [-0.8, -0.7, 0.0], widths: [0.2, 0.2, 0.0], value: 1.0 },
            Primitive::Box { center: [0.3, 0.9, 0.0], widths: [0.2, 0.2, 0.0], value: 1.0 },
        ],
    };
    rasterize(&spec, &grid).unwrap()
}

fn diagonal_wave() -> IncidentWave {
    IncidentWave::new(K, unit([1.0, 1.0, 0.0])).unwrap()
}

#[test]
fn zero_contrast_scatters_nothing() {
    let eta = RealField::zeros(UniformGrid::new(Dim::Two, [-1.0, -1.0, 0.0], 0.05, [40, 40, 1]).unwrap());
    let rec = make_receivers_circle([0.0; 3], 5.0, 30);
    let m = simulate(&eta, &[diagonal_wave()], &rec).unwrap();
    assert!(m.data[0].iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn current_equals_contrast_times_total_field() {
    let eta = two_squares(0.01);
    let wave = diagonal_wave();
    let system = ForwardSystem::new(&eta, K).unwrap();
    let current = system.solve(&wave).unwrap();
    let mask = SubdomainMask::from_cells(eta.grid, system.support()).unwrap();
    let total = total_field_on(&mask, &current, &wave).unwrap();
    let scale = current.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for &c in system.support() {
        let diff = (current.values[c] - total.values[c] * eta.values[c]).norm();
        assert!(diff <= 1e-8 * scale, "cell {c}: {diff}");
    }
}

#[test]
fn current_is_linear_in_the_incident_field() {
    let eta = two_squares(0.02);
    let system = ForwardSystem::new(&eta, K).unwrap();
    let w1 = diagonal_wave();
    let w2 = IncidentWave::new(K, unit([1.0, -1.0, 0.0])).unwrap();
    let i1 = system.solve_support(&w1).unwrap();
    let i2 = system.solve_support(&w2).unwrap();
    // M (2 i1 - 3 i2) = 2 f1 - 3 f2
    let x: Vec<Complex64> = i1.iter().zip(&i2).map(|(a, b)| a * 2.0 - b * 3.0).collect();
    let f: Vec<Complex64> = system.rhs(&w1).iter().zip(system.rhs(&w2)).map(|(a, b)| a * 2.0 - b * 3.0).collect();
    let mx = system.matrix() * nalgebra::DVector::from_column_slice(&x);
    let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in mx.iter().zip(&f) {
        assert!((a - b).norm() <= 1e-10 * scale);
    }
}

#[test]
fn scattered_field_converges_under_refinement() {
    let rec = make_receivers_circle([0.0; 3], 5.0, 30);
    let wave = diagonal_wave();
    let coarse = simulate(&two_squares(0.01), &[wave], &rec).unwrap();
    let fine = simulate(&two_squares(0.005), &[wave], &rec).unwrap();
    let max_fine = fine.data[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = coarse.data[0].iter().zip(&fine.data[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff / max_fine <= 0.02, "relative difference {}", diff / max_fine);
}

#[test]
fn receivers_inside_the_scatterer_are_rejected() {
    let eta = two_squares(0.02);
    let current = ForwardSystem::new(&eta, K).unwrap().solve(&diagonal_wave()).unwrap();
    let rec = make_receivers_circle([-0.8, -0.7, 0.0], 0.01, 4);
    assert!(scattered_field(&current, &rec, K).is_err());
}

#[test]
fn noise_has_rayleigh_mean() {
    let eta = two_squares(0.02);
    let rec = make_receivers_circle([0.0; 3], 5.0, 30);
    let exact = simulate(&eta, &[diagonal_wave()], &rec).unwrap();
    let max = exact.data[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = 0.2;
    let mut inside = 0;
    for seed in 0..200 {
        let noisy = add_noise(&exact, eps, seed).unwrap();
        let mean: f64 = noisy.data[0].iter().zip(&exact.data[0]).map(|(a, b)| (a - b).norm()).sum::<f64>()
            / (30.0 * eps * max);
        if (0.9..=1.6).contains(&mean) {
            inside += 1;
        }
    }
    assert!(inside >= 198, "{inside} of 200 seeds in range");
    let a = add_noise(&exact, eps, 7).unwrap();
    let b = add_noise(&exact, eps, 7).unwrap();
    assert_eq!(a, b);
}

#[test]
fn complex_amplitude_scales_current_and_field() {
    let eta = two_squares(0.02);
    let system = ForwardSystem::new(&eta, K).unwrap();
    let wave = diagonal_wave();
    let s = Complex64::new(-1.7, 0.4);
    let current = system.solve(&wave).unwrap();
    let scaled_rhs: Vec<Complex64> = system.rhs(&wave).iter().map(|f| f * s).collect();
    let x: Vec<Complex64> = system.support().iter().map(|&c| current.values[c] * s).collect();
    let mx = system.matrix() * nalgebra::DVector::from_column_slice(&x);
    let scale = scaled_rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in mx.iter().zip(&scaled_rhs) {
        assert!((a - b).norm() <= 1e-12 * scale);
    }
    let rec = make_receivers_circle([0.0; 3], 5.0, 30);
    let us = scattered_field(&current, &rec, K).unwrap();
    let mut scaled = current.clone();
    scaled.values.iter_mut().for_each(|v| *v *= s);
    let us_scaled = scattered_field(&scaled, &rec, K).unwrap();
    for (a, b) in us.iter().zip(&us_scaled) {
        assert!((a * s - b).norm() <= 1e-12 * b.norm().max(1e-3));
    }
}

#[test]
fn current_vanishes_off_the_support() {
    let eta = two_squares(0.02);
    let current = ForwardSystem::new(&eta, K).unwrap().solve(&diagonal_wave()).unwrap();
    for (v, e) in current.values.iter().zip(&eta.values) {
        if *e == 0.0 {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
    }
}
