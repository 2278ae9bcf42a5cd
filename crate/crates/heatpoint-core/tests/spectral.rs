mod common;

use common::*;
use heatpoint_core::spectral::*;
use heatpoint_core::{AnchorPoint, Error};
use rug::Float;
use std::f64::consts::{PI, SQRT_2};

fn x03() -> AnchorPoint {
    AnchorPoint::rational(3, 10).unwrap()
}

fn half() -> AnchorPoint {
    AnchorPoint::rational(1, 2).unwrap()
}

#[test]
fn overlap_interval_quarter_width_against_quadrature() {
    let q = adaptive_simpson(&|x| (PI * x).sin(), 0.25, 0.75, 1e-14);
    let v = overlap_interval(1, &half(), 0.25, 256).unwrap().to_f64();
    assert!(rel(v, q) < 1e-12);
    assert!(rel(v, SQRT_2 / PI) < 1e-15);
}

#[test]
fn overlap_product_against_quadrature() {
    let q = adaptive_simpson(&|x| (PI * x).sin() * (3.0 * PI * x).sin(), 0.2, 0.4, 1e-15);
    let v = overlap_product(1, 3, &x03(), 0.1, 256).unwrap().to_f64();
    assert!((v - q).abs() < 1e-12, "{v} vs {q}");
}

#[test]
fn overlap_grid_against_quadrature() {
    let centers = [(3u64, 10u64), (1, 3), (5, 7), (2, 9)];
    let widths = [0.05, 0.1, 0.01];
    for &(p, q) in &centers {
        let x0 = AnchorPoint::rational(p, q).unwrap();
        let c = p as f64 / q as f64;
        for &eps in &widths {
            for &(m, n) in &[(1u64, 1u64), (2, 7), (13, 13), (21, 50), (50, 49)] {
                let f = |x: f64| (m as f64 * PI * x).sin() * (n as f64 * PI * x).sin();
                let oracle = integrate(&f, c - eps, c + eps, 64, 1e-16);
                let v = overlap_product(m, n, &x0, eps, 256).unwrap().to_f64();
                let scale = oracle.abs().max(1e-3 * eps);
                assert!((v - oracle).abs() <= 1e-10 * scale, "W({m},{n}) at {c}±{eps}: {v} vs {oracle}");
            }
            for n in [1u64, 4, 17, 50] {
                let f = |x: f64| (n as f64 * PI * x).sin();
                let oracle = integrate(&f, c - eps, c + eps, 64, 1e-16);
                let v = overlap_interval(n, &x0, eps, 256).unwrap().to_f64();
                assert!((v - oracle).abs() <= 1e-10 * oracle.abs().max(1e-3 * eps), "n={n}: {v} vs {oracle}");
            }
        }
    }
}

#[test]
fn overlap_rejects_interval_leaving_domain() {
    assert!(matches!(overlap_interval(1, &x03(), 0.31, 128), Err(Error::InvalidInterval { .. })));
    assert!(matches!(overlap_product(1, 2, &x03(), 0.0, 128), Err(Error::InvalidInterval { .. })));
}

#[test]
fn free_evolution_against_finite_differences() {
    // μ = (1), t = 1 and μ = (0, 1), t = 0.1
    for (k, t) in [(1u64, 1.0), (2, 0.1)] {
        let state = FourierState::mode(k as usize, k as usize, 256).unwrap();
        let exact = evolve_free(&state, t).unwrap().coeffs()[k as usize - 1].to_f64();
        let nx = 400;
        let u = crank_nicolson(&|x| phi(k, x), &vec![0.0; nx - 1], &|_| 0.0, t, nx, 4000);
        let fd = project(&u, k as usize)[k as usize - 1];
        assert!(rel(exact, fd) < 2e-3, "mode {k}: {exact} vs {fd}");
        assert!(rel(exact, (-((k * k) as f64) * PI * PI * t).exp()) < 1e-14);
    }
}

#[test]
fn dirac_forcing_closed_form_against_quadrature() {
    let t = 1.0;
    let state = FourierState::from_f64(&[1.0], 256).unwrap();
    let ctrl = ScalarControl::new(
        SpatialProfile::dirac(half()),
        Signal::ExpSum { coeffs: vec![Float::with_val(256, 1)], orientation: Orientation::Backward },
        t,
    )
    .unwrap();
    let out = evolve_forced(&state, &ctrl, t).unwrap().state.coeffs()[0].to_f64();
    let l = PI * PI;
    let integral = adaptive_simpson(&|s| (-l * (t - s)).exp() * (-l * (t - s)).exp(), 0.0, t, 1e-15);
    let oracle = (-l).exp() + SQRT_2 * integral;
    assert!(rel(out, oracle) < 1e-12, "{out} vs {oracle}");
}

#[test]
fn forward_orientation_against_quadrature() {
    let t = 0.3;
    let state = FourierState::from_f64(&[0.2, -0.4, 0.1], 256).unwrap();
    let a = [1.5, -0.7];
    let ctrl = ScalarControl::new(
        SpatialProfile::interval(x03(), 0.1).unwrap(),
        Signal::ExpSum { coeffs: a.iter().map(|&v| Float::with_val(256, v)).collect(), orientation: Orientation::Forward },
        t,
    )
    .unwrap();
    let out = evolve_forced(&state, &ctrl, t).unwrap().state.to_f64();
    for n in 1..=3u64 {
        let ln = (n * n) as f64 * PI * PI;
        let f = |s: f64| a[0] * (-PI * PI * s).exp() + a[1] * (-4.0 * PI * PI * s).exp();
        let b = integrate(&|x| phi(n, x), 0.2, 0.4, 8, 1e-16);
        let integral = adaptive_simpson(&|s| (-ln * (t - s)).exp() * f(s), 0.0, t, 1e-15);
        let oracle = state.to_f64()[n as usize - 1] * (-ln * t).exp() + b * integral;
        assert!((out[n as usize - 1] - oracle).abs() < 1e-12, "mode {n}: {} vs {oracle}", out[n as usize - 1]);
    }
}

#[test]
fn interval_forcing_against_finite_differences() {
    let t = 0.2;
    let nx = 500;
    let h = 1.0 / nx as f64;
    let profile: Vec<f64> = (1..nx).map(|i| if ((i as f64 * h) - 0.3).abs() < 0.1 - 1e-9 { 1.0 } else { 0.0 }).collect();
    let g = |s: f64| (-PI * PI * (t - s)).exp();
    let u = crank_nicolson(&|x| phi(1, x), &profile, &g, t, nx, 4000);
    let fd = project(&u, 3);
    let state = FourierState::from_f64(&[1.0, 0.0, 0.0], 256).unwrap();
    let ctrl = ScalarControl::new(
        SpatialProfile::interval(x03(), 0.1).unwrap(),
        Signal::ExpSum { coeffs: vec![Float::with_val(256, 1)], orientation: Orientation::Backward },
        t,
    )
    .unwrap();
    let out = evolve_forced(&state, &ctrl, t).unwrap().state.to_f64();
    for k in 0..3 {
        assert!((out[k] - fd[k]).abs() < 5e-3, "mode {}: {} vs {}", k + 1, out[k], fd[k]);
    }
}

#[test]
fn sampled_signal_matches_closed_form() {
    let t = 0.5;
    let state = FourierState::from_f64(&[1.0, 0.5, -0.25, 0.1], 256).unwrap();
    let profile = SpatialProfile::dirac(AnchorPoint::sqrt2_minus_1());
    let coeffs = vec![Float::with_val(256, 0.3), Float::with_val(256, -0.2)];
    let exp = ScalarControl::new(profile.clone(), Signal::ExpSum { coeffs, orientation: Orientation::Backward }, t).unwrap();
    let samples = exp.sample(4001, 256).unwrap().into_iter().map(|(_, v)| v).collect();
    let sampled = ScalarControl::new(profile, Signal::Sampled { values: samples }, t).unwrap();
    let a = evolve_forced(&state, &exp, t).unwrap();
    let b = evolve_forced(&state, &sampled, t).unwrap();
    assert_eq!(b.quadrature_steps, Some(4000));
    assert!(!b.accuracy_warning);
    for (x, y) in a.state.to_f64().iter().zip(b.state.to_f64()) {
        assert!((x - y).abs() < 1e-10);
    }
    assert!(rel(exp.l2_norm, sampled.l2_norm) < 1e-10);
}

#[test]
fn coarse_sampling_sets_warning() {
    let state = FourierState::from_f64(&[1.0; 10], 128).unwrap();
    let ctrl = ScalarControl::new(SpatialProfile::dirac(x03()), Signal::Sampled { values: vec![1.0; 11] }, 1.0).unwrap();
    assert!(evolve_forced(&state, &ctrl, 1.0).unwrap().accuracy_warning);
}

#[test]
fn zero_control_is_free_evolution() {
    let state = FourierState::from_f64(&[0.3, -1.0, 2.0], 256).unwrap();
    let ctrl = ScalarControl::zero(SpatialProfile::interval(x03(), 0.1).unwrap(), 0.7, 256).unwrap();
    let forced = evolve_forced(&state, &ctrl, 0.7).unwrap().state;
    assert_eq!(forced, evolve_free(&state, 0.7).unwrap());
}

#[test]
fn expsum_norm_against_quadrature() {
    let t = 0.4;
    let a = [2.0, -1.0, 0.5];
    let f = |s: f64| (0..3).map(|k| a[k] * (-(((k + 1) * (k + 1)) as f64) * PI * PI * (t - s)).exp()).sum::<f64>();
    let oracle = adaptive_simpson(&|s| f(s) * f(s), 0.0, t, 1e-15);
    let coeffs: Vec<Float> = a.iter().map(|&v| Float::with_val(256, v)).collect();
    let point = ScalarControl::new(
        SpatialProfile::dirac(x03()),
        Signal::ExpSum { coeffs: coeffs.clone(), orientation: Orientation::Backward },
        t,
    )
    .unwrap();
    assert!(rel(point.l2_norm, oracle.sqrt()) < 1e-10);
    let interval = ScalarControl::new(
        SpatialProfile::interval(x03(), 0.1).unwrap(),
        Signal::ExpSum { coeffs, orientation: Orientation::Backward },
        t,
    )
    .unwrap();
    assert!(rel(interval.l2_norm, (0.2 * oracle).sqrt()) < 1e-10);
}

#[test]
fn observation_quadratic_against_quadrature() {
    let state = FourierState::from_f64(&[1.0], 256).unwrap();
    let l = PI * PI;
    let point = observation_quadratic(&state, 1.0, &SpatialProfile::dirac(half())).unwrap().to_f64();
    let oracle = adaptive_simpson(&|t| 2.0 * (-2.0 * l * t).exp(), 0.0, 1.0, 1e-15);
    assert!(rel(point, oracle) < 1e-12);
    assert!(rel(point, 2.0 * (1.0 - (-2.0 * l).exp()) / (2.0 * l)) < 1e-14);

    let interval = observation_quadratic(&state, 1.0, &SpatialProfile::interval(x03(), 0.1).unwrap()).unwrap().to_f64();
    let space = adaptive_simpson(&|x| phi(1, x).powi(2), 0.2, 0.4, 1e-15);
    let time = adaptive_simpson(&|t| (-2.0 * l * t).exp(), 0.0, 1.0, 1e-15);
    assert!(rel(interval, space * time) < 1e-11);

    let resonant = FourierState::from_f64(&[0.0, 1.0], 256).unwrap();
    assert!(observation_quadratic(&resonant, 2.0, &SpatialProfile::dirac(half())).unwrap().is_zero());
}

#[test]
fn observation_quadratic_matches_space_time_integral() {
    let state = FourierState::from_f64(&[0.7, -0.3, 0.2], 256).unwrap();
    let t_end = 0.05;
    let u = |t: f64, x: f64| (1..=3u64).map(|n| state.to_f64()[n as usize - 1] * (-((n * n) as f64) * PI * PI * t).exp() * phi(n, x)).sum::<f64>();
    let inner = |t: f64| adaptive_simpson(&|x| u(t, x).powi(2), 0.2, 0.4, 1e-14);
    let oracle = adaptive_simpson(&inner, 0.0, t_end, 1e-13);
    let v = observation_quadratic(&state, t_end, &SpatialProfile::interval(x03(), 0.1).unwrap()).unwrap().to_f64();
    assert!(rel(v, oracle) < 1e-9, "{v} vs {oracle}");
}

#[test]
fn state_norm_against_reconstruction() {
    let state = FourierState::from_f64(&[0.5, -1.25, 0.75, 2.0], 128).unwrap();
    let oracle = adaptive_simpson(&|x| state.eval(x).powi(2), 0.0, 1.0, 1e-14);
    assert!(rel(state.norm().to_f64().powi(2), oracle) < 1e-12);
}

#[test]
fn negative_time_is_rejected() {
    let state = FourierState::from_f64(&[1.0], 64).unwrap();
    assert!(matches!(evolve_free(&state, -0.1), Err(Error::NegativeTime(_))));
}
