//! Reference computations written independently of the library code.
#![allow(dead_code)]

use rug::float::Constant;
use rug::Float;

/// Adaptive Simpson quadrature in f64.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integrate over [a, b] split into `pieces` equal panels, each adaptively.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces).map(|i| adaptive_simpson(f, a + i as f64 * h, a + (i + 1) as f64 * h, tol / pieces as f64)).sum()
}

pub fn phi(n: u64, x: f64) -> f64 {
    std::f64::consts::SQRT_2 * (n as f64 * std::f64::consts::PI * x).sin()
}

/// Crank–Nicolson for u_t = u_xx + g(t) b(x) on (0,1) with Dirichlet ends.
/// `b` gives the spatial profile on the interior nodes (a Dirac is 1/h at
/// its node). Returns interior nodal values at time T.
pub fn crank_nicolson(
    u0: &dyn Fn(f64) -> f64,
    profile: &[f64],
    g: &dyn Fn(f64) -> f64,
    t_end: f64,
    nx: usize,
    nt: usize,
) -> Vec<f64> {
    let h = 1.0 / nx as f64;
    let m = nx - 1;
    assert_eq!(profile.len(), m);
    let dt = t_end / nt as f64;
    let r = dt / (h * h);
    let mut u: Vec<f64> = (1..nx).map(|i| u0(i as f64 * h)).collect();
    // tridiagonal (1 + r) on the diagonal, −r/2 off it
    let (a, diag, c) = (-0.5 * r, 1.0 + r, -0.5 * r);
    let mut rhs = vec![0.0; m];
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for step in 0..nt {
        let t0 = step as f64 * dt;
        let gmid = 0.5 * (g(t0) + g(t0 + dt));
        for i in 0..m {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < m { u[i + 1] } else { 0.0 };
            rhs[i] = u[i] + 0.5 * r * (left - 2.0 * u[i] + right) + dt * gmid * profile[i];
        }
        cp[0] = c / diag;
        dp[0] = rhs[0] / diag;
        for i in 1..m {
            let den = diag - a * cp[i - 1];
            cp[i] = c / den;
            dp[i] = (rhs[i] - a * dp[i - 1]) / den;
        }
        u[m - 1] = dp[m - 1];
        for i in (0..m - 1).rev() {
            u[i] = dp[i] - cp[i] * u[i + 1];
        }
    }
    u
}

/// Sine coefficients of interior nodal values (trapezoid = exact DST).
pub fn project(u: &[f64], modes: usize) -> Vec<f64> {
    let nx = u.len() + 1;
    let h = 1.0 / nx as f64;
    (1..=modes as u64).map(|n| h * u.iter().enumerate().map(|(i, v)| v * phi(n, (i + 1) as f64 * h)).sum::<f64>()).collect()
}

/// sin(nπx) by brute force at very high precision, without argument reduction.
pub fn naive_sin_npi(n: u64, x: &Float, bits: u32) -> Float {
    let pi = Float::with_val(bits, Constant::Pi);
    Float::with_val(bits, Float::with_val(bits, x * &pi) * n).sin()
}

pub fn mpf(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

/// Inverse by Gauss–Jordan with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<Float>], bits: u32) -> Vec<Vec<Float>> {
    let n = a.len();
    let mut m: Vec<Vec<Float>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Float> = row.iter().map(|x| Float::with_val(bits, x)).collect();
            r.extend((0..n).map(|j| Float::with_val(bits, if i == j { 1 } else { 0 })));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].clone().abs().partial_cmp(&m[j][col].clone().abs()).unwrap()).unwrap();
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row = m[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == col {
                continue;
            }
            let f = row[col].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= Float::with_val(bits, &f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Largest eigenvalue of a symmetric positive matrix by power iteration.
pub fn power_iteration(a: &[Vec<Float>], bits: u32, iters: usize) -> Float {
    let n = a.len();
    let mut v: Vec<Float> = (0..n).map(|i| Float::with_val(bits, 1.0 + 0.1 * i as f64)).collect();
    let mut lambda = Float::new(bits);
    for _ in 0..iters {
        let w: Vec<Float> = a
            .iter()
            .map(|row| row.iter().zip(&v).fold(Float::new(bits), |acc, (x, y)| acc + Float::with_val(bits, x * y)))
            .collect();
        let norm = w.iter().fold(Float::new(bits), |acc, x| acc + Float::with_val(bits, x.square_ref())).sqrt();
        lambda = w.iter().zip(&v).fold(Float::new(bits), |acc, (x, y)| acc + Float::with_val(bits, x * y));
        v = w.into_iter().map(|x| x / &norm).collect();
    }
    lambda
}

/// ∫_a^b 2 sin(mπx) sin(nπx) dx from the product-to-sum identity.
pub fn w_exact(m: u64, n: u64, a: &Float, b: &Float, bits: u32) -> Float {
    let pi = Float::with_val(bits, Constant::Pi);
    let prim = |k: u64, x: &Float| -> Float {
        if k == 0 {
            return x.clone();
        }
        let kp = Float::with_val(bits, &pi * k);
        Float::with_val(bits, Float::with_val(bits, &kp * x).sin() / &kp)
    };
    let d = m.abs_diff(n);
    let s = m + n;
    let part = |k: u64| Float::with_val(bits, prim(k, b) - prim(k, a));
    part(d) - part(s)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
