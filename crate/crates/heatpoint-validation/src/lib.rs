//! Reference linear algebra and closed forms used by the acceptance run.
//!
//! Nothing here calls into `heatpoint-core`; the acceptance checks compare
//! the library against these.

use rug::float::Constant;
use rug::Float;

/// Inverse by Gauss–Jordan with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<Float>], bits: u32) -> Vec<Vec<Float>> {
    let n = a.len();
    let mut m: Vec<Vec<Float>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<Float> = row.iter().map(|x| Float::with_val(bits, x)).collect();
            r.extend((0..n).map(|j| Float::with_val(bits, u32::from(i == j))));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].clone().abs().partial_cmp(&m[j][col].clone().abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        let pivot_row = m[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= Float::with_val(bits, &f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// vᵀ A w.
pub fn bilinear(a: &[Vec<Float>], v: &[Float], w: &[Float], bits: u32) -> Float {
    let mut s = Float::new(bits);
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            s += Float::with_val(bits, x * &v[i]) * &w[j];
        }
    }
    s
}

/// ∫_a^b 2 sin(mπx) sin(nπx) dx from the product-to-sum identity.
pub fn overlap_2sin(m: u64, n: u64, a: &Float, b: &Float, bits: u32) -> Float {
    let pi = Float::with_val(bits, Constant::Pi);
    let prim = |k: u64, x: &Float| -> Float {
        if k == 0 {
            return x.clone();
        }
        let kp = Float::with_val(bits, &pi * k);
        Float::with_val(bits, Float::with_val(bits, &kp * x).sin() / &kp)
    };
    let part = |k: u64| Float::with_val(bits, prim(k, b) - prim(k, a));
    part(m.abs_diff(n)) - part(m + n)
}

/// (1 − e^{−(m²+n²)π²T})/((m²+n²)π²).
pub fn decay_factor(m: u64, n: u64, t: f64, bits: u32) -> Float {
    let x = Float::with_val(bits, Constant::Pi).square() * (m * m + n * n);
    let e = -Float::with_val(bits, Float::with_val(bits, -Float::with_val(bits, &x * t)).exp_m1());
    e / x
}

/// Initial-state Gramian with the given spatial weights W.
pub fn gramian(w: impl Fn(u64, u64) -> Float, t: f64, n: usize, bits: u32) -> Vec<Vec<Float>> {
    (1..=n as u64).map(|i| (1..=n as u64).map(|j| w(i, j) * decay_factor(i, j, t, bits)).collect()).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
