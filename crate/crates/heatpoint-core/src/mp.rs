//! Small multiprecision helpers shared by the numerical modules.

use rug::float::Constant;
use rug::{Float, Integer, Rational};

/// Default working precision in bits.
pub const DEFAULT_BITS: u32 = 256;

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

pub fn real(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

pub fn zero(bits: u32) -> Float {
    Float::new(bits)
}

pub fn from_rational(bits: u32, r: &Rational) -> Float {
    Float::with_val(bits, r)
}

pub fn from_integer(bits: u32, z: &Integer) -> Float {
    Float::with_val(bits, z)
}

/// Exact rational value of a finite f64.
pub fn f64_to_rational(x: f64) -> Rational {
    Rational::from_f64(x).expect("finite f64")
}

/// n²π².
pub fn lambda(n: usize, bits: u32) -> Float {
    let mut l = pi(bits);
    l.square_mut();
    l * (n as u64 * n as u64)
}

/// (u - sin u) / u, accurate for small u where the direct form cancels.
pub fn one_minus_sinc(u: &Float) -> Float {
    let bits = u.prec();
    if u.is_zero() {
        return zero(bits);
    }
    if u.clone().abs() > 0.5 {
        let s = Float::with_val(bits, u.sin_ref());
        return (u.clone() - s) / u;
    }
    // u²/3! - u⁴/5! + ...
    let u2 = Float::with_val(bits, u.square_ref());
    let mut term = Float::with_val(bits, &u2 / 6u32);
    let mut sum = term.clone();
    let mut k = 2u32;
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 4));
    loop {
        term *= &u2;
        term /= (2 * k) * (2 * k + 1);
        term = -term;
        sum += &term;
        if term.clone().abs() <= Float::with_val(bits, &sum * &eps).abs() {
            break;
        }
        k += 1;
    }
    sum
}

/// sin(u)/u, with sinc(0) = 1.
pub fn sinc(u: &Float) -> Float {
    Float::with_val(u.prec(), 1) - one_minus_sinc(u)
}

/// (1 - e^{-x}) / x for x > 0, computed through expm1.
pub fn decay_integral(x: &Float) -> Float {
    let bits = x.prec();
    let neg = Float::with_val(bits, -x);
    let em1 = neg.exp_m1();
    -em1 / x
}

/// (e^{x} - 1) / x for x > 0.
pub fn growth_integral(x: &Float) -> Float {
    let e = x.clone().exp_m1();
    e / x
}

/// Fixed-order pairwise summation. The reduction tree depends only on the
/// length, so results are bit-stable across runs and thread counts.
pub fn pairwise_sum(terms: &[Float], bits: u32) -> Float {
    match terms.len() {
        0 => zero(bits),
        1 => Float::with_val(bits, &terms[0]),
        n => {
            let (l, r) = terms.split_at(n / 2);
            pairwise_sum(l, bits) + pairwise_sum(r, bits)
        }
    }
}

pub fn norm2(v: &[Float], bits: u32) -> Float {
    let sq: Vec<Float> = v.iter().map(|x| Float::with_val(bits, x.square_ref())).collect();
    pairwise_sum(&sq, bits).sqrt()
}

pub fn dot(a: &[Float], b: &[Float], bits: u32) -> Float {
    let prods: Vec<Float> = a.iter().zip(b).map(|(x, y)| Float::with_val(bits, x * y)).collect();
    pairwise_sum(&prods, bits)
}

/// Relative difference |a-b|/max(|a|,|b|), zero when both vanish.
pub fn rel_diff(a: &Float, b: &Float) -> f64 {
    let bits = a.prec().max(b.prec());
    let d = Float::with_val(bits, a - b).abs();
    let m = Float::with_val(bits, a.abs_ref()).max(&Float::with_val(bits, b.abs_ref()));
    if m.is_zero() {
        0.0
    } else {
        (d / m).to_f64()
    }
}

/// Natural log of a positive float as f64, valid far outside the f64 range.
pub fn ln_f64(x: &Float) -> f64 {
    Float::with_val(x.prec(), x.ln_ref()).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_sinc_matches_direct_form() {
        for &u in &[0.7, 0.3, 1e-3, 1e-12] {
            let x = real(512, u);
            let direct = (x.clone() - x.clone().sin()) / &x;
            let series = one_minus_sinc(&real(256, u));
            assert!(rel_diff(&series, &Float::with_val(256, &direct)) < 1e-60, "u = {u}");
        }
    }

    #[test]
    fn decay_integral_small_and_large() {
        let x = real(128, 1e-30);
        assert!((decay_integral(&x).to_f64() - 1.0).abs() < 1e-15);
        let x = real(128, 2.0);
        assert!((decay_integral(&x).to_f64() - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<Float> = (1..=17).map(|k| real(64, 1.0 / k as f64)).collect();
        assert_eq!(pairwise_sum(&v, 64), pairwise_sum(&v, 64));
        assert!((pairwise_sum(&v, 64).to_f64() - v.iter().map(|x| x.to_f64()).sum::<f64>()).abs() < 1e-14);
    }
}
