//! Dolecki's series Σ e^{−n²π²T}/|sin(nπx0)| and the minimal time T0.
//!
//! T0 is estimated through the exponents log(1/|sin(nπx0)|)/(n²π²): their
//! limsup equals T0. This characterization follows from the series test but
//! is derived, not quoted, and every report flags it as such.

use rug::{Float, Integer};
use serde::{Serialize, Serializer};

use crate::diophantine::{abs_sin_npi, AnchorPoint};
use crate::error::{Error, Result};
use crate::mp;

#[derive(Clone, Debug, PartialEq)]
pub struct DoleckiSum {
    pub sum: Float,
    pub terms: Vec<Float>,
}

/// Σ_{n≤N} e^{−n²π²T}/|sin(nπx0)|, summed pairwise in a fixed order.
pub fn dolecki_partial_sum(x0: &AnchorPoint, t: f64, n: u64, bits: u32) -> Result<DoleckiSum> {
    if !(t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("N must be >= 1"));
    }
    let tt = mp::real(bits, t);
    let terms = (1..=n)
        .map(|k| {
            let s = abs_sin_npi(k, x0, bits)?;
            if s.is_zero() {
                return Err(Error::Resonance { n: k });
            }
            let e = Float::with_val(bits, -(mp::lambda(k as usize, bits) * &tt)).exp();
            Ok(e / s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DoleckiSum { sum: mp::pairwise_sum(&terms, bits), terms })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum SeriesVerdict {
    /// A vanishing sine: the series has an infinite term for every T.
    Resonant { n: u64 },
    /// S_2N − S_N is below the tolerance relative to S_2N.
    Convergent { sum: f64, relative_tail: f64 },
    /// The tail still moves the sum; not decidable from this data.
    Unsettled { sum: f64, relative_tail: f64 },
}

/// Compare the partial sums at N and 2N.
pub fn series_test(x0: &AnchorPoint, t: f64, n: u64, tol: f64, bits: u32) -> Result<SeriesVerdict> {
    let fine = match dolecki_partial_sum(x0, t, 2 * n, bits) {
        Err(Error::Resonance { n }) => return Ok(SeriesVerdict::Resonant { n }),
        r => r?,
    };
    let coarse = mp::pairwise_sum(&fine.terms[..n as usize], bits);
    let tail = Float::with_val(bits, &fine.sum - &coarse) / &fine.sum;
    let relative_tail = tail.to_f64();
    let sum = fine.sum.to_f64();
    Ok(if relative_tail <= tol {
        SeriesVerdict::Convergent { sum, relative_tail }
    } else {
        SeriesVerdict::Unsettled { sum, relative_tail }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    SeriesTest,
    LimsupWindow,
    ExactRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimalTimeEstimate {
    #[serde(serialize_with = "ser_extended")]
    pub t0_lower: f64,
    #[serde(serialize_with = "ser_extended")]
    pub t0_upper: f64,
    pub method: EstimateMethod,
    /// Inclusive range of n the limsup is taken over.
    pub window: (u64, u64),
    /// log(1/|sin(nπx0)|)/(n²π²) for n = 1..=N_max; +∞ at resonant n.
    #[serde(rename = "exponents", serialize_with = "ser_extended_vec")]
    pub per_n_exponents: Vec<f64>,
    /// Smallest resonant n, for rational points.
    pub resonance: Option<u64>,
    /// The exponent characterization of T0 is derived from the series test.
    pub derived: bool,
}

/// Non-finite values as "+inf", "-inf" or "nan"; JSON has no literal for them.
pub fn ser_extended<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ser_extended_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Ext(f64);
    impl Serialize for Ext {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            ser_extended(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&Ext(*x))?;
    }
    seq.end()
}

/// log(1/|sin(nπx0)|)/(n²π²), +∞ when the sine vanishes.
pub fn exponent(x0: &AnchorPoint, n: u64, bits: u32) -> Result<f64> {
    let s = abs_sin_npi(n, x0, bits)?;
    if s.is_zero() {
        return Ok(f64::INFINITY);
    }
    let l = -mp::ln_f64(&s);
    Ok(l / (mp::lambda(n as usize, bits).to_f64()))
}

/// ln K with |sin(nπx0)| ≥ 2/(K n) for every n, from the minimal polynomial of
/// a quadratic x0 = (a + b√d)/c: |P(p/n)| ≥ 1/n² with P = c²x² − 2acx + a² − b²d.
fn quadratic_sine_constant(b: &Integer, d: &Integer, c: &Integer) -> f64 {
    let bits = 128;
    let root_gap = Float::with_val(bits, d).sqrt() * Float::with_val(bits, Integer::from(b.abs_ref())) * 2u32;
    let k = Float::with_val(bits, (root_gap + Float::with_val(bits, c) / 2u32) * c);
    mp::ln_f64(&k)
}

/// sup over n ≥ n0 of ln(K n/2)/(n²π²), given ln K.
fn tail_sup(ln_k: f64, n0: u64) -> f64 {
    let pi2 = std::f64::consts::PI.powi(2);
    // g(n) = ln(Kn/2)/(n²π²) peaks at ln(Kn/2) = 1/2
    let n_peak = (0.5 - ln_k + 2f64.ln()).exp();
    let n = (n0 as f64).max(n_peak);
    (ln_k + n.ln() - 2f64.ln()) / (n * n * pi2)
}

pub fn estimate_t0(x0: &AnchorPoint, n_max: u64, bits: u32) -> Result<MinimalTimeEstimate> {
    if n_max < 2 {
        return Err(Error::invalid("N_max must be >= 2"));
    }
    let window = (n_max.div_ceil(2), n_max);
    let per_n_exponents = (1..=n_max).map(|n| exponent(x0, n, bits)).collect::<Result<Vec<_>>>()?;
    if let Some(r) = x0.as_rational() {
        return Ok(MinimalTimeEstimate {
            t0_lower: f64::INFINITY,
            t0_upper: f64::INFINITY,
            method: EstimateMethod::ExactRational,
            window,
            per_n_exponents,
            resonance: r.denom().to_u64(),
            derived: true,
        });
    }
    let t0_lower = per_n_exponents[(window.0 - 1) as usize..].iter().copied().fold(0.0, f64::max);
    let t0_upper = match x0.quadratic_parts() {
        Some((_, b, d, c)) => tail_sup(quadratic_sine_constant(&b, &d, &c), window.0).max(t0_lower),
        None => f64::INFINITY,
    };
    Ok(MinimalTimeEstimate {
        t0_lower,
        t0_upper,
        method: EstimateMethod::LimsupWindow,
        window,
        per_n_exponents,
        resonance: None,
        derived: true,
    })
}

/// Largest target accepted by [`build_liouville_point`].
pub const MAX_TARGET_T0: f64 = 10.0;

/// Continued fraction [0; 2, a2, …, a_{K+1}, 1, 1, …] whose convergent
/// denominators q1..qK satisfy |sin(qk π x0)| ≈ e^{−qk²π²T0}.
///
/// With θ_{qk} ≈ 1/(qk q_{k+1}) the target asks for q_{k+1} ≈ π e^{qk²π²T0},
/// so a_{k+1} = round((π e^{qk²π²T0} − q_{k−1})/qk).
pub fn build_liouville_point(target_t0: f64, scales: usize, max_bits: u32) -> Result<AnchorPoint> {
    if !(target_t0 > 0.0 && target_t0 <= MAX_TARGET_T0) {
        return Err(Error::invalid(format!("target T0 must lie in (0, {MAX_TARGET_T0}], got {target_t0}")));
    }
    if scales == 0 {
        return Err(Error::invalid("need at least one resonant scale"));
    }
    let mut cf = vec![Integer::from(2)];
    let (mut q_prev, mut q) = (Integer::from(1), Integer::from(2));
    for _ in 0..scales {
        let q_f = q.to_f64();
        let log2_next = (q_f * q_f * std::f64::consts::PI.powi(2) * target_t0 + std::f64::consts::PI.ln())
            / std::f64::consts::LN_2;
        if !(log2_next + 64.0 <= max_bits as f64) {
            return Err(Error::precision(format!(
                "scale after q = {q} needs about {log2_next:.3e} bits, limit {max_bits}"
            )));
        }
        let w = (log2_next as u32) + 96;
        let pi = mp::pi(w);
        let expo = Float::with_val(w, Float::with_val(w, &pi * &pi) * Float::with_val(w, Integer::from(q.square_ref())))
            * mp::real(w, target_t0);
        let next = Float::with_val(w, expo.exp() * &pi);
        let ratio = (next - Float::with_val(w, &q_prev)) / Float::with_val(w, &q);
        let a = ratio.round().to_integer().expect("finite").max(Integer::from(1));
        let q_next = Integer::from(&a * &q) + &q_prev;
        cf.push(a);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    AnchorPoint::liouville(cf)
}

/// Convergent denominators q1..qK of a constructed point, excluding the last
/// built quotient's denominator.
pub fn liouville_scales(x0: &AnchorPoint) -> Option<Vec<Integer>> {
    let cf = x0.liouville_quotients()?;
    let (mut q_prev, mut q) = (Integer::from(0), Integer::from(1));
    let mut out = Vec::new();
    for a in cf {
        let next = Integer::from(a * &q) + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
        out.push(q.clone());
    }
    out.pop();
    Some(out)
}
