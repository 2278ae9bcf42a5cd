//! Anchor points x0 and their rational approximation data.
//!
//! Every trigonometric quantity sin(nπx0) is computed after an exact argument
//! reduction n·x0 = p + r with |r| ≤ 1/2, so large n never loses digits.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp;

/// Relative bits that must be certified before a decimal-derived quantity is
/// returned.
pub const CERTIFIED_BITS: u32 = 53;

/// The point x0 ∈ (0,1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnchorSpec", into = "AnchorSpec")]
pub struct AnchorPoint(Variant);

#[derive(Clone, Debug, PartialEq)]
enum Variant {
    Rational(Rational),
    Quadratic(Quad),
    Decimal { digits: String, bits: u32, mid: Rational, rad: Rational },
    Liouville { cf: Vec<Integer>, quad: Quad },
}

/// (a + b√d)/c with c > 0 and d > 1 not a perfect square.
#[derive(Clone, Debug, PartialEq)]
struct Quad {
    a: Integer,
    b: Integer,
    d: Integer,
    c: Integer,
}

impl AnchorPoint {
    pub fn rational(p: impl Into<Integer>, q: impl Into<Integer>) -> Result<Self> {
        let (p, q) = (p.into(), q.into());
        if q == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        let r = Rational::from((p, q));
        if r <= 0 || r >= 1 {
            return Err(Error::invalid(format!("rational anchor {r} not in (0,1)")));
        }
        Ok(AnchorPoint(Variant::Rational(r)))
    }

    /// (a + b√d)/c.
    pub fn quadratic(
        a: impl Into<Integer>,
        b: impl Into<Integer>,
        d: impl Into<Integer>,
        c: impl Into<Integer>,
    ) -> Result<Self> {
        let (mut a, mut b, d, mut c) = (a.into(), b.into(), d.into(), c.into());
        if d <= 1 || d.is_perfect_square() {
            return Err(Error::invalid(format!("d = {d} must be a non-square integer > 1")));
        }
        if !is_squarefree(&d) {
            return Err(Error::invalid(format!("d = {d} is not square-free")));
        }
        if b == 0 || c == 0 {
            return Err(Error::invalid("quadratic anchor needs b != 0 and c != 0"));
        }
        if c < 0 {
            a = -a;
            b = -b;
            c = -c;
        }
        let q = Quad { a, b, d, c };
        if q.floor() != 0 {
            return Err(Error::invalid("quadratic anchor not in (0,1)"));
        }
        Ok(AnchorPoint(Variant::Quadratic(q.normalized())))
    }

    /// √2 − 1, the running irrational example.
    pub fn sqrt2_minus_1() -> Self {
        Self::quadratic(-1, 1, 2, 1).expect("valid")
    }

    /// Decimal string "0.ddd…" trusted to ½ unit in the last digit and to
    /// 2^-bits, whichever is coarser.
    pub fn decimal(digits: &str, bits: u32) -> Result<Self> {
        let frac = digits
            .strip_prefix("0.")
            .filter(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| Error::invalid(format!("decimal anchor must look like 0.ddd, got {digits:?}")))?;
        if bits < 16 {
            return Err(Error::invalid("decimal anchor needs at least 16 bits"));
        }
        let num = Integer::from_str_radix(frac, 10).expect("digits checked");
        let scale = Integer::from(10).pow(frac.len() as u32);
        let mid = Rational::from((num, scale.clone()));
        if mid <= 0 {
            return Err(Error::invalid("decimal anchor not in (0,1)"));
        }
        let half_ulp = Rational::from((Integer::from(1), scale * 2u32));
        let bin = Rational::from((Integer::from(1), Integer::from(1) << bits));
        let rad = if half_ulp > bin { half_ulp } else { bin };
        Ok(AnchorPoint(Variant::Decimal { digits: digits.to_string(), bits, mid, rad }))
    }

    /// [0; a1, …, aK, 1, 1, 1, …]. The golden tail keeps the point irrational
    /// and exactly representable in Q(√5).
    pub fn liouville(cf: Vec<Integer>) -> Result<Self> {
        if cf.iter().any(|a| *a < 1) {
            return Err(Error::invalid("continued-fraction quotients must be >= 1"));
        }
        let quad = golden_tail_value(&cf);
        Ok(AnchorPoint(Variant::Liouville { cf, quad }))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.0, Variant::Rational(_))
    }

    /// Exact value when rational.
    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.0 {
            Variant::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Partial quotients a1..aK of a constructed point.
    pub fn liouville_quotients(&self) -> Option<&[Integer]> {
        match &self.0 {
            Variant::Liouville { cf, .. } => Some(cf),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.0 {
            Variant::Rational(_) => "rational",
            Variant::Quadratic(_) => "quadratic",
            Variant::Decimal { .. } => "decimal",
            Variant::Liouville { .. } => "liouville",
        }
    }

    /// Exact (a, b, d, c) for quadratic and constructed points.
    pub(crate) fn quadratic_parts(&self) -> Option<(Integer, Integer, Integer, Integer)> {
        match &self.0 {
            Variant::Quadratic(q) | Variant::Liouville { quad: q, .. } => {
                Some((q.a.clone(), q.b.clone(), q.d.clone(), q.c.clone()))
            }
            _ => None,
        }
    }

    pub fn value(&self, bits: u32) -> Float {
        match &self.0 {
            Variant::Rational(r) => mp::from_rational(bits, r),
            Variant::Quadratic(q) | Variant::Liouville { quad: q, .. } => q.to_float(bits),
            Variant::Decimal { mid, .. } => mp::from_rational(bits, mid),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value(128).to_f64()
    }

    /// Certified enclosure [lo, hi] of x0 (degenerate for exact variants).
    pub fn enclosure(&self, bits: u32) -> (Float, Float) {
        match &self.0 {
            Variant::Decimal { mid, rad, .. } => {
                let lo = Float::with_val(bits, Rational::from(mid - rad));
                let hi = Float::with_val(bits, Rational::from(mid + rad));
                (lo, hi)
            }
            _ => {
                let v = self.value(bits + 32);
                let ulp = Float::with_val(bits + 32, Float::i_exp(1, -(bits as i32)));
                (Float::with_val(bits, &v - &ulp), Float::with_val(bits, &v + &ulp))
            }
        }
    }

    /// 1 − x0 in the same representation.
    pub fn reflect(&self) -> AnchorPoint {
        match &self.0 {
            Variant::Rational(r) => AnchorPoint(Variant::Rational(Rational::from(1) - r)),
            Variant::Quadratic(q) => AnchorPoint(Variant::Quadratic(
                Quad { a: Integer::from(&q.c - &q.a), b: Integer::from(-&q.b), d: q.d.clone(), c: q.c.clone() }
                    .normalized(),
            )),
            Variant::Decimal { digits, bits, .. } => {
                let frac = &digits[2..];
                let k = frac.len();
                let num = Integer::from_str_radix(frac, 10).expect("validated");
                let comp = Integer::from(10).pow(k as u32) - num;
                let s = format!("0.{:0>width$}", comp.to_string(), width = k);
                AnchorPoint::decimal(&s, *bits).expect("reflection of a valid decimal")
            }
            Variant::Liouville { cf, .. } => {
                let mut out: Vec<Integer> = Vec::with_capacity(cf.len() + 1);
                match cf.first() {
                    None => out.push(Integer::from(2)),
                    Some(a1) if *a1 > 1 => {
                        out.push(Integer::from(1));
                        out.push(Integer::from(a1 - 1u32));
                        out.extend(cf[1..].iter().cloned());
                    }
                    Some(_) => {
                        // a1 = 1: [0; 1, a2, a3, …] ↦ [0; a2 + 1, a3, …]
                        let a2 = cf.get(1).cloned().unwrap_or_else(|| Integer::from(1));
                        out.push(a2 + 1u32);
                        out.extend(cf.iter().skip(2).cloned());
                    }
                }
                AnchorPoint::liouville(out).expect("quotients stay >= 1")
            }
        }
    }

    /// Exact reduction n·x0 = p + r with p the nearest integer.
    fn reduce(&self, n: u64) -> Reduced {
        match &self.0 {
            Variant::Rational(r) => {
                let nx = Rational::from(r * n);
                let p = nearest_integer(&nx);
                let frac = Rational::from(&nx - &p);
                Reduced { p, frac: if frac == 0 { Frac::Zero } else { Frac::Rat(frac) } }
            }
            Variant::Quadratic(q) | Variant::Liouville { quad: q, .. } => {
                // p = floor((2na + c + 2nb√d) / (2c))
                let probe = Quad {
                    a: Integer::from(&q.a * n) * 2u32 + &q.c,
                    b: Integer::from(&q.b * n) * 2u32,
                    d: q.d.clone(),
                    c: Integer::from(&q.c * 2u32),
                };
                let p = probe.floor();
                let a = Integer::from(&q.a * n) - Integer::from(&p * &q.c);
                let b = Integer::from(&q.b * n);
                Reduced { p, frac: Frac::Quad(Quad { a, b, d: q.d.clone(), c: q.c.clone() }) }
            }
            Variant::Decimal { mid, rad, .. } => {
                let nx = Rational::from(mid * n);
                let p = nearest_integer(&nx);
                let frac = Rational::from(&nx - &p);
                Reduced { p, frac: Frac::Interval { mid: frac, rad: Rational::from(rad * n) } }
            }
        }
    }

    /// dist(n·x0, ℤ) = n·θn.
    pub fn dist_nx(&self, n: u64, bits: u32) -> Result<Float> {
        self.reduce(n).frac.abs_float(bits, n)
    }

    /// True when sin(nπx0) = 0 exactly.
    pub fn is_resonant(&self, n: u64) -> bool {
        matches!(self.reduce(n).frac, Frac::Zero)
    }

    /// Signed sin(nπx0).
    pub fn sin_npi(&self, n: u64, bits: u32) -> Result<Float> {
        let red = self.reduce(n);
        let r = red.frac.signed_float(bits + 8, n)?;
        let s = Float::with_val(bits + 8, &r * &mp::pi(bits + 8)).sin();
        let s = if red.p.is_odd() { -s } else { s };
        Ok(Float::with_val(bits, s))
    }

    /// Signed cos(nπx0).
    pub fn cos_npi(&self, n: u64, bits: u32) -> Result<Float> {
        let red = self.reduce(n);
        let r = red.frac.mid_float(bits + 8);
        let c = Float::with_val(bits + 8, &r * &mp::pi(bits + 8)).cos();
        let c = if red.p.is_odd() { -c } else { c };
        Ok(Float::with_val(bits, c))
    }
}

fn nearest_integer(x: &Rational) -> Integer {
    let half = Rational::from((1, 2));
    let (_, fl) = Rational::from(x + &half).fract_floor(Integer::new());
    fl
}

fn is_squarefree(d: &Integer) -> bool {
    // Trial division is enough for the small radicands used in practice.
    if d.significant_bits() > 48 {
        return true;
    }
    let d = d.to_u64().expect("fits");
    let mut k = 2u64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

impl Quad {
    fn normalized(self) -> Quad {
        let g = Integer::from(self.a.gcd_ref(&self.b)).gcd(&self.c);
        if g <= 1 {
            return self;
        }
        Quad { a: self.a / &g, b: self.b / &g, d: self.d, c: self.c / &g }
    }

    /// Exact floor; valid because b√d is irrational whenever b ≠ 0.
    fn floor(&self) -> Integer {
        if self.b == 0 {
            return self.a.clone().div_rem_floor(self.c.clone()).0;
        }
        let b2d = Integer::from(self.b.square_ref()) * &self.d;
        let s = b2d.sqrt();
        let f = if self.b > 0 { s } else { -s - 1u32 };
        (Integer::from(&self.a + &f)).div_rem_floor(self.c.clone()).0
    }

    /// Sign of a + b√d.
    fn numerator_sign(&self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let sa = self.a.cmp0();
        let sb = self.b.cmp0();
        if sa == sb || sb == Equal {
            return sa;
        }
        if sa == Equal {
            return sb;
        }
        // opposite signs: compare a² with b²d
        let a2 = Integer::from(self.a.square_ref());
        let b2d = Integer::from(self.b.square_ref()) * &self.d;
        match a2.cmp(&b2d) {
            Greater => sa,
            Less => sb,
            Equal => Equal,
        }
    }

    /// |a + b√d| without cancellation.
    fn abs_numerator(&self, bits: u32) -> Float {
        let sqrt_d = Float::with_val(bits + 16, &self.d).sqrt();
        let abs_a = Float::with_val(bits + 16, Integer::from(self.a.abs_ref()));
        let abs_b_sqrt = Float::with_val(bits + 16, Integer::from(self.b.abs_ref())) * &sqrt_d;
        if self.a.cmp0() == self.b.cmp0() || self.a == 0 || self.b == 0 {
            return Float::with_val(bits, abs_a + abs_b_sqrt);
        }
        let a2 = Integer::from(self.a.square_ref());
        let b2d = Integer::from(self.b.square_ref()) * &self.d;
        let num = Float::with_val(bits + 16, (a2 - b2d).abs());
        Float::with_val(bits, num / (abs_a + abs_b_sqrt))
    }

    fn to_float(&self, bits: u32) -> Float {
        let v = self.abs_numerator(bits + 8) / &self.c;
        let v = if self.numerator_sign() == std::cmp::Ordering::Less { -v } else { v };
        Float::with_val(bits, v)
    }

    /// 1/(x − k) for the continued-fraction step.
    fn reciprocal_shift(&self, k: &Integer) -> Quad {
        let a = Integer::from(&self.a - Integer::from(k * &self.c));
        // c / (a + b√d) = c(a − b√d)/(a² − b²d)
        let den = Integer::from(a.square_ref()) - Integer::from(self.b.square_ref()) * &self.d;
        let mut q = Quad {
            a: Integer::from(&self.c * &a),
            b: Integer::from(&self.c * &self.b) * -1i32,
            d: self.d.clone(),
            c: den,
        };
        if q.c < 0 {
            q.a = -q.a;
            q.b = -q.b;
            q.c = -q.c;
        }
        q.normalized()
    }
}

/// Value of [0; a1..aK, φ] with φ = (1+√5)/2 as an element of Q(√5).
fn golden_tail_value(cf: &[Integer]) -> Quad {
    let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::from(0));
    let (mut p, mut q) = (Integer::from(0), Integer::from(1));
    for a in cf {
        let pn = Integer::from(a * &p) + &p_prev;
        let qn = Integer::from(a * &q) + &q_prev;
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
    }
    // x0 = (α + p√5)/(β + q√5) with α = p + 2p', β = q + 2q'
    let alpha = Integer::from(&p + Integer::from(&p_prev * 2u32));
    let beta = Integer::from(&q + Integer::from(&q_prev * 2u32));
    let a = Integer::from(&alpha * &beta) - Integer::from(&p * &q) * 5u32;
    let b = Integer::from(&p * &beta) - Integer::from(&alpha * &q);
    let c = Integer::from(beta.square_ref()) - Integer::from(q.square_ref()) * 5u32;
    let mut quad = Quad { a, b, d: Integer::from(5), c };
    if quad.c < 0 {
        quad.a = -quad.a;
        quad.b = -quad.b;
        quad.c = -quad.c;
    }
    quad.normalized()
}

struct Reduced {
    p: Integer,
    frac: Frac,
}

enum Frac {
    Zero,
    Rat(Rational),
    Quad(Quad),
    Interval { mid: Rational, rad: Rational },
}

impl Frac {
    fn certify(mid: &Rational, rad: &Rational, n: u64) -> Result<()> {
        let scaled = Rational::from(rad << CERTIFIED_BITS);
        if Rational::from(mid.abs_ref()) <= scaled {
            return Err(Error::precision(format!(
                "decimal anchor cannot certify dist(n x0, Z) at n = {n} to {CERTIFIED_BITS} bits"
            )));
        }
        Ok(())
    }

    fn abs_float(&self, bits: u32, n: u64) -> Result<Float> {
        Ok(match self {
            Frac::Zero => Float::new(bits),
            Frac::Rat(r) => Float::with_val(bits, Rational::from(r.abs_ref())),
            Frac::Quad(q) => q.abs_numerator(bits + 8) / &q.c,
            Frac::Interval { mid, rad } => {
                Frac::certify(mid, rad, n)?;
                Float::with_val(bits, Rational::from(mid.abs_ref()))
            }
        })
    }

    fn signed_float(&self, bits: u32, n: u64) -> Result<Float> {
        Ok(match self {
            Frac::Quad(q) => q.to_float(bits),
            Frac::Interval { mid, rad } => {
                Frac::certify(mid, rad, n)?;
                Float::with_val(bits, mid)
            }
            _ => self.mid_float(bits),
        })
    }

    fn mid_float(&self, bits: u32) -> Float {
        match self {
            Frac::Zero => Float::new(bits),
            Frac::Rat(r) => Float::with_val(bits, r),
            Frac::Quad(q) => q.to_float(bits),
            Frac::Interval { mid, .. } => Float::with_val(bits, mid),
        }
    }
}

/// θn = dist(x0, ℤ/n).
pub fn theta(n: u64, x0: &AnchorPoint, bits: u32) -> Result<Float> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    Ok(x0.dist_nx(n, bits)? / n)
}

/// sin(π·dist(n x0, ℤ)) = |sin(nπx0)|.
pub fn abs_sin_npi(n: u64, x0: &AnchorPoint, bits: u32) -> Result<Float> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let d = x0.dist_nx(n, bits + 8)?;
    Ok(Float::with_val(bits, (d * mp::pi(bits + 8)).sin()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSequence {
    /// θn for n = 1..=n_max.
    pub values: Vec<Float>,
    /// The integer p with θn = |x0 − p/n|.
    pub argmins: Vec<Integer>,
}

pub fn theta_sequence(x0: &AnchorPoint, n_max: u64, bits: u32) -> Result<ThetaSequence> {
    let mut values = Vec::with_capacity(n_max as usize);
    let mut argmins = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let red = x0.reduce(n);
        values.push(red.frac.abs_float(bits, n)? / n);
        argmins.push(red.p);
    }
    Ok(ThetaSequence { values, argmins })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    /// a0, a1, … (a0 = 0 for points in (0,1)).
    pub quotients: Vec<Integer>,
    /// (pk, qk) in lowest terms.
    pub convergents: Vec<(Integer, Integer)>,
    /// True when the expansion ended (rational input).
    pub terminated: bool,
}

/// Continued-fraction expansion to `depth` quotients (a0 included).
pub fn continued_fraction(x0: &AnchorPoint, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::invalid("depth must be >= 1"));
    }
    let mut quotients = Vec::new();
    let mut terminated = false;
    match &x0.0 {
        Variant::Rational(r) => {
            let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
            while quotients.len() < depth {
                let (a, rem) = num.div_rem_floor(den.clone());
                quotients.push(a);
                if rem == 0 {
                    terminated = true;
                    break;
                }
                num = den;
                den = rem;
            }
        }
        Variant::Quadratic(q) => {
            let mut x = q.clone();
            while quotients.len() < depth {
                let a = x.floor();
                x = x.reciprocal_shift(&a);
                quotients.push(a);
            }
        }
        Variant::Liouville { cf, .. } => {
            quotients.push(Integer::new());
            quotients.extend(cf.iter().take(depth - 1).cloned());
            while quotients.len() < depth {
                quotients.push(Integer::from(1));
            }
        }
        Variant::Decimal { mid, rad, .. } => {
            let mut lo = Rational::from(mid - rad);
            let mut hi = Rational::from(mid + rad);
            while quotients.len() < depth {
                let (_, a_lo) = lo.clone().fract_floor(Integer::new());
                let (_, a_hi) = hi.clone().fract_floor(Integer::new());
                if a_lo != a_hi {
                    return Err(Error::precision(format!(
                        "decimal anchor certifies only {} partial quotients",
                        quotients.len()
                    )));
                }
                let dl = Rational::from(&lo - &a_lo);
                let dh = Rational::from(&hi - &a_hi);
                quotients.push(a_lo);
                if dl <= 0 {
                    return Err(Error::precision(format!(
                        "decimal anchor certifies only {} partial quotients",
                        quotients.len()
                    )));
                }
                lo = dh.recip();
                hi = dl.recip();
            }
        }
    }
    let mut convergents = Vec::with_capacity(quotients.len());
    let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::from(0));
    let (mut p, mut q) = (Integer::from(0), Integer::from(1));
    for (k, a) in quotients.iter().enumerate() {
        if k == 0 {
            p = a.clone();
            q = Integer::from(1);
            p_prev = Integer::from(1);
            q_prev = Integer::from(0);
        } else {
            let pn = Integer::from(a * &p) + &p_prev;
            let qn = Integer::from(a * &q) + &q_prev;
            p_prev = std::mem::replace(&mut p, pn);
            q_prev = std::mem::replace(&mut q, qn);
        }
        convergents.push((p.clone(), q.clone()));
    }
    Ok(ContinuedFraction { quotients, convergents, terminated })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleCheck {
    /// θn > c/n^m held for every n ≤ N.
    pub holds: bool,
    /// min over n of θn·n^m.
    pub worst_ratio: Float,
    pub worst_n: u64,
}

pub fn liouville_bound_check(x0: &AnchorPoint, m: u32, c: f64, n_max: u64, bits: u32) -> Result<LiouvilleCheck> {
    if m < 2 || n_max == 0 || c.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::invalid("liouville_bound_check needs m >= 2, c > 0, N >= 1"));
    }
    let mut worst: Option<(Float, u64)> = None;
    for n in 1..=n_max {
        let ratio = theta(n, x0, bits)? * Float::with_val(bits, Integer::from(n).pow(m));
        if worst.as_ref().map_or(true, |(w, _)| ratio < *w) {
            worst = Some((ratio, n));
        }
    }
    let (worst_ratio, worst_n) = worst.expect("n_max >= 1");
    Ok(LiouvilleCheck { holds: worst_ratio > c, worst_ratio, worst_n })
}

// ---- serialization ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AnchorSpec {
    Rational {
        #[serde(with = "big_int")]
        p: Integer,
        #[serde(with = "big_int")]
        q: Integer,
    },
    Quadratic {
        #[serde(with = "big_int")]
        a: Integer,
        #[serde(with = "big_int")]
        b: Integer,
        #[serde(with = "big_int")]
        d: Integer,
        #[serde(with = "big_int")]
        c: Integer,
    },
    Decimal {
        digits: String,
        bits: u32,
    },
    Liouville {
        #[serde(with = "big_int_vec")]
        cf: Vec<Integer>,
    },
}

impl TryFrom<AnchorSpec> for AnchorPoint {
    type Error = Error;
    fn try_from(s: AnchorSpec) -> Result<Self> {
        match s {
            AnchorSpec::Rational { p, q } => {
                let r = AnchorPoint::rational(p.clone(), q.clone())?;
                let exact = r.as_rational().expect("rational");
                if *exact.numer() != p || *exact.denom() != q {
                    return Err(Error::invalid(format!("rational anchor {p}/{q} is not in lowest terms")));
                }
                Ok(r)
            }
            AnchorSpec::Quadratic { a, b, d, c } => AnchorPoint::quadratic(a, b, d, c),
            AnchorSpec::Decimal { digits, bits } => AnchorPoint::decimal(&digits, bits),
            AnchorSpec::Liouville { cf } => AnchorPoint::liouville(cf),
        }
    }
}

impl From<AnchorPoint> for AnchorSpec {
    fn from(x: AnchorPoint) -> Self {
        match x.0 {
            Variant::Rational(r) => {
                let (p, q) = r.into_numer_denom();
                AnchorSpec::Rational { p, q }
            }
            Variant::Quadratic(Quad { a, b, d, c }) => AnchorSpec::Quadratic { a, b, d, c },
            Variant::Decimal { digits, bits, .. } => AnchorSpec::Decimal { digits, bits },
            Variant::Liouville { cf, .. } => AnchorSpec::Liouville { cf },
        }
    }
}

impl std::fmt::Display for AnchorPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.0 {
            Variant::Rational(r) => write!(f, "{r}"),
            Variant::Quadratic(q) => write!(f, "({} + {}*sqrt({}))/{}", q.a, q.b, q.d, q.c),
            Variant::Decimal { digits, .. } => write!(f, "{digits}"),
            Variant::Liouville { cf, .. } => {
                let parts: Vec<String> = cf.iter().map(|a| a.to_string()).collect();
                write!(f, "[0; {}, 1, 1, ...]", parts.join(", "))
            }
        }
    }
}

/// Integers as JSON numbers when they fit in i64, else as decimal strings.
pub(crate) mod big_int {
    use rug::Integer;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &Integer, s: S) -> Result<S::Ok, S::Error> {
        match z.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&z.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integer, D::Error> {
        d.deserialize_any(BigVisitor)
    }

    pub(super) struct BigVisitor;

    impl<'de> Visitor<'de> for BigVisitor {
        type Value = Integer;
        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an integer or a decimal integer string")
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Integer, E> {
            Ok(Integer::from(v))
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Integer, E> {
            Ok(Integer::from(v))
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<Integer, E> {
            Integer::from_str_radix(v.trim(), 10).map_err(|e| E::custom(format!("bad integer {v:?}: {e}")))
        }
    }
}

pub(crate) mod big_int_vec {
    use rug::Integer;
    use serde::de::{SeqAccess, Visitor};
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    struct Wrap<'a>(&'a Integer);
    impl serde::Serialize for Wrap<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::big_int::serialize(self.0, s)
        }
    }
    struct Owned(Integer);
    impl<'de> serde::Deserialize<'de> for Owned {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            super::big_int::deserialize(d).map(Owned)
        }
    }

    pub fn serialize<S: Serializer>(v: &[Integer], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for z in v {
            seq.serialize_element(&Wrap(z))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Integer>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vec<Integer>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut a: A) -> Result<Vec<Integer>, A::Error> {
                let mut out = Vec::new();
                while let Some(Owned(z)) = a.next_element()? {
                    out.push(z);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third() -> AnchorPoint {
        AnchorPoint::rational(1, 3).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(2, &third(), 128).unwrap().to_f64(), 1.0 / 6.0);
        assert!(theta(3, &third(), 128).unwrap().is_zero());
        let t = theta(12, &AnchorPoint::sqrt2_minus_1(), 256).unwrap();
        // |√2 − 1 − 5/12| from a 40-digit value of √2
        let reference: f64 = 1.4142135623730950488016887242096980785697 - 1.0 - 5.0 / 12.0;
        assert!((t.to_f64() / reference.abs() - 1.0).abs() < 1e-12);
        assert!((t.to_f64() - 2.453e-3).abs() < 1e-6);
    }

    #[test]
    fn abs_sin_examples() {
        let half = AnchorPoint::rational(1, 2).unwrap();
        assert!(abs_sin_npi(2, &half, 128).unwrap().is_zero());
        assert_eq!(abs_sin_npi(1, &half, 128).unwrap().to_f64(), 1.0);
        let s = abs_sin_npi(12, &AnchorPoint::sqrt2_minus_1(), 256).unwrap().to_f64();
        assert!((s - 0.09235).abs() < 1e-4);
    }

    #[test]
    fn signed_sin_and_cos_agree_with_direct_evaluation() {
        let x = AnchorPoint::sqrt2_minus_1();
        let xv = x.value(512);
        for n in [1u64, 2, 3, 7, 12, 29, 70, 1000] {
            let direct = Float::with_val(512, &xv * n) * mp::pi(512);
            let s = x.sin_npi(n, 256).unwrap();
            let c = x.cos_npi(n, 256).unwrap();
            assert!(mp::rel_diff(&s, &Float::with_val(256, direct.clone().sin())) < 1e-60);
            assert!(mp::rel_diff(&c, &Float::with_val(256, direct.cos())) < 1e-60);
        }
    }

    #[test]
    fn continued_fractions() {
        let cf = continued_fraction(&third(), 5).unwrap();
        assert_eq!(cf.quotients, vec![Integer::from(0), Integer::from(3)]);
        assert!(cf.terminated);
        assert_eq!(cf.convergents[1], (Integer::from(1), Integer::from(3)));

        let cf = continued_fraction(&AnchorPoint::sqrt2_minus_1(), 6).unwrap();
        let q: Vec<i64> = cf.quotients.iter().map(|z| z.to_i64().unwrap()).collect();
        assert_eq!(q, vec![0, 2, 2, 2, 2, 2]);
        let conv: Vec<(i64, i64)> =
            cf.convergents.iter().map(|(p, q)| (p.to_i64().unwrap(), q.to_i64().unwrap())).collect();
        assert_eq!(conv[..4], [(0, 1), (1, 2), (2, 5), (5, 12)]);

        let quotients = vec![Integer::from(2), Integer::from(10), Integer::from(1_000_000)];
        let l = AnchorPoint::liouville(quotients.clone()).unwrap();
        let cf = continued_fraction(&l, 6).unwrap();
        assert_eq!(cf.quotients[1..4], quotients[..]);
        assert_eq!(cf.quotients[4], 1);
    }

    #[test]
    fn liouville_value_matches_its_expansion() {
        // expanding the Q(√5) value exactly must reproduce the quotients
        let quotients: Vec<Integer> = [3u64, 1, 4, 1, 5, 9].iter().map(|&a| Integer::from(a)).collect();
        let l = AnchorPoint::liouville(quotients.clone()).unwrap();
        let (a, b, d, c) = l.quadratic_parts().unwrap();
        let as_quad = AnchorPoint::quadratic(a, b, d, c).unwrap();
        let cf = continued_fraction(&as_quad, 12).unwrap();
        assert_eq!(cf.quotients[1..7], quotients[..]);
        assert!(cf.quotients[7..].iter().all(|a| *a == 1));
    }

    #[test]
    fn decimal_anchor_certifies_or_refuses() {
        let d = AnchorPoint::decimal("0.41421356237309504880168872420969807856967187537694", 256).unwrap();
        let cf = continued_fraction(&d, 20).unwrap();
        assert!(cf.quotients[1..].iter().all(|a| *a == 2));
        assert!(continued_fraction(&d, 200).is_err());
        let t = theta(12, &d, 256).unwrap();
        let exact = theta(12, &AnchorPoint::sqrt2_minus_1(), 256).unwrap();
        assert!(mp::rel_diff(&t, &exact) < 1e-30);

        let half = AnchorPoint::decimal("0.5", 64).unwrap();
        assert!(matches!(theta(2, &half, 64), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn reflection_preserves_distances() {
        let points = vec![
            third(),
            AnchorPoint::sqrt2_minus_1(),
            AnchorPoint::decimal("0.123456789012345678901234567890", 128).unwrap(),
            AnchorPoint::liouville(vec![Integer::from(1), Integer::from(7)]).unwrap(),
            AnchorPoint::liouville(vec![Integer::from(4)]).unwrap(),
            AnchorPoint::liouville(vec![]).unwrap(),
        ];
        for x in points {
            let y = x.reflect();
            let sum = Float::with_val(256, x.value(256) + y.value(256));
            assert!((sum.to_f64() - 1.0).abs() < 1e-30, "{x}");
            for n in 1..30 {
                assert_eq!(x.dist_nx(n, 200).unwrap(), y.dist_nx(n, 200).unwrap(), "{x} n={n}");
            }
        }
    }

    #[test]
    fn liouville_check_examples() {
        let r = liouville_bound_check(&AnchorPoint::sqrt2_minus_1(), 2, 0.2, 100, 256).unwrap();
        assert!(r.holds);
        let r = liouville_bound_check(&third(), 2, 1e-9, 3, 128).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst_n, 3);
        let big = AnchorPoint::liouville(vec![Integer::from(2), Integer::from(10).pow(12)]).unwrap();
        let r = liouville_bound_check(&big, 5, 1.0, 50, 256).unwrap();
        assert!(!r.holds);
        assert_eq!(r.worst_n, 2);
    }

    #[test]
    fn json_round_trip() {
        let cases = [
            r#"{"kind":"rational","p":1,"q":3}"#,
            r#"{"kind":"quadratic","a":-1,"b":1,"d":2,"c":1}"#,
            r#"{"kind":"decimal","digits":"0.25","bits":256}"#,
            r#"{"kind":"liouville","cf":[2,10,"123456789012345678901234567890"]}"#,
        ];
        for s in cases {
            let x: AnchorPoint = serde_json::from_str(s).unwrap();
            assert_eq!(serde_json::to_string(&x).unwrap(), s);
        }
        assert!(serde_json::from_str::<AnchorPoint>(r#"{"kind":"rational","p":2,"q":6}"#).is_err());
        assert!(serde_json::from_str::<AnchorPoint>(r#"{"kind":"rational","p":4,"q":3}"#).is_err());
        assert!(serde_json::from_str::<AnchorPoint>(r#"{"kind":"quadratic","a":0,"b":1,"d":4,"c":3}"#).is_err());
        assert!(serde_json::from_str::<AnchorPoint>(r#"{"kind":"liouville","cf":[0]}"#).is_err());
    }
}
