//! Dirichlet heat equation on (0,1) in the basis φn(x) = √2 sin(nπx).
//!
//! A state is the coefficient vector (μ1..μN); ‖u‖² = Σ μn². Controls act
//! through bn = ⟨profile, φn⟩ and the Duhamel integral of the time signal.

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diophantine::AnchorPoint;
use crate::error::{Error, Result};
use crate::mp;

pub fn eigenvalue(n: u64) -> f64 {
    let pi = std::f64::consts::PI;
    (n as f64) * (n as f64) * pi * pi
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    coeffs: Vec<Float>,
}

impl FourierState {
    pub fn new(coeffs: Vec<Float>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a state needs at least one mode"));
        }
        let bits = coeffs.iter().map(|c| c.prec()).max().expect("nonempty");
        let coeffs = coeffs.into_iter().map(|c| Float::with_val(bits, c)).collect();
        Ok(FourierState { coeffs })
    }

    pub fn from_f64(coeffs: &[f64], bits: u32) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
        Self::new(coeffs.iter().map(|&c| mp::real(bits, c)).collect())
    }

    pub fn zeros(n: usize, bits: u32) -> Result<Self> {
        Self::new(vec![Float::new(bits); n])
    }

    /// The normalized mode φk in a truncation of size n.
    pub fn mode(k: usize, n: usize, bits: u32) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("mode {k} outside 1..={n}")));
        }
        let mut s = Self::zeros(n, bits)?;
        s.coeffs[k - 1] = Float::with_val(bits, 1);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Float> {
        self.coeffs
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    pub fn norm(&self) -> Float {
        mp::norm2(&self.coeffs, self.bits())
    }

    pub fn scale(&self, alpha: &Float) -> FourierState {
        let bits = self.bits();
        FourierState { coeffs: self.coeffs.iter().map(|c| Float::with_val(bits, c * alpha)).collect() }
    }

    /// Zero-padded or truncated copy with n modes.
    pub fn resized(&self, n: usize) -> Result<FourierState> {
        let bits = self.bits();
        let mut c: Vec<Float> = self.coeffs.iter().take(n).cloned().collect();
        c.resize(n, Float::new(bits));
        FourierState::new(c)
    }

    pub fn with_precision(&self, bits: u32) -> FourierState {
        FourierState { coeffs: self.coeffs.iter().map(|c| Float::with_val(bits, c)).collect() }
    }

    /// u(x) = Σ μn √2 sin(nπx), evaluated in f64.
    pub fn eval(&self, x: f64) -> f64 {
        let pi = std::f64::consts::PI;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.to_f64() * std::f64::consts::SQRT_2 * ((k + 1) as f64 * pi * x).sin())
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    n: usize,
    coeffs: Vec<f64>,
}

impl Serialize for FourierState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson { n: self.len(), coeffs: self.to_f64() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FourierState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StateJson::deserialize(d)?;
        if j.n != j.coeffs.len() {
            return Err(serde::de::Error::custom(format!("n = {} but {} coefficients", j.n, j.coeffs.len())));
        }
        FourierState::from_f64(&j.coeffs, mp::DEFAULT_BITS).map_err(serde::de::Error::custom)
    }
}

/// Spatial part of a separated control, or the observation region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpatialProfile {
    /// Indicator of (center − half_width, center + half_width).
    Interval { center: AnchorPoint, half_width: f64 },
    Dirac { at: AnchorPoint },
}

impl SpatialProfile {
    pub fn interval(center: AnchorPoint, half_width: f64) -> Result<Self> {
        check_interval(&center, &mp::real(64, half_width))?;
        Ok(SpatialProfile::Interval { center, half_width })
    }

    pub fn dirac(at: AnchorPoint) -> Self {
        SpatialProfile::Dirac { at }
    }

    pub fn anchor(&self) -> &AnchorPoint {
        match self {
            SpatialProfile::Interval { center, .. } => center,
            SpatialProfile::Dirac { at } => at,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpatialProfile::Interval { center, half_width } => check_interval(center, &mp::real(64, *half_width)),
            SpatialProfile::Dirac { .. } => Ok(()),
        }
    }
}

/// Strict containment (x0 − ε, x0 + ε) ⊂ (0,1) for profiles; the overlap
/// integrals also accept the closed case touching the boundary.
pub(crate) fn check_interval(x0: &AnchorPoint, eps: &Float) -> Result<()> {
    check_interval_with(x0, eps, false)
}

pub(crate) fn check_interval_with(x0: &AnchorPoint, eps: &Float, closed: bool) -> Result<()> {
    use std::cmp::Ordering;
    let bad = || Error::InvalidInterval { center: x0.to_f64(), half_width: eps.to_f64() };
    if !eps.is_finite() || *eps <= 0 {
        return Err(bad());
    }
    let ok = |o: Ordering| o == Ordering::Greater || (closed && o == Ordering::Equal);
    if let Some(r) = x0.as_rational() {
        let e = Rational::try_from(eps).expect("finite");
        let left = Rational::from(r - &e).cmp0();
        let right = (Rational::from(1) - Rational::from(r + &e)).cmp0();
        return if ok(left) && ok(right) { Ok(()) } else { Err(bad()) };
    }
    // irrational centers never sit exactly on the boundary
    let bits = eps.prec().max(128) + 64;
    let (lo, hi) = x0.enclosure(bits);
    if Float::with_val(bits, &lo - eps) <= 0 || Float::with_val(bits, &hi + eps) >= 1 {
        return Err(bad());
    }
    Ok(())
}

/// sin(πq) for rational q after exact reduction; exact zero at integers.
pub(crate) fn sin_pi_rational(q: &Rational, bits: u32) -> Float {
    let half = Rational::from((1, 2));
    let (_, p) = Rational::from(q + &half).fract_floor(Integer::new());
    let r = Rational::from(q - &p);
    if r == 0 {
        return Float::new(bits);
    }
    let s = Float::with_val(bits + 8, &r) * mp::pi(bits + 8);
    let s = s.sin();
    Float::with_val(bits, if p.is_odd() { -s } else { s })
}

/// ∫_{x0−ε}^{x0+ε} sin(nπx) dx = (2/(nπ)) sin(nπx0) sin(nπε).
pub fn overlap_interval(n: u64, x0: &AnchorPoint, eps: f64, bits: u32) -> Result<Float> {
    overlap_interval_mp(n, x0, &mp::real(bits, eps))
}

pub fn overlap_interval_mp(n: u64, x0: &AnchorPoint, eps: &Float) -> Result<Float> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    check_interval_with(x0, eps, true)?;
    let bits = eps.prec();
    let sx = x0.sin_npi(n, bits + 8)?;
    let ne = Rational::try_from(eps).expect("finite") * n;
    let se = sin_pi_rational(&ne, bits + 8);
    let npi = mp::pi(bits + 8) * n;
    Ok(Float::with_val(bits, sx * se * 2u32 / npi))
}

/// ∫_{x0−ε}^{x0+ε} sin(mπx) sin(nπx) dx.
pub fn overlap_product(m: u64, n: u64, x0: &AnchorPoint, eps: f64, bits: u32) -> Result<Float> {
    overlap_product_mp(m, n, x0, &mp::real(bits, eps))
}

pub fn overlap_product_mp(m: u64, n: u64, x0: &AnchorPoint, eps: &Float) -> Result<Float> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("mode indices must be >= 1"));
    }
    check_interval_with(x0, eps, true)?;
    let bits = eps.prec();
    let w = bits + 16;
    let d = m.abs_diff(n);
    let s = m + n;
    let pi = mp::pi(w);
    let oms = |k: u64| mp::one_minus_sinc(&(Float::with_val(w, &pi * eps) * k));
    let sin_m = x0.sin_npi(m, w)?;
    let sin_n = x0.sin_npi(n, w)?;
    let cos_s = x0.cos_npi(s, w)?;
    Ok(Float::with_val(bits, product_kernel(eps, &sin_m, &sin_n, &cos_s, &oms(d), &oms(s))))
}

// ε[2 sin(mπx0) sin(nπx0) S_d + cos(sπx0)(S_d − S_s)] with S_k = sinc(kπε),
// written through 1 − sinc so small intervals do not cancel.
fn product_kernel(eps: &Float, sin_m: &Float, sin_n: &Float, cos_s: &Float, oms_d: &Float, oms_s: &Float) -> Float {
    let w = sin_m.prec();
    let sd = Float::with_val(w, 1) - oms_d;
    let first = Float::with_val(w, sin_m * sin_n) * 2u32 * sd;
    let diff = Float::with_val(w, oms_s - oms_d);
    let second = Float::with_val(w, cos_s * &diff);
    Float::with_val(w, first + second) * eps
}

/// Precomputed trigonometric data of a profile for modes 1..=n.
pub(crate) struct OverlapTable {
    bits: u32,
    n: usize,
    kind: TableKind,
}

enum TableKind {
    Interval { eps: Float, sin: Vec<Float>, cos: Vec<Float>, oms: Vec<Float>, b: Vec<Float> },
    Dirac { sin: Vec<Float> },
}

impl OverlapTable {
    pub(crate) fn new(profile: &SpatialProfile, n: usize, bits: u32) -> Result<Self> {
        let w = bits + 16;
        match profile {
            SpatialProfile::Interval { center, half_width } => {
                let eps = mp::real(w, *half_width);
                check_interval(center, &eps)?;
                let pi = mp::pi(w);
                let sin = (0..=2 * n as u64).map(|k| sin_or_zero(center, k, w)).collect::<Result<Vec<_>>>()?;
                let cos = (0..=2 * n as u64)
                    .map(|k| if k == 0 { Ok(Float::with_val(w, 1)) } else { center.cos_npi(k, w) })
                    .collect::<Result<Vec<_>>>()?;
                let oms = (0..=2 * n as u64).map(|k| mp::one_minus_sinc(&(Float::with_val(w, &pi * &eps) * k))).collect();
                let sqrt2 = Float::with_val(w, 2).sqrt();
                let b = (1..=n as u64)
                    .map(|k| overlap_interval_mp(k, center, &eps).map(|o| Float::with_val(w, o * &sqrt2)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(OverlapTable { bits, n, kind: TableKind::Interval { eps, sin, cos, oms, b } })
            }
            SpatialProfile::Dirac { at } => {
                let sin = (0..=n as u64).map(|k| sin_or_zero(at, k, w)).collect::<Result<Vec<_>>>()?;
                Ok(OverlapTable { bits, n, kind: TableKind::Dirac { sin } })
            }
        }
    }

    /// W_mn: ∫_ω sin(mπx) sin(nπx) dx for intervals, sin(mπx0) sin(nπx0) for points.
    pub(crate) fn w(&self, m: usize, n: usize) -> Float {
        debug_assert!(m >= 1 && n >= 1 && m <= self.n && n <= self.n);
        match &self.kind {
            TableKind::Interval { eps, sin, cos, oms, .. } => {
                let d = m.abs_diff(n);
                let s = m + n;
                product_kernel(eps, &sin[m], &sin[n], &cos[s], &oms[d], &oms[s])
            }
            TableKind::Dirac { sin } => Float::with_val(self.bits + 16, &sin[m] * &sin[n]),
        }
    }

    /// bn = ⟨profile, φn⟩.
    pub(crate) fn b(&self, n: usize) -> Float {
        match &self.kind {
            TableKind::Interval { b, .. } => b[n - 1].clone(),
            TableKind::Dirac { sin } => {
                let w = self.bits + 16;
                Float::with_val(w, &sin[n] * Float::with_val(w, 2).sqrt())
            }
        }
    }
}

fn sin_or_zero(x0: &AnchorPoint, k: u64, bits: u32) -> Result<Float> {
    if k == 0 {
        Ok(Float::new(bits))
    } else {
        x0.sin_npi(k, bits)
    }
}

/// bn = ⟨profile, φn⟩ for n = 1..=count.
pub fn control_coefficients(profile: &SpatialProfile, count: usize, bits: u32) -> Result<Vec<Float>> {
    let t = OverlapTable::new(profile, count, bits)?;
    Ok((1..=count).map(|n| Float::with_val(bits, t.b(n))).collect())
}

pub fn evolve_free(state: &FourierState, t: f64) -> Result<FourierState> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let bits = state.bits();
    let tt = mp::real(bits, t);
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let decay = Float::with_val(bits, -(mp::lambda(k + 1, bits) * &tt)).exp();
            Float::with_val(bits, c * decay)
        })
        .collect();
    Ok(FourierState { coeffs })
}

/// Which way an exponential sum runs in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Σ ak e^{−λk (T − t)}
    Backward,
    /// Σ ak e^{−λk t}
    Forward,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Signal {
    ExpSum { coeffs: Vec<Float>, orientation: Orientation },
    /// Values on the uniform grid t_i = i·T/(len − 1).
    Sampled { values: Vec<f64> },
    /// Non-separated control f(t,x) = Σ ηn e^{−λn(T−t)} φn(x) on the interval.
    PerMode { eta: Vec<Float> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarControl {
    pub profile: SpatialProfile,
    pub signal: Signal,
    pub horizon: f64,
    /// L² norm over (0,T)×(0,1) for intervals, over (0,T) for points.
    pub l2_norm: f64,
}

impl ScalarControl {
    /// Build a control and compute its norm from the signal.
    pub fn new(profile: SpatialProfile, signal: Signal, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::invalid("horizon must be positive"));
        }
        profile.validate()?;
        if matches!(signal, Signal::PerMode { .. }) && matches!(profile, SpatialProfile::Dirac { .. }) {
            return Err(Error::invalid("per-mode signals need an interval profile"));
        }
        if let Signal::Sampled { values } = &signal {
            if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("sampled signal needs at least two finite samples"));
            }
        }
        let mut c = ScalarControl { profile, signal, horizon, l2_norm: 0.0 };
        c.l2_norm = c.norm_mp(mp::DEFAULT_BITS)?.to_f64();
        Ok(c)
    }

    pub fn zero(profile: SpatialProfile, horizon: f64, bits: u32) -> Result<Self> {
        Self::new(profile, Signal::ExpSum { coeffs: vec![Float::new(bits)], orientation: Orientation::Backward }, horizon)
    }

    /// Recompute the L² norm from the signal. Exponential sums use the
    /// closed-form Gram matrix, sampled signals Simpson's rule.
    pub fn norm_mp(&self, bits: u32) -> Result<Float> {
        let t = self.horizon;
        let sq = match &self.signal {
            Signal::ExpSum { coeffs, .. } => {
                let bits = bits.max(coeffs.iter().map(|c| c.prec()).max().unwrap_or(bits));
                let e = exp_gram(coeffs.len(), t, bits);
                e.quadratic_form(&coeffs.iter().map(|c| Float::with_val(bits, c)).collect::<Vec<_>>())
            }
            Signal::Sampled { values } => {
                let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
                mp::real(bits, simpson(&sq, t / (values.len() - 1) as f64))
            }
            Signal::PerMode { eta } => {
                let bits = bits.max(eta.iter().map(|c| c.prec()).max().unwrap_or(bits));
                let g = crate::observability::build_gramian(t, &self.profile, eta.len(), bits)?;
                return Ok(g.matrix.quadratic_form(eta).max(&Float::new(bits)).sqrt());
            }
        };
        let sq = sq.max(&Float::new(bits));
        let sq = match &self.profile {
            SpatialProfile::Interval { half_width, .. } if !matches!(self.signal, Signal::PerMode { .. }) => {
                sq * mp::real(bits, 2.0 * half_width)
            }
            _ => sq,
        };
        Ok(sq.sqrt())
    }

    /// f(t) for separated signals.
    pub fn eval(&self, t: f64, bits: u32) -> Result<Float> {
        let tt = self.horizon;
        match &self.signal {
            Signal::ExpSum { coeffs, orientation } => {
                let arg = match orientation {
                    Orientation::Backward => tt - t,
                    Orientation::Forward => t,
                };
                let a = mp::real(bits, arg);
                let terms: Vec<Float> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let e = Float::with_val(bits, -(mp::lambda(k + 1, bits) * &a)).exp();
                        Float::with_val(bits, c * e)
                    })
                    .collect();
                Ok(mp::pairwise_sum(&terms, bits))
            }
            Signal::Sampled { values } => {
                let h = tt / (values.len() - 1) as f64;
                let x = (t / h).clamp(0.0, (values.len() - 1) as f64);
                let i = (x.floor() as usize).min(values.len() - 2);
                let f = x - i as f64;
                Ok(mp::real(bits, values[i] * (1.0 - f) + values[i + 1] * f))
            }
            Signal::PerMode { .. } => Err(Error::invalid("per-mode controls are not separated")),
        }
    }

    /// Samples on the uniform grid of `points` nodes over [0, T].
    pub fn sample(&self, points: usize, bits: u32) -> Result<Vec<(f64, f64)>> {
        if points < 2 {
            return Err(Error::invalid("need at least two sample points"));
        }
        let h = self.horizon / (points - 1) as f64;
        (0..points)
            .map(|i| {
                let t = i as f64 * h;
                self.eval(t, bits).map(|v| (t, v.to_f64()))
            })
            .collect()
    }
}

/// E_jk = ∫0^T e^{−(λj+λk)t} dt.
pub(crate) fn exp_gram(n: usize, t: f64, bits: u32) -> crate::linalg::Matrix {
    let tt = mp::real(bits, t);
    let lam: Vec<Float> = (1..=n).map(|k| mp::lambda(k, bits)).collect();
    crate::linalg::Matrix::from_fn(n, n, bits, |j, k| {
        let s = Float::with_val(bits, &lam[j] + &lam[k]);
        let x = Float::with_val(bits, &s * &tt);
        mp::decay_integral(&x) * &tt
    })
}

/// ∫0^T e^{−λn(T−s) − λk s} ds.
fn mixed_integral(ln: &Float, lk: &Float, t: &Float) -> Float {
    let bits = ln.prec();
    let (lo, hi) = if ln < lk { (ln, lk) } else { (lk, ln) };
    let gap = Float::with_val(bits, hi - lo);
    let head = Float::with_val(bits, -Float::with_val(bits, lo * t)).exp();
    if gap.is_zero() {
        return head * t;
    }
    let x = Float::with_val(bits, &gap * t);
    head * mp::decay_integral(&x) * t
}

/// Composite Simpson on a uniform grid; the 3/8 rule closes an odd number of
/// panels, the trapezoid rule handles a single one.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let even_end = if n % 2 == 0 { n } else { n - 3 };
            let mut s = 0.0;
            if even_end >= 2 {
                let mut acc = values[0] + values[even_end];
                for i in 1..even_end {
                    acc += if i % 2 == 1 { 4.0 } else { 2.0 } * values[i];
                }
                s += acc * h / 3.0;
            }
            if n % 2 == 1 {
                let v = &values[even_end..];
                s += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            s
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForcedEvolution {
    pub state: FourierState,
    /// Number of quadrature panels for sampled signals.
    pub quadrature_steps: Option<usize>,
    /// Set when the sampling step exceeds 1/(10 λN).
    pub accuracy_warning: bool,
}

/// State at time T under the control: μn(T) = μn e^{−λnT} + bn ∫ e^{−λn(T−s)} f(s) ds.
pub fn evolve_forced(state: &FourierState, ctrl: &ScalarControl, t: f64) -> Result<ForcedEvolution> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if (ctrl.horizon - t).abs() > 1e-15 * t.abs().max(1.0) {
        return Err(Error::HorizonMismatch { control: ctrl.horizon, requested: t });
    }
    let n = state.len();
    let signal_bits = match &ctrl.signal {
        Signal::ExpSum { coeffs, .. } => coeffs.iter().map(|c| c.prec()).max().unwrap_or(0),
        Signal::PerMode { eta } => eta.iter().map(|c| c.prec()).max().unwrap_or(0),
        Signal::Sampled { .. } => 0,
    };
    let bits = state.bits().max(signal_bits);
    let free = evolve_free(&state.with_precision(bits), t)?;
    let tt = mp::real(bits, t);
    let lam: Vec<Float> = (1..=n.max(signal_len(&ctrl.signal))).map(|k| mp::lambda(k, bits)).collect();

    let mut quadrature_steps = None;
    let mut accuracy_warning = false;
    let forcing: Vec<Float> = match &ctrl.signal {
        Signal::PerMode { eta } => {
            let size = n.max(eta.len());
            let g = crate::observability::build_gramian(t, &ctrl.profile, size, bits)?;
            let mut eta_full: Vec<Float> = eta.iter().map(|e| Float::with_val(bits, e)).collect();
            eta_full.resize(size, Float::new(bits));
            g.matrix.mul_vec(&eta_full).into_iter().take(n).collect()
        }
        Signal::ExpSum { coeffs, orientation } => {
            let table = OverlapTable::new(&ctrl.profile, n, bits)?;
            (0..n)
                .map(|i| {
                    let terms: Vec<Float> = coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, a)| {
                            let integral = match orientation {
                                Orientation::Backward => {
                                    let s = Float::with_val(bits, &lam[i] + &lam[k]);
                                    mp::decay_integral(&Float::with_val(bits, &s * &tt)) * &tt
                                }
                                Orientation::Forward => mixed_integral(&lam[i], &lam[k], &tt),
                            };
                            Float::with_val(bits, a * integral)
                        })
                        .collect();
                    Float::with_val(bits, mp::pairwise_sum(&terms, bits) * table.b(i + 1))
                })
                .collect()
        }
        Signal::Sampled { values } => {
            let table = OverlapTable::new(&ctrl.profile, n, bits)?;
            let panels = values.len() - 1;
            let h = t / panels as f64;
            quadrature_steps = Some(panels);
            accuracy_warning = h > 1.0 / (10.0 * eigenvalue(n as u64));
            (0..n)
                .map(|i| {
                    let li = lam[i].to_f64();
                    let g: Vec<f64> =
                        values.iter().enumerate().map(|(j, f)| f * (-li * (t - j as f64 * h)).exp()).collect();
                    Float::with_val(bits, mp::real(bits, simpson(&g, h)) * table.b(i + 1))
                })
                .collect()
        }
    };
    let coeffs = free.coeffs.into_iter().zip(forcing).map(|(a, b)| a + b).collect();
    Ok(ForcedEvolution { state: FourierState::new(coeffs)?, quadrature_steps, accuracy_warning })
}

fn signal_len(s: &Signal) -> usize {
    match s {
        Signal::ExpSum { coeffs, .. } => coeffs.len(),
        Signal::PerMode { eta } => eta.len(),
        Signal::Sampled { .. } => 0,
    }
}

/// μᵀGμ with G the observability Gramian of the same (T, where, N).
pub fn observation_quadratic(state: &FourierState, t: f64, profile: &SpatialProfile) -> Result<Float> {
    if !(t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    let g = crate::observability::build_gramian(t, profile, state.len(), state.bits())?;
    Ok(g.matrix.quadratic_form(state.coeffs()))
}
