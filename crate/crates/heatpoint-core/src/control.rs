//! Null-control synthesis: biorthogonal families, moment-method controls,
//! minimal-norm (HUM) controls and the derived pointwise signals.

use rug::Float;
use serde::Serialize;

use crate::diophantine::AnchorPoint;
use crate::error::{Error, Result};
use crate::linalg::{cauchy_condition_estimate, FullPivotLu, Matrix};
use crate::mp;
use crate::observability::{build_gramian, linear_fit, RateFit};
use crate::spectral::{
    evolve_forced, overlap_interval_mp, FourierState, Orientation, OverlapTable, ScalarControl, Signal, SpatialProfile,
};

/// Default acceptance bound on the biorthogonality defect.
pub const FAMILY_TOLERANCE: f64 = 1e-20;

/// Default acceptance bound on simulated relative residuals.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Extra bits used when re-multiplying M·C to measure the defect.
const CHECK_GUARD_BITS: u32 = 64;

/// ψj(t) = Σk coeff[j,k] e^{−λk t} on (0,T), biorthogonal to the first N
/// exponentials.
#[derive(Clone, Debug, PartialEq)]
pub struct BiorthogonalFamily {
    pub horizon: f64,
    pub size: usize,
    pub coeff: Matrix,
    /// ‖ψj‖ in L²(0,T), from the quadratic form C M C.
    pub norms: Vec<Float>,
    /// max |(M C)jk − δjk|.
    pub residual: Float,
    /// max relative gap between ‖ψj‖² and (M⁻¹)jj.
    pub norm_consistency: f64,
    pub bits: u32,
    /// ∞-norm condition number of the Cauchy matrix 1/(j²+k²).
    pub condition_estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyConfig {
    pub ladder: Vec<u32>,
    pub tolerance: f64,
}

impl FamilyConfig {
    pub fn at(bits: u32) -> Self {
        FamilyConfig { ladder: vec![bits], tolerance: FAMILY_TOLERANCE }
    }
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { ladder: vec![256, 512, 1024], tolerance: FAMILY_TOLERANCE }
    }
}

/// M_jk = ∫0^T e^{−(j²+k²)π²t} dt.
pub fn exponential_gram(t: f64, n: usize, bits: u32) -> Matrix {
    crate::spectral::exp_gram(n, t, bits)
}

pub fn biorthogonal_family(t: f64, n: usize, bits: u32) -> Result<BiorthogonalFamily> {
    biorthogonal_family_with(t, n, &FamilyConfig::at(bits))
}

pub fn biorthogonal_family_with(t: f64, n: usize, cfg: &FamilyConfig) -> Result<BiorthogonalFamily> {
    if !(t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("family size must be at least 1"));
    }
    if cfg.ladder.is_empty() {
        return Err(Error::invalid("empty precision ladder"));
    }
    let condition_estimate = cauchy_condition_estimate(n);
    let mut last_residual = f64::INFINITY;
    for &bits in &cfg.ladder {
        let m = exponential_gram(t, n, bits);
        let Ok(lu) = FullPivotLu::factor(&m) else { continue };
        let coeff = lu.inverse();

        let wide = bits + CHECK_GUARD_BITS;
        let m_wide = exponential_gram(t, n, wide);
        let c_wide = coeff.with_precision(wide);
        let mc = m_wide.mul(&c_wide);
        let mut residual = Float::new(wide);
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1 } else { 0 };
                let d = Float::with_val(wide, &mc[(j, k)] - target).abs();
                if d > residual {
                    residual = d;
                }
            }
        }
        last_residual = residual.to_f64();
        if !(last_residual <= cfg.tolerance) {
            continue;
        }
        let cmc = c_wide.mul(&m_wide).mul(&c_wide);
        let mut norm_consistency = 0.0f64;
        let norms = (0..n)
            .map(|j| {
                let sq = Float::with_val(wide, &cmc[(j, j)]);
                norm_consistency = norm_consistency.max(mp::rel_diff(&sq, &c_wide[(j, j)]));
                Float::with_val(bits, sq.max(&Float::new(wide)).sqrt())
            })
            .collect();
        return Ok(BiorthogonalFamily {
            horizon: t,
            size: n,
            coeff,
            norms,
            residual: Float::with_val(bits, residual),
            norm_consistency,
            bits,
            condition_estimate,
        });
    }
    Err(Error::precision(format!(
        "biorthogonal family N={n}: residual {last_residual:e} above {:e} (condition estimate {condition_estimate:e})",
        cfg.tolerance
    )))
}

impl BiorthogonalFamily {
    /// ψj(t) for j = 1..=size.
    pub fn eval(&self, j: usize, t: f64) -> Float {
        let bits = self.bits;
        let tt = mp::real(bits, t);
        let terms: Vec<Float> = (0..self.size)
            .map(|k| {
                let e = Float::with_val(bits, -(mp::lambda(k + 1, bits) * &tt)).exp();
                Float::with_val(bits, &self.coeff[(j - 1, k)] * e)
            })
            .collect();
        mp::pairwise_sum(&terms, bits)
    }

    /// Least-squares fit of log‖ψn‖ against n.
    pub fn norm_growth(&self) -> Result<RateFit> {
        let xs: Vec<f64> = (1..=self.size).map(|n| n as f64).collect();
        let ys: Vec<f64> = self.norms.iter().map(mp::ln_f64).collect();
        linear_fit(&xs, &ys)
    }

    pub fn meta(&self) -> FamilyMeta {
        FamilyMeta {
            size: self.size,
            horizon: self.horizon,
            bits: self.bits,
            residual: self.residual.to_f64(),
            condition_estimate: self.condition_estimate,
        }
    }
}

/// Growth yardstick K n² Π(1+n²/j²) / |Π_{j≠n}(1−n²/j²)| = K n² · 2 sinh(πn)/(πn).
pub fn fattorini_reference(n: u64, k: f64, bits: u32) -> Float {
    let npi = Float::with_val(bits, mp::pi(bits) * n);
    let ratio = Float::with_val(bits, npi.sinh_ref()) * 2u32 / &npi;
    ratio * mp::real(bits, k) * (n * n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyMeta {
    pub size: usize,
    pub horizon: f64,
    pub bits: u32,
    pub residual: f64,
    pub condition_estimate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlReport {
    pub control: ScalarControl,
    /// ‖u(T)‖ / ‖u0‖ in the truncated model, 0 for u0 = 0.
    pub residual_norm: f64,
    /// ε^{1/2}·‖control‖ for interval profiles.
    pub eps_half_norm: Option<f64>,
    pub bits: u32,
    pub modes: usize,
    pub family: Option<FamilyMeta>,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    profile: &'a SpatialProfile,
    horizon: f64,
    signal: &'static str,
    coefficients: Vec<f64>,
    l2_norm: f64,
    residual_norm: f64,
    eps_half_norm: Option<f64>,
    bits: u32,
    modes: usize,
    family: &'a Option<FamilyMeta>,
}

impl Serialize for ControlReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (signal, coefficients) = match &self.control.signal {
            Signal::ExpSum { coeffs, orientation: Orientation::Backward } => {
                ("expsum-backward", coeffs.iter().map(|c| c.to_f64()).collect())
            }
            Signal::ExpSum { coeffs, orientation: Orientation::Forward } => {
                ("expsum-forward", coeffs.iter().map(|c| c.to_f64()).collect())
            }
            Signal::Sampled { values } => ("sampled", values.clone()),
            Signal::PerMode { eta } => ("per-mode", eta.iter().map(|c| c.to_f64()).collect()),
        };
        ReportJson {
            profile: &self.control.profile,
            horizon: self.control.horizon,
            signal,
            coefficients,
            l2_norm: self.control.l2_norm,
            residual_norm: self.residual_norm,
            eps_half_norm: self.eps_half_norm,
            bits: self.bits,
            modes: self.modes,
            family: &self.family,
        }
        .serialize(s)
    }
}

/// ‖u(T)‖/‖u0‖ after driving `u0` with `ctrl`.
pub fn simulated_residual(u0: &FourierState, ctrl: &ScalarControl) -> Result<f64> {
    let n0 = u0.norm();
    if n0.is_zero() {
        return Ok(0.0);
    }
    let out = evolve_forced(u0, ctrl, ctrl.horizon)?;
    Ok((out.state.norm() / n0).to_f64())
}

fn eps_half(profile: &SpatialProfile, norm: f64) -> Option<f64> {
    match profile {
        SpatialProfile::Interval { half_width, .. } => Some(half_width.sqrt() * norm),
        SpatialProfile::Dirac { .. } => None,
    }
}

/// a_k = −Σn (μn e^{−λnT}/bn) C_nk, so f(t) = Σk a_k e^{−λk(T−t)}.
fn moment_signal(
    u0: &FourierState,
    t: f64,
    profile: &SpatialProfile,
    family: &BiorthogonalFamily,
    on_zero: impl Fn(usize) -> Error,
) -> Result<ScalarControl> {
    if (family.horizon - t).abs() > 1e-15 * t.max(1.0) {
        return Err(Error::HorizonMismatch { control: family.horizon, requested: t });
    }
    if u0.len() > family.size {
        return Err(Error::invalid(format!("family of size {} cannot control {} modes", family.size, u0.len())));
    }
    let bits = family.bits;
    let n = family.size;
    let table = OverlapTable::new(profile, n, bits)?;
    let tt = mp::real(bits, t);
    let mut weights = vec![Float::new(bits); n];
    for (i, mu) in u0.coeffs().iter().enumerate() {
        if mu.is_zero() {
            continue;
        }
        let b = table.b(i + 1);
        if b.is_zero() {
            return Err(on_zero(i + 1));
        }
        let decay = Float::with_val(bits, -(mp::lambda(i + 1, bits) * &tt)).exp();
        weights[i] = Float::with_val(bits, mu * decay) / b;
    }
    let coeffs = (0..n)
        .map(|k| {
            let terms: Vec<Float> = (0..n).map(|j| Float::with_val(bits, &weights[j] * &family.coeff[(j, k)])).collect();
            -mp::pairwise_sum(&terms, bits)
        })
        .collect();
    ScalarControl::new(profile.clone(), Signal::ExpSum { coeffs, orientation: Orientation::Backward }, t)
}

fn report(u0: &FourierState, control: ScalarControl, modes: usize, bits: u32, family: Option<FamilyMeta>) -> Result<ControlReport> {
    let state = u0.resized(modes.max(u0.len()))?.with_precision(bits);
    let residual_norm = simulated_residual(&state, &control)?;
    let eps_half_norm = eps_half(&control.profile, control.l2_norm);
    Ok(ControlReport { control, residual_norm, eps_half_norm, bits, modes, family })
}

/// Separated control f(t)·χ[x0−ε′, x0+ε′] from the moment formula.
pub fn moment_control_interval(
    u0: &FourierState,
    t: f64,
    x0: &AnchorPoint,
    eps_prime: f64,
    family: &BiorthogonalFamily,
) -> Result<ControlReport> {
    let profile = SpatialProfile::interval(x0.clone(), eps_prime)?;
    let ctrl = moment_signal(u0, t, &profile, family, |mode| Error::NotControllableByProfile { mode })?;
    report(u0, ctrl, family.size, family.bits, Some(family.meta()))
}

/// Scalar control ψ(t)δ_{x0} from the moment formula with bn = √2 sin(nπx0).
pub fn moment_control_point(u0: &FourierState, t: f64, x0: &AnchorPoint, family: &BiorthogonalFamily) -> Result<ControlReport> {
    let profile = SpatialProfile::dirac(x0.clone());
    let ctrl = moment_signal(u0, t, &profile, family, |mode| Error::NotPointwiseControllable { mode })?;
    report(u0, ctrl, family.size, family.bits, Some(family.meta()))
}

/// Minimal-norm control in the span of e^{−λn(T−t)}φn restricted to the
/// profile: G η = −(μn e^{−λnT}).
pub fn hum_optimal_control(u0: &FourierState, t: f64, profile: &SpatialProfile, n: usize, bits: u32) -> Result<ControlReport> {
    hum_optimal_control_with(u0, t, profile, n, &[bits])
}

/// As [`hum_optimal_control`], retrying up the precision ladder while the
/// Gramian factors as singular.
pub fn hum_optimal_control_with(
    u0: &FourierState,
    t: f64,
    profile: &SpatialProfile,
    n: usize,
    ladder: &[u32],
) -> Result<ControlReport> {
    if n == 0 || u0.len() > n {
        return Err(Error::invalid(format!("truncation {n} cannot hold a state with {} modes", u0.len())));
    }
    let Some(&top) = ladder.last() else {
        return Err(Error::invalid("empty precision ladder"));
    };
    for &bits in ladder {
        let g = build_gramian(t, profile, n, bits)?;
        let Ok(lu) = FullPivotLu::factor(&g.matrix) else { continue };
        let state = u0.resized(n)?.with_precision(bits);
        let decayed = crate::spectral::evolve_free(&state, t)?;
        let rhs: Vec<Float> = decayed.coeffs().iter().map(|c| Float::with_val(bits, -c)).collect();
        let eta = lu.solve(&rhs);
        let signal = match profile {
            SpatialProfile::Interval { .. } => Signal::PerMode { eta },
            SpatialProfile::Dirac { .. } => {
                let table = OverlapTable::new(profile, n, bits)?;
                let coeffs = eta.iter().enumerate().map(|(k, e)| Float::with_val(bits, e * table.b(k + 1))).collect();
                Signal::ExpSum { coeffs, orientation: Orientation::Backward }
            }
        };
        let ctrl = ScalarControl::new(profile.clone(), signal, t)?;
        return report(u0, ctrl, n, bits, None);
    }
    Err(Error::NotControllableInTruncation { bits: top })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupRow {
    pub eps: f64,
    pub norm: Option<f64>,
    /// ε^{1/2}·‖control‖.
    pub scaled_norm: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

/// HUM controls on [x0−ε, x0+ε] for each ε, with ε^{1/2}-scaled norms.
/// Failures are recorded per row.
pub fn blowup_diagnostic(
    u0: &FourierState,
    t: f64,
    x0: &AnchorPoint,
    eps_list: &[f64],
    n: usize,
    bits: u32,
) -> Result<Vec<BlowupRow>> {
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::invalid("eps_list must be positive and strictly decreasing"));
    }
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let run = SpatialProfile::interval(x0.clone(), eps)
                .and_then(|p| hum_optimal_control(u0, t, &p, n.max(u0.len()), bits));
            match run {
                Ok(r) => BlowupRow {
                    eps,
                    norm: Some(r.control.l2_norm),
                    scaled_norm: r.eps_half_norm,
                    residual: Some(r.residual_norm),
                    error: None,
                },
                Err(e) => BlowupRow { eps, norm: None, scaled_norm: None, residual: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

/// ψ(t) = ∫_{x0−ε}^{x0+ε} ψε(y,t) dy as a pointwise control at x0.
pub fn rescale_and_average(ctrl: &ScalarControl, delta: f64) -> Result<ScalarControl> {
    let SpatialProfile::Interval { center, half_width } = &ctrl.profile else {
        return Err(Error::invalid("rescale_and_average needs an interval profile"));
    };
    let eps = *half_width;
    if !(eps <= delta) {
        return Err(Error::invalid(format!("half-width {eps} exceeds delta {delta}")));
    }
    crate::spectral::check_interval(center, &mp::real(mp::DEFAULT_BITS, delta))?;
    let profile = SpatialProfile::dirac(center.clone());
    let mass = 2.0 * eps;
    let signal = match &ctrl.signal {
        Signal::ExpSum { coeffs, orientation } => {
            let bits = coeffs.iter().map(|c| c.prec()).max().unwrap_or(mp::DEFAULT_BITS);
            let m = Float::with_val(bits, mp::f64_to_rational(mass));
            Signal::ExpSum { coeffs: coeffs.iter().map(|c| Float::with_val(bits, c * &m)).collect(), orientation: *orientation }
        }
        Signal::Sampled { values } => Signal::Sampled { values: values.iter().map(|v| v * mass).collect() },
        Signal::PerMode { eta } => {
            let bits = eta.iter().map(|c| c.prec()).max().unwrap_or(mp::DEFAULT_BITS);
            let e = mp::real(bits + 16, eps);
            let sqrt2 = Float::with_val(bits, 2).sqrt();
            let coeffs = eta
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    overlap_interval_mp(k as u64 + 1, center, &e).map(|o| Float::with_val(bits, h * Float::with_val(bits, o * &sqrt2)))
                })
                .collect::<Result<Vec<_>>>()?;
            Signal::ExpSum { coeffs, orientation: Orientation::Backward }
        }
    };
    ScalarControl::new(profile, signal, ctrl.horizon)
}
