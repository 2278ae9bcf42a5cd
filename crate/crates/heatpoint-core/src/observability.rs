//! Truncated observability Gramians and their smallest eigenvalues.

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::diophantine::{abs_sin_npi, theta, AnchorPoint};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};
use crate::mp;
use crate::spectral::{FourierState, OverlapTable, SpatialProfile};

/// Which unit sphere the quadratic form is read on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Coefficients of u(0): G_mn = 2 W_mn (1 − e^{−(λm+λn)T})/(λm+λn).
    InitialState,
    /// Coefficients of u(T): G̃ = D G D with D = diag(e^{λn T}).
    TerminalState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gramian {
    pub matrix: Matrix,
    pub horizon: f64,
    pub profile: SpatialProfile,
    pub normalization: Normalization,
}

impl Gramian {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn bits(&self) -> u32 {
        self.matrix.bits()
    }
}

fn assemble(t: f64, profile: &SpatialProfile, n: usize, bits: u32, norm: Normalization) -> Result<Gramian> {
    if !(t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("N must be >= 1"));
    }
    let table = OverlapTable::new(profile, n, bits)?;
    let w = bits + 16;
    let tt = mp::real(w, t);
    let lam: Vec<Float> = (1..=n).map(|k| mp::lambda(k, w)).collect();
    let mut matrix = Matrix::zeros(n, n, bits);
    for i in 0..n {
        for j in i..n {
            let x = Float::with_val(w, &lam[i] + &lam[j]) * &tt;
            let time = match norm {
                Normalization::InitialState => mp::decay_integral(&x),
                Normalization::TerminalState => mp::growth_integral(&x),
            } * &tt;
            let g = Float::with_val(bits, table.w(i + 1, j + 1) * time * 2u32);
            matrix[(j, i)] = g.clone();
            matrix[(i, j)] = g;
        }
    }
    Ok(Gramian { matrix, horizon: t, profile: profile.clone(), normalization: norm })
}

/// Gramian on initial data, entries 2 W_mn (1 − e^{−(λm+λn)T})/(λm+λn).
pub fn build_gramian(t: f64, profile: &SpatialProfile, n: usize, bits: u32) -> Result<Gramian> {
    assemble(t, profile, n, bits, Normalization::InitialState)
}

/// Gramian on terminal data, entries 2 W_mn (e^{(λm+λn)T} − 1)/(λm+λn).
pub fn build_terminal_gramian(t: f64, profile: &SpatialProfile, n: usize, bits: u32) -> Result<Gramian> {
    assemble(t, profile, n, bits, Normalization::TerminalState)
}

/// Escalation threshold for the precision ladder.
pub const LADDER_THRESHOLD: f64 = 1e-20;

/// Two rungs agreeing to this relative tolerance confirm a value.
pub const LADDER_AGREEMENT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ObsConfig {
    /// Relative sqrt_scale change between N and 2N counted as converged.
    pub tol: f64,
    /// Precisions tried in order.
    pub ladder: Vec<u32>,
    pub max_sweeps: usize,
    /// Require two consecutive rungs to agree before accepting a value.
    /// Without it only lambda_min < LADDER_THRESHOLD escalates.
    pub verify: bool,
}

impl Default for ObsConfig {
    fn default() -> Self {
        ObsConfig { tol: 1e-2, ladder: vec![128, 256, 512], max_sweeps: 100, verify: true }
    }
}

impl ObsConfig {
    pub fn with_tol(tol: f64) -> Self {
        ObsConfig { tol, ..Default::default() }
    }
}

/// Smallest eigenvalue of the terminal Gramian at one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedConstant {
    pub lambda_min: Float,
    /// Initial datum μ = D v, with v the unit eigenvector; ‖u(T)‖ = 1.
    pub minimizing_vector: FourierState,
    pub precision_bits: u32,
    /// The value agreed with the previous rung of the ladder.
    pub precision_verified: bool,
    pub sweeps: usize,
}

fn solve_at(t: f64, profile: &SpatialProfile, n: usize, bits: u32, max_sweeps: usize) -> Result<Option<TruncatedConstant>> {
    let g = build_terminal_gramian(t, profile, n, bits)?;
    let eig = match jacobi_eigen(&g.matrix, max_sweeps) {
        Ok(e) => e,
        Err(_) => return Ok(None),
    };
    let lambda_min = eig.values[0].clone();
    let v = eig.vectors.column(0);
    let tt = mp::real(bits, t);
    let mu = v
        .iter()
        .enumerate()
        .map(|(k, c)| Float::with_val(bits, c * Float::with_val(bits, mp::lambda(k + 1, bits) * &tt).exp()))
        .collect();
    Ok(Some(TruncatedConstant {
        lambda_min,
        minimizing_vector: FourierState::new(mu)?,
        precision_bits: bits,
        precision_verified: false,
        sweeps: eig.sweeps,
    }))
}

pub fn truncated_constant(t: f64, profile: &SpatialProfile, n: usize, cfg: &ObsConfig) -> Result<TruncatedConstant> {
    if cfg.ladder.is_empty() {
        return Err(Error::invalid("empty precision ladder"));
    }
    let mut prev: Option<TruncatedConstant> = None;
    let mut failures = Vec::new();
    for &bits in &cfg.ladder {
        let Some(mut cur) = solve_at(t, profile, n, bits, cfg.max_sweeps)? else {
            failures.push(format!("no convergence at {bits} bits"));
            continue;
        };
        let small = cur.lambda_min < LADDER_THRESHOLD;
        if let Some(p) = &prev {
            cur.precision_verified = mp::rel_diff(&p.lambda_min, &cur.lambda_min) <= LADDER_AGREEMENT;
        }
        let accept = !small && (!cfg.verify || cur.precision_verified);
        prev = Some(cur);
        if accept {
            break;
        }
    }
    prev.ok_or_else(|| Error::precision(format!("eigen-solver failed: {}", failures.join("; "))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservabilityResult {
    /// Quadratic-scale constant: inf of ∫∫u² over ‖u(T)‖ = 1 in the truncation.
    pub lambda_min: Float,
    pub sqrt_scale: Float,
    pub n_used: usize,
    pub converged: bool,
    /// |s_N − s_2N| / s_2N for the sqrt scale.
    pub relative_change: f64,
    pub precision_bits: u32,
    pub precision_verified: bool,
    pub minimizing_vector: FourierState,
}

fn sqrt_clamped(x: &Float) -> Float {
    if x.is_sign_negative() || x.is_zero() {
        Float::new(x.prec())
    } else {
        Float::with_val(x.prec(), x.sqrt_ref())
    }
}

/// Relative change between consecutive truncation levels.
pub fn relative_change(coarse: &Float, fine: &Float) -> f64 {
    if fine.is_zero() && coarse.is_zero() {
        return 0.0;
    }
    if fine.is_zero() {
        return f64::INFINITY;
    }
    let bits = fine.prec().max(coarse.prec());
    (Float::with_val(bits, coarse - fine) / fine).abs().to_f64()
}

pub fn obs_constant(t: f64, profile: &SpatialProfile, n: usize, tol: f64) -> Result<ObservabilityResult> {
    obs_constant_with(t, profile, n, &ObsConfig::with_tol(tol))
}

/// Constant at truncation N, with the convergence flag from N versus 2N.
pub fn obs_constant_with(t: f64, profile: &SpatialProfile, n: usize, cfg: &ObsConfig) -> Result<ObservabilityResult> {
    if !(t > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::invalid("obs_constant needs T > 0 and tol > 0"));
    }
    let coarse = truncated_constant(t, profile, n, cfg)?;
    let fine = truncated_constant(t, profile, 2 * n, cfg)?;
    Ok(combine(coarse, &fine, n, cfg.tol))
}

/// Double N from `n_start` while 2N ≤ `n_max`, stopping at the first
/// converged pair. Returns the last pair computed, converged or not.
pub fn obs_constant_doubling(
    t: f64,
    profile: &SpatialProfile,
    n_start: usize,
    n_max: usize,
    cfg: &ObsConfig,
) -> Result<ObservabilityResult> {
    if n_start == 0 || 2 * n_start > n_max {
        return Err(Error::invalid(format!("need 0 < 2·n_start ≤ n_max, got {n_start} and {n_max}")));
    }
    if !(t > 0.0) || !(cfg.tol > 0.0) {
        return Err(Error::invalid("obs_constant needs T > 0 and tol > 0"));
    }
    let mut n = n_start;
    let mut coarse = truncated_constant(t, profile, n, cfg)?;
    loop {
        let fine = truncated_constant(t, profile, 2 * n, cfg)?;
        if 4 * n > n_max {
            return Ok(combine(coarse, &fine, n, cfg.tol));
        }
        let r = combine(coarse, &fine, n, cfg.tol);
        if r.converged {
            return Ok(r);
        }
        coarse = fine;
        n *= 2;
    }
}

pub(crate) fn combine(coarse: TruncatedConstant, fine: &TruncatedConstant, n: usize, tol: f64) -> ObservabilityResult {
    let s = sqrt_clamped(&coarse.lambda_min);
    let s2 = sqrt_clamped(&fine.lambda_min);
    let rc = relative_change(&s, &s2);
    ObservabilityResult {
        sqrt_scale: s,
        lambda_min: coarse.lambda_min,
        n_used: n,
        converged: rc < tol,
        relative_change: rc,
        precision_bits: coarse.precision_bits,
        precision_verified: coarse.precision_verified,
        minimizing_vector: coarse.minimizing_vector,
    }
}

/// Terminal-normalized quadratic form at the single mode n, an upper bound
/// for lambda_min of any truncation containing n.
pub fn single_mode_upper_bound(t: f64, x0: &AnchorPoint, eps: f64, n: u64, bits: u32) -> Result<Float> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if t == 0.0 {
        return Ok(Float::new(bits));
    }
    let w = bits + 16;
    let wnn = crate::spectral::overlap_product(n, n, x0, eps, w)?;
    let x = Float::with_val(w, mp::lambda(n as usize, w) * 2u32) * t;
    Ok(Float::with_val(bits, wnn * mp::growth_integral(&x) * t * 2u32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessPoint {
    pub n: u64,
    /// ε_k = θ_{n_k}.
    pub eps: Float,
    /// (2/3)^{1/2} ε_k^{1/2 + δ/(T+δ)}.
    pub bound: Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub points: Vec<WitnessPoint>,
    /// Indices that met the smallness test only because sin(nπx0) = 0.
    pub rejected_resonant: Vec<u64>,
}

/// Indices n ≤ n_max with |sin(nπx0)| ≤ e^{−n²π²(T+δ)}, the first `k` kept.
pub fn point2_witness(x0: &AnchorPoint, t: f64, delta: f64, k: usize, n_max: u64, bits: u32) -> Result<Witness> {
    if !(t > 0.0) || !(delta > 0.0) || k == 0 {
        return Err(Error::invalid("point2_witness needs T > 0, delta > 0, K >= 1"));
    }
    let mut points = Vec::new();
    let mut rejected_resonant = Vec::new();
    let exponent = 0.5 + delta / (t + delta);
    let two_thirds = Float::with_val(bits, 2) / 3u32;
    for n in 1..=n_max {
        if points.len() == k {
            break;
        }
        if x0.is_resonant(n) {
            rejected_resonant.push(n);
            continue;
        }
        let s = abs_sin_npi(n, x0, bits)?;
        let thresh = Float::with_val(bits, -(mp::lambda(n as usize, bits) * (t + delta))).exp();
        if s <= thresh {
            let eps = theta(n, x0, bits)?;
            let bound = two_thirds.clone().sqrt() * Float::with_val(bits, eps.clone().pow(exponent));
            points.push(WitnessPoint { n, eps, bound });
        }
    }
    if points.is_empty() {
        return Err(Error::NotApplicable { n_max, rejected: rejected_resonant });
    }
    Ok(Witness { points, rejected_resonant })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

/// Least squares of log C against log ε.
pub fn rate_fit(sweep: &[(f64, f64)]) -> Result<RateFit> {
    if sweep.len() < 4 {
        return Err(Error::invalid(format!("rate fit needs at least 4 points, got {}", sweep.len())));
    }
    if sweep.iter().any(|&(e, c)| !(e > 0.0) || !(c > 0.0) || !e.is_finite() || !c.is_finite()) {
        return Err(Error::invalid("rate fit needs positive finite values"));
    }
    let xs: Vec<f64> = sweep.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = sweep.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}

/// Ordinary least squares y ≈ intercept + slope·x; residual is the RMS.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("linear fit needs two samples of equal length, at least 2 points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit { slope, intercept, residual: (ss / n).sqrt(), points: xs.len() })
}

/// (2/3)^{1/2} ε^{1/2 + δ/(T+δ)} in f64, for tabulation.
pub fn witness_bound(eps: f64, t: f64, delta: f64) -> f64 {
    (2.0f64 / 3.0).sqrt() * eps.powf(0.5 + delta / (t + delta))
}
