//! The shrinking half-width sequence εj kept away from (1/n)ℤ, and the
//! lower bound on interval overlaps it buys.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::diophantine::AnchorPoint;
use crate::error::{Error, Result};
use crate::mp;
use crate::spectral::{check_interval, overlap_interval_mp};

/// Rejection draws allowed per level.
pub const DRAW_BUDGET: usize = 10_000;

const BITS: u32 = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub delta: f64,
    /// Number of values ε0 … ε_{J−1}.
    pub levels: usize,
    /// Diophantine condition verified for n = 1..=n_check.
    pub n_check: u64,
    pub seed: u64,
    /// ε0 is drawn from (0, eps0_max).
    pub eps0_max: f64,
}

impl SequenceConfig {
    pub fn new(delta: f64, levels: usize, n_check: u64, seed: u64) -> Self {
        SequenceConfig { delta, levels, n_check, seed, eps0_max: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsSequence {
    pub delta: f64,
    pub c_const: f64,
    pub values: Vec<f64>,
    pub n_checked: u64,
    /// min over j and n ≤ n_checked of φn^j / (C εj e^{−n²π²δ}).
    pub margins: f64,
    /// Same minimum per level.
    pub level_margins: Vec<f64>,
    /// Draws spent per level.
    pub draws: Vec<usize>,
    pub seed: u64,
    pub eps0_max: f64,
}

/// C = (4 Σ_{n≥1} (n+1) e^{−n²π²δ})⁻¹, summed until the terms drop below
/// 2^-bits of the partial sum.
pub fn lemma_constant(delta: f64, bits: u32) -> Result<Float> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta must be positive and finite"));
    }
    let d = mp::real(bits, delta);
    let cutoff = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut terms = Vec::new();
    let mut n = 1usize;
    loop {
        let e = Float::with_val(bits, -(mp::lambda(n, bits) * &d)).exp();
        let term = e * (n as u64 + 1);
        let tiny = terms.first().is_some_and(|first: &Float| term < Float::with_val(bits, first * &cutoff));
        terms.push(term);
        if tiny {
            break;
        }
        n += 1;
    }
    let s = mp::pairwise_sum(&terms, bits) * 4u32;
    Ok(Float::with_val(bits, 1) / s)
}

/// dist(ε, (1/n)ℤ) exactly.
pub fn dist_to_lattice(eps: &Rational, n: u64) -> Rational {
    let scaled = Rational::from(eps * n);
    let (_, fl) = scaled.clone().fract_floor(Integer::new());
    let lo = Rational::from(&scaled - &fl);
    let hi = Rational::from(1) - &lo;
    let d = if lo < hi { lo } else { hi };
    d / n
}

struct Exclusion {
    /// e^{−n²π²δ} for n = 1..=n_check.
    decay: Vec<Float>,
    c: Float,
}

impl Exclusion {
    /// min_n dist(ε, ℤ/n)/(scale·C e^{−n²π²δ}); > 1 means ε is admissible.
    fn margin(&self, eps: &Rational, scale: &Float) -> Float {
        let mut best = Float::with_val(BITS, f64::INFINITY);
        for (k, decay) in self.decay.iter().enumerate() {
            let dist = mp::from_rational(BITS, &dist_to_lattice(eps, k as u64 + 1));
            let radius = Float::with_val(BITS, &self.c * decay) * scale;
            let m = dist / radius;
            if m < best {
                best = m;
            }
        }
        best
    }

    /// Upper bound on the excluded fraction of (lo, hi) over n ≤ n_check.
    fn measure_bound(&self, lo: f64, hi: f64, scale: &Float) -> f64 {
        let width = hi - lo;
        let total: f64 = self
            .decay
            .iter()
            .enumerate()
            .map(|(k, decay)| {
                let n = (k + 1) as f64;
                let r = (Float::with_val(BITS, &self.c * decay) * scale).to_f64();
                (n * width + 2.0) * 2.0 * r
            })
            .sum();
        (total / width).min(1.0)
    }
}

pub fn construct_eps_sequence(cfg: &SequenceConfig) -> Result<EpsSequence> {
    if cfg.levels == 0 {
        return Err(Error::invalid("need at least one level"));
    }
    if cfg.n_check == 0 {
        return Err(Error::invalid("n_check must be >= 1"));
    }
    if !(cfg.eps0_max > 0.0 && cfg.eps0_max <= 1.0) {
        return Err(Error::invalid("eps0_max must lie in (0, 1]"));
    }
    let c = lemma_constant(cfg.delta, BITS)?;
    let d = mp::real(BITS, cfg.delta);
    let decay = (1..=cfg.n_check as usize).map(|n| Float::with_val(BITS, -(mp::lambda(n, BITS) * &d)).exp()).collect();
    let excl = Exclusion { decay, c: c.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut values = Vec::with_capacity(cfg.levels);
    let mut level_margins = Vec::with_capacity(cfg.levels);
    let mut draws = Vec::with_capacity(cfg.levels);
    let one = Float::with_val(BITS, 1);
    for level in 0..cfg.levels {
        let (lo, hi, scale) = match values.last() {
            None => (0.0, cfg.eps0_max, one.clone()),
            Some(&prev) => (prev / 2.0, prev, mp::real(BITS, prev)),
        };
        let mut spent = 0;
        let accepted = loop {
            if spent == DRAW_BUDGET {
                let excluded_fraction = excl.measure_bound(lo, hi, &scale);
                return Err(Error::ConstructionFailed { level, draws: spent, excluded_fraction });
            }
            spent += 1;
            let x: f64 = rng.gen_range(lo..hi);
            if x <= lo {
                continue;
            }
            let r = mp::f64_to_rational(x);
            if excl.margin(&r, &scale) >= 1 {
                break x;
            }
        };
        let r = mp::f64_to_rational(accepted);
        // the lemma's condition is stated with εj in the radius at every level
        let m = excl.margin(&r, &mp::real(BITS, accepted));
        level_margins.push(m.to_f64());
        values.push(accepted);
        draws.push(spent);
    }
    let margins = level_margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EpsSequence {
        delta: cfg.delta,
        c_const: c.to_f64(),
        values,
        n_checked: cfg.n_check,
        margins,
        level_margins,
        draws,
        seed: cfg.seed,
        eps0_max: cfg.eps0_max,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IneqsinCheck {
    /// min over the grid of |∫ sin(nπx)| / (εj |sin(nπx0)| e^{−n²π²δ}).
    pub min_ratio: f64,
    /// (j, n) attaining the minimum.
    pub witness: (usize, u64),
    pub skipped_resonant: Vec<u64>,
    pub evaluated: usize,
}

pub fn check_ineqsin(
    x0: &AnchorPoint,
    seq: &EpsSequence,
    n_range: std::ops::RangeInclusive<u64>,
) -> Result<IneqsinCheck> {
    let bits = BITS;
    let eps: Vec<Float> = seq.values.iter().map(|&e| mp::real(bits, e)).collect();
    for e in &eps {
        check_interval(x0, e)?;
    }
    let d = mp::real(bits, seq.delta);
    let mut skipped = Vec::new();
    let mut best: Option<(Float, usize, u64)> = None;
    let mut evaluated = 0;
    for n in n_range {
        if n == 0 {
            continue;
        }
        let s = x0.sin_npi(n, bits)?.abs();
        if s.is_zero() {
            skipped.push(n);
            continue;
        }
        let decay = Float::with_val(bits, -(mp::lambda(n as usize, bits) * &d)).exp();
        let base = Float::with_val(bits, &s * &decay);
        for (j, e) in eps.iter().enumerate() {
            let ov = overlap_interval_mp(n, x0, e)?.abs();
            let ratio = ov / Float::with_val(bits, e * &base);
            evaluated += 1;
            if best.as_ref().map_or(true, |(b, _, _)| ratio < *b) {
                best = Some((ratio, j, n));
            }
        }
    }
    match best {
        Some((r, j, n)) => Ok(IneqsinCheck { min_ratio: r.to_f64(), witness: (j, n), skipped_resonant: skipped, evaluated }),
        None => Err(Error::EmptyGrid),
    }
}
