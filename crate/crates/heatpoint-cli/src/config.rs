//! Run configuration: one flat JSON document, flags override top-level fields.

use std::path::{Path, PathBuf};

use heatpoint_core::minimal_time::build_liouville_point;
use heatpoint_core::AnchorPoint;
use serde::{Deserialize, Serialize};

/// Either an explicit point or a request to construct one with a target
/// minimal time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorInput {
    Constructed(ConstructedAnchor),
    Point(AnchorPoint),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructedAnchor {
    pub kind: ConstructedKind,
    pub target_t0: f64,
    pub scales: usize,
    pub max_bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstructedKind {
    Constructed,
}

impl AnchorInput {
    pub fn constructed(target_t0: f64, scales: usize) -> Self {
        AnchorInput::Constructed(ConstructedAnchor {
            kind: ConstructedKind::Constructed,
            target_t0,
            scales,
            max_bits: 1 << 20,
        })
    }

    pub fn resolve(&self) -> heatpoint_core::Result<AnchorPoint> {
        match self {
            AnchorInput::Point(x) => Ok(x.clone()),
            AnchorInput::Constructed(c) => build_liouville_point(c.target_t0, c.scales, c.max_bits),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub anchor: AnchorInput,
    pub horizon: f64,
    /// Half-widths eps_start·eps_ratio^k for k < eps_count.
    pub eps_start: f64,
    pub eps_ratio: f64,
    pub eps_count: usize,
    /// Truncation doubles from n_start while 2N ≤ n_max.
    pub n_start: usize,
    pub n_max: usize,
    /// Precision ladder in bits, tried in order.
    pub bits: Vec<u32>,
    /// Relative sqrt-scale change between N and 2N accepted as converged.
    pub obs_tol: f64,
    /// Simulated residual above which a control counts as failed.
    pub residual_tol: f64,
    pub classify_n_max: u64,
    /// Initial datum as coefficients of φ1, φ2, …
    pub datum: Vec<f64>,
    pub control_modes: usize,
    /// Averaging radius for the pointwise controls built from interval ones.
    pub average_delta: f64,
    pub signal_samples: usize,
    pub lemma_delta: f64,
    pub lemma_levels: usize,
    pub lemma_n_check: u64,
    pub lemma_eps0_max: f64,
    pub family_horizon: f64,
    pub family_size: usize,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            anchor: AnchorInput::Point(AnchorPoint::sqrt2_minus_1()),
            horizon: 0.1,
            eps_start: 0.125,
            eps_ratio: 0.5,
            eps_count: 7,
            n_start: 8,
            n_max: 64,
            bits: vec![128, 256, 512],
            obs_tol: 1e-2,
            residual_tol: 1e-6,
            classify_n_max: 1000,
            datum: vec![1.0],
            control_modes: 8,
            average_delta: 0.125,
            signal_samples: 201,
            lemma_delta: 0.05,
            lemma_levels: 6,
            lemma_n_check: 40,
            lemma_eps0_max: 0.4,
            family_horizon: 1.0,
            family_size: 10,
            out: PathBuf::from("out"),
            seed: 0,
            jobs: 0,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn check(ok: bool, msg: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError(msg.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn eps_grid(&self) -> Vec<f64> {
        let mut e = self.eps_start;
        (0..self.eps_count)
            .map(|_| {
                let v = e;
                e *= self.eps_ratio;
                v
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.horizon > 0.0 && self.horizon.is_finite(), "horizon must be positive")?;
        check(self.eps_count > 0, "eps grid is empty")?;
        check(self.eps_start > 0.0 && self.eps_start < 0.5, "eps_start must lie in (0, 1/2)")?;
        check(self.eps_ratio > 0.0 && self.eps_ratio < 1.0, "eps_ratio must lie in (0, 1)")?;
        check(self.eps_grid().windows(2).all(|w| w[1] < w[0]) && self.eps_grid().iter().all(|&e| e > 0.0), "eps grid underflows")?;
        check(self.n_start > 0 && 2 * self.n_start <= self.n_max, "need 0 < 2·n_start ≤ n_max")?;
        check(!self.bits.is_empty(), "bits ladder is empty")?;
        check(self.bits.windows(2).all(|w| w[1] > w[0]), "bits ladder must be increasing")?;
        check(self.bits[0] >= 64, "precision below 64 bits")?;
        for (name, v) in [("obs_tol", self.obs_tol), ("residual_tol", self.residual_tol)] {
            check(v > 0.0 && v.is_finite(), &format!("{name} must be positive"))?;
        }
        check(self.classify_n_max >= 2, "classify_n_max must be at least 2")?;
        check(!self.datum.is_empty() && self.datum.iter().all(|c| c.is_finite()), "datum needs finite coefficients")?;
        check(self.datum.len() <= self.control_modes, "datum has more modes than control_modes")?;
        check(self.average_delta > 0.0, "average_delta must be positive")?;
        check(self.signal_samples >= 2, "signal_samples must be at least 2")?;
        check(self.lemma_delta > 0.0 && self.lemma_levels > 0 && self.lemma_n_check > 0, "lemma parameters must be positive")?;
        check(self.lemma_eps0_max > 0.0 && self.lemma_eps0_max <= 1.0, "lemma_eps0_max must lie in (0, 1]")?;
        check(self.family_horizon > 0.0 && self.family_size > 0, "family parameters must be positive")?;
        if let AnchorInput::Constructed(c) = &self.anchor {
            check(c.target_t0 > 0.0 && c.scales > 0, "constructed anchor needs target_t0 > 0 and scales > 0")?;
        }
        Ok(())
    }
}
