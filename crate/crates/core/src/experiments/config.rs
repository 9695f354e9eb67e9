use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// All knobs of an experiment run. Unknown JSON keys are rejected; missing
/// ones take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub replicas: usize,
    /// Level fraction for the environment functional, in `(0, 1)`.
    pub r: f64,
    /// Half-width of the window around the valley bottom.
    pub window: f64,
    /// Tolerances for the window discrepancy.
    pub deltas: Vec<f64>,
    /// Tolerance whose pass fraction is held to `pass_fraction`.
    pub delta_star: f64,
    /// Offsets from the valley bottom for the profile marginals.
    pub marginal_offsets: Vec<f64>,
    /// Grid step of the potential in the original frame.
    pub dx: f64,
    /// Initial environment half-width in units of `α²`.
    pub initial_half_width: f64,
    /// Widening cap in units of `α²`.
    pub widening_cap: f64,
    pub chain_max_steps: u64,
    pub bessel_dt: f64,
    pub bessel_cutoff: f64,
    pub besq_dt: f64,
    pub besq_max_steps: u64,
    /// Reference draws of the limit laws.
    pub reference_samples: usize,
    /// Samples per side in the identity check.
    pub identity_samples: usize,
    pub bootstrap_resamples: usize,
    pub seed: u64,
    pub workers: usize,
    pub ks_level: f64,
    pub ks_cap: f64,
    pub exponent_ks_cap: f64,
    pub marginal_ks_cap: f64,
    pub position_ks_cap: f64,
    pub pass_fraction: f64,
    pub slack: f64,
    pub normalization_tol: f64,
    pub max_clamp_rate: f64,
    pub max_failure_rate: f64,
    pub median_band: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alphas: vec![5.0, 8.0, 11.0],
            replicas: 300,
            r: 0.5,
            window: 2.0,
            deltas: vec![0.1, 0.25, 0.5, 1.0],
            delta_star: 0.5,
            marginal_offsets: vec![-1.0, 0.0, 1.0],
            dx: 0.05,
            initial_half_width: 2.0,
            widening_cap: 64.0,
            chain_max_steps: 2_000_000_000,
            bessel_dt: 0.01,
            bessel_cutoff: 1e4,
            besq_dt: 1e-5,
            besq_max_steps: 100_000_000,
            reference_samples: 2000,
            identity_samples: 5000,
            bootstrap_resamples: 2000,
            seed: 20_240_601,
            workers: 1,
            ks_level: 0.01,
            ks_cap: 0.15,
            exponent_ks_cap: 1.0,
            marginal_ks_cap: 1.0,
            position_ks_cap: 1.0,
            pass_fraction: 0.6,
            slack: 1.1,
            normalization_tol: 0.02,
            max_clamp_rate: 0.1,
            max_failure_rate: 0.05,
            median_band: 0.2,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return bad("alphas must be positive and finite");
        }
        if self.alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("alphas must be strictly increasing");
        }
        if self.replicas == 0 {
            return bad("replicas must be >= 1");
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r must lie strictly between 0 and 1");
        }
        if !(self.window > 0.0) || self.deltas.iter().any(|d| !(*d >= 0.0)) {
            return bad("window must be positive and deltas nonnegative");
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return bad("dx must be positive");
        }
        if !(self.initial_half_width > 0.0 && self.widening_cap >= self.initial_half_width) {
            return bad("need 0 < initial_half_width <= widening_cap");
        }
        if !(self.bessel_dt > 0.0 && self.besq_dt > 0.0 && self.bessel_cutoff > 0.0) {
            return bad("Bessel step sizes and cutoff must be positive");
        }
        if self.reference_samples == 0 || self.identity_samples == 0 {
            return bad("sample counts must be >= 1");
        }
        if !(self.ks_level > 0.0 && self.ks_level < 1.0 && self.slack >= 1.0) {
            return bad("ks_level in (0,1) and slack >= 1 required");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        Ok(())
    }
}
