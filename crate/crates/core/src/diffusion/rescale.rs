//! Brownian rescaling `W^α(x) = W(α² x) / α`.
//!
//! `X` in `W` up to time `α⁴ t` equals `α²` times the diffusion in `αW^α` up
//! to time `t`, so long horizons in `W` become short ones in the scaled frame.

use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::environment::EnvironmentPath;

/// Maps quantities of the scaled frame back to the original one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaling {
    pub alpha: f64,
}

impl Rescaling {
    pub fn time_to_original(&self, t: f64) -> f64 {
        self.alpha.powi(4) * t
    }

    pub fn time_to_scaled(&self, t: f64) -> f64 {
        t / self.alpha.powi(4)
    }

    pub fn space_to_original(&self, x: f64) -> f64 {
        self.alpha * self.alpha * x
    }

    pub fn space_to_scaled(&self, x: f64) -> f64 {
        x / (self.alpha * self.alpha)
    }

    pub fn local_time_to_original(&self, l: f64) -> f64 {
        self.alpha * self.alpha * l
    }

    /// Scaled-frame horizon `α⁻⁴ e^{α h}` matching original time `e^{α h}`.
    pub fn horizon(&self, h: f64) -> f64 {
        (self.alpha * h - 4.0 * self.alpha.ln()).exp()
    }
}

/// Grid path of `W^α`: spacing `step / α²`, values `W / α`.
pub fn rescale_to_unit_valley(
    env: &EnvironmentPath,
    alpha: f64,
) -> Result<(EnvironmentPath, Rescaling), DiffusionError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(DiffusionError::InvalidParameter("alpha must be positive"));
    }
    let values = if alpha == 1.0 {
        env.values().to_vec()
    } else {
        env.values().iter().map(|w| w / alpha).collect()
    };
    let scaled = EnvironmentPath::from_values(env.step() / (alpha * alpha), env.origin(), values)?;
    Ok((scaled, Rescaling { alpha }))
}
