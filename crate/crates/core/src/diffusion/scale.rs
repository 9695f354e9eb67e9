//! Scale function `S_α(x) = ∫_0^x e^{α W(y)} dy` and its inverse.

use crate::environment::EnvironmentPath;
use crate::numeric::{exprel, ln_exprel, log_add_exp, log_sub_exp};

use super::DiffusionError;

/// Tabulated scale function with exact segment integrals.
///
/// Breakpoints are kept both directly and as `ln|S|`; the direct table may
/// overflow to `±inf` far from the origin while the log mirror stays finite.
#[derive(Debug, Clone)]
pub struct ScaleMap {
    alpha: f64,
    step: f64,
    origin: usize,
    potential: Vec<f64>,
    breakpoints: Vec<f64>,
    ln_abs: Vec<f64>,
    identity: bool,
}

impl ScaleMap {
    pub fn new(env: &EnvironmentPath, alpha: f64) -> Result<Self, DiffusionError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(DiffusionError::InvalidParameter("alpha must be >= 0"));
        }
        let step = env.step();
        let origin = env.origin();
        let potential: Vec<f64> = env.values().iter().map(|w| alpha * w).collect();
        let identity = potential.iter().all(|&v| v == 0.0);
        let n = potential.len();
        let mut breakpoints = vec![0.0; n];
        let mut ln_abs = vec![f64::NEG_INFINITY; n];
        let seg = |j: usize| -> (f64, f64) {
            let (v0, v1) = (potential[j], potential[j + 1]);
            (
                v0.exp() * step * exprel(v1 - v0),
                v0 + step.ln() + ln_exprel(v1 - v0),
            )
        };
        for j in origin..n - 1 {
            let (s, ls) = seg(j);
            breakpoints[j + 1] = breakpoints[j] + s;
            ln_abs[j + 1] = log_add_exp(ln_abs[j], ls);
        }
        for j in (0..origin).rev() {
            let (s, ls) = seg(j);
            breakpoints[j] = breakpoints[j + 1] - s;
            ln_abs[j] = log_add_exp(ln_abs[j + 1], ls);
        }
        Ok(Self {
            alpha,
            step,
            origin,
            potential,
            breakpoints,
            ln_abs,
            identity,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `ln|S(x_j)|` at every knot (`-inf` at the origin).
    pub fn ln_breakpoints(&self) -> &[f64] {
        &self.ln_abs
    }

    fn knot_x(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.step
    }

    fn locate(&self, x: f64) -> Result<(usize, f64), DiffusionError> {
        let n = self.potential.len();
        let lo = self.knot_x(0);
        let hi = self.knot_x(n - 1);
        if !(x >= lo && x <= hi) {
            return Err(DiffusionError::OutsideEnvironment(x));
        }
        if n == 1 {
            return Ok((0, 0.0));
        }
        let j = ((x / self.step + self.origin as f64).floor() as usize).min(n - 2);
        Ok((j, (x - self.knot_x(j)).clamp(0.0, self.step)))
    }

    /// `αW(x)` on the interpolant.
    pub fn potential_at(&self, x: f64) -> Result<f64, DiffusionError> {
        let (j, u) = self.locate(x)?;
        if u == 0.0 {
            return Ok(self.potential[j]);
        }
        let (v0, v1) = (self.potential[j], self.potential[j + 1]);
        Ok(v0 + (v1 - v0) * u / self.step)
    }

    /// `S(x)`; may be `±inf` when the direct value overflows (see [`Self::ln_abs_at`]).
    pub fn evaluate(&self, x: f64) -> Result<f64, DiffusionError> {
        if self.identity {
            self.locate(x)?;
            return Ok(x);
        }
        let (j, u) = self.locate(x)?;
        if u == 0.0 {
            return Ok(self.breakpoints[j]);
        }
        let v0 = self.potential[j];
        let k = (self.potential[j + 1] - v0) / self.step;
        Ok(self.breakpoints[j] + v0.exp() * u * exprel(k * u))
    }

    /// `ln|S(x)|`, finite wherever `S(x) != 0`.
    pub fn ln_abs_at(&self, x: f64) -> Result<f64, DiffusionError> {
        let (j, u) = self.locate(x)?;
        if u == 0.0 {
            return Ok(self.ln_abs[j]);
        }
        let v0 = self.potential[j];
        let k = (self.potential[j + 1] - v0) / self.step;
        let piece = v0 + u.ln() + ln_exprel(k * u);
        // S(x) = S_j + piece: same sign to the right of 0, opposite to the left.
        if j >= self.origin {
            Ok(log_add_exp(self.ln_abs[j], piece))
        } else if self.ln_abs[j] >= piece {
            Ok(log_sub_exp(self.ln_abs[j], piece))
        } else {
            Ok(log_sub_exp(piece, self.ln_abs[j]))
        }
    }

    /// `S⁻¹(v)`: bisection over the breakpoints, then closed-form inversion on the segment.
    pub fn invert(&self, v: f64) -> Result<f64, DiffusionError> {
        let bp = &self.breakpoints;
        let n = bp.len();
        if !(v >= bp[0] && v <= bp[n - 1]) {
            return Err(DiffusionError::RangeExceeded(v));
        }
        if self.identity {
            return Ok(v);
        }
        if n == 1 {
            return Ok(0.0);
        }
        let j = (bp.partition_point(|&s| s <= v).max(1) - 1).min(n - 2);
        let rem = v - bp[j];
        if rem == 0.0 {
            return Ok(self.knot_x(j));
        }
        let v0 = self.potential[j];
        let k = (self.potential[j + 1] - v0) / self.step;
        let scaled = rem * (-v0).exp();
        let u = if k == 0.0 {
            scaled
        } else {
            (k * scaled).ln_1p() / k
        };
        Ok(self.knot_x(j) + u.clamp(0.0, self.step))
    }
}
