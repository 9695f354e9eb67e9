//! Shifted potentials, level crossings and exponential (Gibbs) weights.
//!
//! Integrals of `e^{-β W_m}` are exact on the piecewise-linear interpolant and
//! are carried as logarithms so that `β W_m` of a few hundred is harmless.

use serde::{Deserialize, Serialize};

use super::{EnvError, EnvironmentPath, Side};
use crate::numeric::{exprel, ln_exprel, log_sum_exp};

/// `W_c(x) = W(c + x) - W(c)` for a grid-aligned centre `c`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedPotential<'a> {
    base: &'a EnvironmentPath,
    center: usize,
}

impl<'a> ShiftedPotential<'a> {
    pub fn new(base: &'a EnvironmentPath, center: usize) -> Self {
        assert!(center < base.len(), "centre knot outside the environment");
        Self { base, center }
    }

    /// Centre at the knot nearest to `x`.
    pub fn at(base: &'a EnvironmentPath, x: f64) -> Result<Self, EnvError> {
        let c = base.nearest_knot(x).ok_or(EnvError::OutOfDomain(x))?;
        Ok(Self::new(base, c))
    }

    pub fn base(&self) -> &EnvironmentPath {
        self.base
    }

    pub fn center_index(&self) -> usize {
        self.center
    }

    pub fn center(&self) -> f64 {
        self.base.knot_x(self.center)
    }

    pub fn step(&self) -> f64 {
        self.base.step()
    }

    pub fn left_extent(&self) -> f64 {
        -(self.center as f64) * self.base.step()
    }

    pub fn right_extent(&self) -> f64 {
        (self.base.len() - 1 - self.center) as f64 * self.base.step()
    }

    /// Value at the knot `center + offset`.
    pub fn knot_value(&self, offset: isize) -> Option<f64> {
        let i = self.center as isize + offset;
        if i < 0 || i >= self.base.len() as isize {
            return None;
        }
        let v = self.base.values();
        Some(v[i as usize] - v[self.center])
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, EnvError> {
        if x == 0.0 {
            return Ok(0.0);
        }
        if x < self.left_extent() || x > self.right_extent() || !x.is_finite() {
            return Err(EnvError::OutOfDomain(x));
        }
        let step = self.base.step();
        let pos = x / step + self.center as f64;
        let j = (pos.floor() as usize).min(self.base.len().saturating_sub(2));
        let u = (x - (j as f64 - self.center as f64) * step).clamp(0.0, step);
        let v = self.base.values();
        let c = v[self.center];
        if self.base.len() == 1 || u == 0.0 {
            return Ok(v[j] - c);
        }
        Ok((v[j] - c) + (v[j + 1] - v[j]) * (u / step))
    }
}

/// First crossings of level `theta` left and right of the centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingPair {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// `a = sup{x <= 0 : W_c(x) >= θ}`, `b = inf{x >= 0 : W_c(x) >= θ}` on the interpolant.
pub fn crossing_points(shifted: &ShiftedPotential<'_>, theta: f64) -> Result<CrossingPair, EnvError> {
    if !(theta > 0.0) {
        return Err(EnvError::InvalidThreshold(theta));
    }
    let step = shifted.step();
    let find = |dir: isize, side: Side| -> Result<f64, EnvError> {
        let mut prev = 0.0;
        let mut k: isize = 1;
        while let Some(w) = shifted.knot_value(dir * k) {
            if w >= theta {
                let frac = (theta - prev) / (w - prev);
                return Ok(dir as f64 * ((k - 1) as f64 + frac) * step);
            }
            prev = w;
            k += 1;
        }
        Err(EnvError::ThresholdNotReached { side, theta })
    };
    let a = find(-1, Side::Left)?;
    let b = find(1, Side::Right)?;
    Ok(CrossingPair { a, b, theta })
}

/// `∫_a^b e^{-β W_c(y)} dy` as a logarithm, with the plain value when representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsWeight {
    pub ln_value: f64,
    pub value: Option<f64>,
}

impl GibbsWeight {
    const ZERO: Self = Self {
        ln_value: f64::NEG_INFINITY,
        value: Some(0.0),
    };
}

/// Pieces `(w0, w1, len)` of the interpolant restricted to `[a, b]`.
fn pieces(shifted: &ShiftedPotential<'_>, a: f64, b: f64) -> Result<Vec<(f64, f64, f64)>, EnvError> {
    let step = shifted.step();
    let wa = shifted.evaluate(a)?;
    let wb = shifted.evaluate(b)?;
    let first = (a / step).floor() as isize + 1;
    let last = (b / step).ceil() as isize - 1;
    let mut out = Vec::with_capacity((last - first + 2).max(1) as usize);
    let (mut x0, mut w0) = (a, wa);
    for k in first..=last {
        let x1 = k as f64 * step;
        if x1 <= x0 || x1 >= b {
            continue;
        }
        let w1 = shifted.knot_value(k).ok_or(EnvError::OutOfDomain(x1))?;
        out.push((w0, w1, x1 - x0));
        x0 = x1;
        w0 = w1;
    }
    if b > x0 {
        out.push((w0, wb, b - x0));
    }
    Ok(out)
}

/// `∫_a^b e^{-β W_c(y)} dy`, exact per linear segment, reduced by log-sum-exp.
pub fn gibbs_weight_integral(
    shifted: &ShiftedPotential<'_>,
    beta: f64,
    a: f64,
    b: f64,
) -> Result<GibbsWeight, EnvError> {
    if !(a <= b) || !(beta >= 0.0) {
        return Err(EnvError::InvalidInterval(a, b));
    }
    if a == b {
        return Ok(GibbsWeight::ZERO);
    }
    let segs = pieces(shifted, a, b)?;
    let logs: Vec<f64> = segs
        .iter()
        .map(|&(w0, w1, len)| -beta * w0 + len.ln() + ln_exprel(-beta * (w1 - w0)))
        .collect();
    let ln_value = log_sum_exp(&logs);
    let direct: f64 = segs
        .iter()
        .map(|&(w0, w1, len)| (-beta * w0).exp() * len * exprel(-beta * (w1 - w0)))
        .sum();
    let value = (direct.is_finite() && direct.is_normal()).then_some(direct);
    Ok(GibbsWeight { ln_value, value })
}

/// `e^{-β W_c(x)} / ∫_{a_θ}^{b_θ} e^{-β W_c}` for each `x`.
pub fn gibbs_profile(
    shifted: &ShiftedPotential<'_>,
    beta: f64,
    theta: f64,
    xs: &[f64],
) -> Result<Vec<f64>, EnvError> {
    let cp = crossing_points(shifted, theta)?;
    let g = gibbs_weight_integral(shifted, beta, cp.a, cp.b)?;
    xs.iter()
        .map(|&x| Ok((-beta * shifted.evaluate(x)? - g.ln_value).exp()))
        .collect()
}

/// Normalised environment profile `e^{-W_m(x)} / ∫_{a_{αr}}^{b_{αr}} e^{-W_m}`
/// for the unscaled potential centred at the valley bottom.
pub fn environment_profile(
    shifted: &ShiftedPotential<'_>,
    alpha: f64,
    r: f64,
    xs: &[f64],
) -> Result<Vec<f64>, EnvError> {
    gibbs_profile(shifted, 1.0, alpha * r, xs)
}

/// Relative gap `|g[a_r, b_r] - g[a, b]| / g[a_r, b_r]` for `g = ∫ e^{-α W_c}`,
/// where `a_r, b_r` are the level-`r` crossings.
pub fn laplace_equivalence_check(
    shifted: &ShiftedPotential<'_>,
    alpha: f64,
    a: f64,
    b: f64,
    r: f64,
) -> Result<f64, EnvError> {
    let cp = crossing_points(shifted, r)?;
    if !(cp.a <= a && a <= b && b <= cp.b) {
        return Err(EnvError::InvalidInterval(a, b));
    }
    let full = gibbs_weight_integral(shifted, alpha, cp.a, cp.b)?;
    let part = gibbs_weight_integral(shifted, alpha, a, b)?;
    Ok((part.ln_value - full.ln_value).exp_m1().abs())
}
