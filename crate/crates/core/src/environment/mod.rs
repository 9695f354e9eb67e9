//! Two-sided Brownian potentials on a uniform grid.
//!
//! A potential is stored as knot values on `x = i * step`, with linear
//! interpolation in between and `W(0) = 0` pinned exactly. Everything that
//! depends on the potential (extrema, barriers, exponential integrals) is
//! exact for this interpolant.

mod gibbs;
mod valley;

pub use gibbs::{
    crossing_points, environment_profile, gibbs_profile, gibbs_weight_integral,
    laplace_equivalence_check, CrossingPair, GibbsWeight, ShiftedPotential,
};
pub use valley::{
    barrier, find_h_extrema, standard_valley, standard_valley_widening, Extremum,
    ExtremumKind, Valley, WideningPolicy,
};

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("extents must satisfy left <= 0 <= right on the grid, got [{left}, {right}]")]
    InvalidExtents { left: f64, right: f64 },
    #[error("extension would shrink the domain [{left}, {right}] to [{new_left}, {new_right}]")]
    ShrinkingExtension {
        left: f64,
        right: f64,
        new_left: f64,
        new_right: f64,
    },
    #[error("coordinate {0} lies outside the environment")]
    OutOfDomain(f64),
    #[error("h must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("the domain does not contain a standard {h}-valley")]
    ValleyNotContained { h: f64 },
    #[error("no standard {h}-valley found before the widening cap of half-width {cap}")]
    WideningCapExceeded { h: f64, cap: f64 },
    #[error("level {theta} is not reached on the {side:?} side of the domain")]
    ThresholdNotReached { side: Side, theta: f64 },
    #[error("invalid integration interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("environment values must start with W(0) = 0 and be finite")]
    InvalidValues,
}

/// A potential sampled on a uniform grid, piecewise linear between knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentPath {
    step: f64,
    origin: usize,
    values: Vec<f64>,
}

impl EnvironmentPath {
    /// Build from explicit knot values; `values[origin]` must be exactly 0.
    pub fn from_values(step: f64, origin: usize, values: Vec<f64>) -> Result<Self, EnvError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(EnvError::InvalidStep(step));
        }
        if origin >= values.len() || values[origin] != 0.0 || values.iter().any(|v| !v.is_finite())
        {
            return Err(EnvError::InvalidValues);
        }
        Ok(Self {
            step,
            origin,
            values,
        })
    }

    /// Identically zero potential on `[-left_knots * step, right_knots * step]`.
    pub fn flat(step: f64, left_knots: usize, right_knots: usize) -> Result<Self, EnvError> {
        Self::from_values(step, left_knots, vec![0.0; left_knots + right_knots + 1])
    }

    /// Tabulate a function on the grid; the value at 0 is forced to 0.
    pub fn from_fn(
        step: f64,
        left_knots: usize,
        right_knots: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, EnvError> {
        let values = (0..=left_knots + right_knots)
            .map(|i| {
                if i == left_knots {
                    0.0
                } else {
                    f((i as f64 - left_knots as f64) * step)
                }
            })
            .collect();
        Self::from_values(step, left_knots, values)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Index of the knot at `x = 0`.
    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn left_extent(&self) -> f64 {
        -(self.origin as f64) * self.step
    }

    pub fn right_extent(&self) -> f64 {
        (self.values.len() - 1 - self.origin) as f64 * self.step
    }

    pub fn knot_x(&self, i: usize) -> f64 {
        (i as f64 - self.origin as f64) * self.step
    }

    /// Nearest knot to `x`, if `x` is inside the domain.
    pub fn nearest_knot(&self, x: f64) -> Option<usize> {
        let k = (x / self.step).round() + self.origin as f64;
        if k < 0.0 || k > (self.values.len() - 1) as f64 || !k.is_finite() {
            None
        } else {
            Some(k as usize)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left_extent() && x <= self.right_extent()
    }

    /// Segment index `j` and offset `u ∈ [0, step]` with `x = knot_x(j) + u`.
    pub(crate) fn locate(&self, x: f64) -> Result<(usize, f64), EnvError> {
        if !self.contains(x) || !x.is_finite() {
            return Err(EnvError::OutOfDomain(x));
        }
        if self.values.len() == 1 {
            return Ok((0, 0.0));
        }
        let pos = x / self.step + self.origin as f64;
        let j = (pos.floor() as usize).min(self.values.len() - 2);
        let u = (x - self.knot_x(j)).clamp(0.0, self.step);
        Ok((j, u))
    }

    /// Linear interpolation of the potential.
    pub fn evaluate(&self, x: f64) -> Result<f64, EnvError> {
        let (j, u) = self.locate(x)?;
        if u == 0.0 || self.values.len() == 1 {
            return Ok(self.values[j]);
        }
        let w0 = self.values[j];
        let w1 = self.values[j + 1];
        Ok(w0 + (w1 - w0) * (u / self.step))
    }

    /// Debug dump with columns `x,W`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,W")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", self.knot_x(i), v)?;
        }
        Ok(())
    }
}

fn knots_for(extent: f64, step: f64) -> Option<usize> {
    let k = (extent.abs() / step).round();
    if (k * step - extent.abs()).abs() > 1e-9 * extent.abs().max(1.0) {
        None
    } else {
        Some(k as usize)
    }
}

fn check_extents(step: f64, left: f64, right: f64) -> Result<(usize, usize), EnvError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(EnvError::InvalidStep(step));
    }
    if !(left <= 0.0 && right >= 0.0) {
        return Err(EnvError::InvalidExtents { left, right });
    }
    match (knots_for(left, step), knots_for(right, step)) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(EnvError::InvalidExtents { left, right }),
    }
}

fn brownian_increments<R: Rng + ?Sized>(rng: &mut R, n: usize, step: f64) -> Vec<f64> {
    let sd = step.sqrt();
    (0..n)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Sample a two-sided Brownian motion on `[left, right]` with `W(0) = 0`.
///
/// The right half is drawn first, then the left half, outward from 0.
pub fn sample_environment<R: Rng + ?Sized>(
    step: f64,
    left: f64,
    right: f64,
    rng: &mut R,
) -> Result<EnvironmentPath, EnvError> {
    let (nl, nr) = check_extents(step, left, right)?;
    let right_inc = brownian_increments(rng, nr, step);
    let left_inc = brownian_increments(rng, nl, step);
    let mut values = vec![0.0; nl + nr + 1];
    for (k, d) in right_inc.iter().enumerate() {
        values[nl + k + 1] = values[nl + k] + d;
    }
    for (k, d) in left_inc.iter().enumerate() {
        values[nl - k - 1] = values[nl - k] + d;
    }
    Ok(EnvironmentPath {
        step,
        origin: nl,
        values,
    })
}

/// Widen the domain with fresh independent increments; existing knots are untouched.
pub fn extend_environment<R: Rng + ?Sized>(
    env: &EnvironmentPath,
    new_left: f64,
    new_right: f64,
    rng: &mut R,
) -> Result<EnvironmentPath, EnvError> {
    let (nl, nr) = check_extents(env.step, new_left, new_right)?;
    let old_l = env.origin;
    let old_r = env.values.len() - 1 - env.origin;
    if nl < old_l || nr < old_r {
        return Err(EnvError::ShrinkingExtension {
            left: env.left_extent(),
            right: env.right_extent(),
            new_left,
            new_right,
        });
    }
    let right_inc = brownian_increments(rng, nr - old_r, env.step);
    let left_inc = brownian_increments(rng, nl - old_l, env.step);
    let mut values = Vec::with_capacity(nl + nr + 1);
    let mut left_part = Vec::with_capacity(left_inc.len());
    let mut acc = env.values[0];
    for d in &left_inc {
        acc += d;
        left_part.push(acc);
    }
    values.extend(left_part.iter().rev());
    values.extend_from_slice(&env.values);
    let mut acc = *env.values.last().expect("non-empty");
    for d in &right_inc {
        acc += d;
        values.push(acc);
    }
    Ok(EnvironmentPath {
        step: env.step,
        origin: nl,
        values,
    })
}

/// Double both extents (at least one knot each side) for lazy widening.
pub fn double_environment<R: Rng + ?Sized>(
    env: &EnvironmentPath,
    rng: &mut R,
) -> Result<EnvironmentPath, EnvError> {
    let l = env.origin.max(1) * 2;
    let r = (env.len() - 1 - env.origin).max(1) * 2;
    extend_environment(env, -(l as f64) * env.step, r as f64 * env.step, rng)
}

/// Reproducible recipe for an environment: `{seed, stream, step, left, right}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub seed: u64,
    pub stream: u64,
    pub step: f64,
    pub left: f64,
    pub right: f64,
}

impl EnvironmentSpec {
    pub fn realize(&self) -> Result<EnvironmentPath, EnvError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        sample_environment(self.step, self.left, self.right, &mut rng)
    }
}
