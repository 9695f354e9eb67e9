//! Samplers for the limit objects: the two-sided 3-dimensional Bessel process
//! `R`, the functional `∫ e^{-R}`, the profile `e^{-R}/∫e^{-R}` and the
//! alias `4τ(1) + 4τ̃(1)` built from BESQ(2) hitting times.
//!
//! BES(3) is sampled as the norm of a 3-d Gaussian walk, whose transitions are
//! exact at any step size. Near the origin the step is fixed; once `R` is far
//! above the levels where `e^{-R}` matters the step grows with `R`, so the path
//! can be followed to a large cutoff where the chance of coming back is small.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("step budget of {0} exhausted before the cutoff was reached")]
    StepBudgetExceeded(u64),
    #[error("coordinate {0} lies outside the simulated window")]
    OutsideWindow(f64),
}

/// When to stop following a BES(3) path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonRule {
    /// Below this level the step is the base `dt`.
    pub fine_level: f64,
    /// Above `fine_level` the step is `((R - fine_level) / spread)²`.
    pub spread: f64,
    /// Stop once `R` reaches this level.
    pub cutoff: f64,
    pub max_steps: u64,
}

impl Default for HorizonRule {
    fn default() -> Self {
        Self {
            fine_level: 15.0,
            spread: 8.0,
            cutoff: 1e4,
            max_steps: 50_000_000,
        }
    }
}

/// Expected `∫_0^∞ e^{-R}` for BES(3) started at `r`:
/// `(2/r) ∫_0^r y² e^{-y} dy + 2 (r + 1) e^{-r}`.
pub fn tail_mass_from(r: f64) -> f64 {
    if r <= 0.0 {
        return 2.0;
    }
    let e = (-r).exp();
    let inner = 2.0 - e * (r * r + 2.0 * r + 2.0);
    2.0 * inner / r + 2.0 * (r + 1.0) * e
}

/// One side of `R`, sampled at increasing times starting from `R(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesselPath {
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl BesselPath {
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Linear interpolation between samples.
    pub fn evaluate(&self, s: f64) -> Result<f64, BesselError> {
        if !(s >= 0.0 && s <= self.horizon()) {
            return Err(BesselError::OutsideWindow(s));
        }
        let k = self.times.partition_point(|&t| t <= s).max(1) - 1;
        if k + 1 == self.times.len() {
            return Ok(self.values[k]);
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let u = (s - t0) / (t1 - t0);
        Ok(self.values[k] + u * (self.values[k + 1] - self.values[k]))
    }

    /// Trapezoidal `∫ e^{-R}` over the sampled window.
    pub fn integral(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, r)| 0.5 * (t[1] - t[0]) * ((-r[0]).exp() + (-r[1]).exp()))
            .sum()
    }

    /// Expected mass of `e^{-R}` beyond the window.
    pub fn tail_bound(&self) -> f64 {
        tail_mass_from(*self.values.last().expect("non-empty"))
    }
}

/// Sample BES(3) from 0 until `rule.cutoff` is reached.
pub fn sample_bessel3<R: Rng + ?Sized>(
    dt: f64,
    rule: &HorizonRule,
    rng: &mut R,
) -> Result<BesselPath, BesselError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(BesselError::InvalidParameter("dt must be positive"));
    }
    if !(rule.cutoff > 0.0 && rule.spread > 0.0) {
        return Err(BesselError::InvalidParameter("cutoff and spread must be positive"));
    }
    let mut p = [0.0f64; 3];
    let mut t = 0.0;
    let mut r = 0.0;
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut steps = 0u64;
    while r < rule.cutoff {
        if steps >= rule.max_steps {
            return Err(BesselError::StepBudgetExceeded(steps));
        }
        let h = if r < rule.fine_level {
            dt
        } else {
            dt.max(((r - rule.fine_level) / rule.spread).powi(2))
        };
        let sd = h.sqrt();
        for c in &mut p {
            *c += sd * rng.sample::<f64, _>(StandardNormal);
        }
        r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        t += h;
        times.push(t);
        values.push(r);
        steps += 1;
    }
    Ok(BesselPath { dt, times, values })
}

/// `R(x) = R₁(x)` for `x >= 0` and `R₂(-x)` for `x < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedBessel {
    pub right: BesselPath,
    pub left: BesselPath,
}

impl TwoSidedBessel {
    /// Right side first, then left.
    pub fn sample<R: Rng + ?Sized>(dt: f64, rule: &HorizonRule, rng: &mut R) -> Result<Self, BesselError> {
        let right = sample_bessel3(dt, rule, rng)?;
        let left = sample_bessel3(dt, rule, rng)?;
        Ok(Self { right, left })
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, BesselError> {
        if x >= 0.0 {
            self.right.evaluate(x)
        } else {
            self.left.evaluate(-x).map_err(|_| BesselError::OutsideWindow(x))
        }
    }
}

/// A draw of `∫ e^{-R}` with the expected omitted tail mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub value: f64,
    pub truncation_bound: f64,
}

pub fn functional_sample(two_sided: &TwoSidedBessel) -> FunctionalSample {
    FunctionalSample {
        value: two_sided.right.integral() + two_sided.left.integral(),
        truncation_bound: two_sided.right.tail_bound() + two_sided.left.tail_bound(),
    }
}

/// `ℛ(x) = e^{-R(x)} / ∫ e^{-R}` at each `x`.
pub fn profile_sample(two_sided: &TwoSidedBessel, xs: &[f64]) -> Result<Vec<f64>, BesselError> {
    let total = functional_sample(two_sided).value;
    xs.iter()
        .map(|&x| Ok((-two_sided.evaluate(x)?).exp() / total))
        .collect()
}

/// Draw a point from the density `ℛ` restricted to the simulated window,
/// by exact inversion of the piecewise-linear interpolant of `e^{-R}`.
pub fn sample_profile_point<R: Rng + ?Sized>(two_sided: &TwoSidedBessel, rng: &mut R) -> f64 {
    let (l, r) = (two_sided.left.integral(), two_sided.right.integral());
    let u: f64 = rng.random::<f64>() * (l + r);
    if u < r {
        invert_side(&two_sided.right, u)
    } else {
        -invert_side(&two_sided.left, (u - r).min(l))
    }
}

fn invert_side(path: &BesselPath, mut u: f64) -> f64 {
    for k in 0..path.times.len() - 1 {
        let h = path.times[k + 1] - path.times[k];
        let (f0, f1) = ((-path.values[k]).exp(), (-path.values[k + 1]).exp());
        let m = 0.5 * h * (f0 + f1);
        if u <= m {
            // solve f0 s + (f1 - f0) s² / (2h) = u for s in [0, h]
            let slope = (f1 - f0) / h;
            let disc = (f0 * f0 + 2.0 * slope * u).max(0.0);
            let s = 2.0 * u / (f0 + disc.sqrt());
            return path.times[k] + s.clamp(0.0, h);
        }
        u -= m;
    }
    path.horizon()
}

/// First time `|B₂|²` reaches 1 for a planar Gaussian walk with step `dt`,
/// linearly interpolated across the crossing step.
pub fn besq2_hitting_time<R: Rng + ?Sized>(dt: f64, max_steps: u64, rng: &mut R) -> Result<f64, BesselError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(BesselError::InvalidParameter("dt must be positive"));
    }
    let sd = dt.sqrt();
    let (mut x, mut y) = (0.0f64, 0.0f64);
    let mut q = 0.0;
    for k in 0..max_steps {
        x += sd * rng.sample::<f64, _>(StandardNormal);
        y += sd * rng.sample::<f64, _>(StandardNormal);
        let nq = x * x + y * y;
        if nq >= 1.0 {
            let frac = (1.0 - q) / (nq - q);
            return Ok((k as f64 + frac) * dt);
        }
        q = nq;
    }
    Err(BesselError::StepBudgetExceeded(max_steps))
}

/// `4τ(1) + 4τ̃(1)` from two independent hitting times.
pub fn rayknight_alias_sample<R: Rng + ?Sized>(dt: f64, max_steps: u64, rng: &mut R) -> Result<f64, BesselError> {
    let a = besq2_hitting_time(dt, max_steps, rng)?;
    let b = besq2_hitting_time(dt, max_steps, rng)?;
    Ok(4.0 * a + 4.0 * b)
}
