//! The diffusion observed on the grid knots.
//!
//! Between knots the potential is linear, so `S` maps the knots to points
//! `s_i` and `X` moving from `x_i` to a neighbour is `B` leaving `(s_{i-1}, s_{i+1})`.
//! The exit side, the mean clock time of a visit and the mean local time a
//! visit leaves at `x_i` all have closed forms in the two adjacent increments
//! `z1 = V_i - V_{i-1}`, `z2 = V_{i+1} - V_i` of `V = αW`:
//!
//! ```text
//! P(right) = e(-z1) / (e(-z1) + e(z2))
//! E[time]  = 2Δ² (e(z2) e₂(-z1) + e(-z1) e₂(z2)) / (e(-z1) + e(z2))
//! E[L]     = 2Δ e(-z1) e(z2) / (e(-z1) + e(z2))
//! ```
//!
//! with `e = exprel`, `e₂ = exprel2`. Exit sides are sampled exactly; clock
//! and local time use the per-visit means, whose relative error averages out
//! over the many visits of every knot that matters.

use rand::Rng;

use super::{DiffusionError, LocalTimeProfile};
use crate::environment::{double_environment, EnvironmentPath};
use crate::numeric::{exprel, exprel2};

/// Per-knot transition tables of the embedded chain.
#[derive(Debug, Clone)]
pub struct KnotChain {
    threshold: Vec<u64>,
    exit_time: Vec<f64>,
    visit_local_time: Vec<f64>,
}

impl KnotChain {
    pub fn new(env: &EnvironmentPath, alpha: f64) -> Self {
        let n = env.len();
        let d = env.step();
        let v = env.values();
        let mut threshold = vec![0; n];
        let mut exit_time = vec![0.0; n];
        let mut visit_local_time = vec![0.0; n];
        for i in 1..n.saturating_sub(1) {
            let z1 = alpha * (v[i] - v[i - 1]);
            let z2 = alpha * (v[i + 1] - v[i]);
            let (el, er) = (exprel(-z1), exprel(z2));
            let sum = el + er;
            threshold[i] = (el / sum * 18_446_744_073_709_551_616.0) as u64;
            exit_time[i] = 2.0 * d * d * (er * exprel2(-z1) + el * exprel2(z2)) / sum;
            visit_local_time[i] = 2.0 * d * el * er / sum;
        }
        Self {
            threshold,
            exit_time,
            visit_local_time,
        }
    }

    pub fn p_right(&self, i: usize) -> f64 {
        self.threshold[i] as f64 / 18_446_744_073_709_551_616.0
    }

    pub fn mean_exit_time(&self, i: usize) -> f64 {
        self.exit_time[i]
    }

    pub fn mean_visit_local_time(&self, i: usize) -> f64 {
        self.visit_local_time[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub max_steps: u64,
    pub max_half_width: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            max_steps: 2_000_000_000,
            max_half_width: 1e7,
        }
    }
}

/// Visit counts of the embedded chain up to clock time `t`.
#[derive(Debug, Clone)]
pub struct ChainPath {
    pub alpha: f64,
    pub t: f64,
    pub env: EnvironmentPath,
    /// Completed visits per knot.
    pub visits: Vec<u64>,
    /// Knot occupied at time `t`.
    pub current: usize,
    /// Fraction of the mean visit length already spent at `current`.
    pub fraction: f64,
    pub steps: u64,
    tables: KnotChain,
}

impl ChainPath {
    /// `X(t)`.
    pub fn position(&self) -> f64 {
        self.env.knot_x(self.current)
    }

    fn effective_visits(&self, i: usize) -> f64 {
        let extra = if i == self.current { self.fraction } else { 0.0 };
        self.visits[i] as f64 + extra
    }

    /// Local time at knot `i`.
    pub fn local_time_at_index(&self, i: usize) -> f64 {
        self.effective_visits(i) * self.tables.visit_local_time[i]
    }

    /// Local time at `x`, linear between knots and 0 outside the environment.
    pub fn local_time_at(&self, x: f64) -> f64 {
        if !self.env.contains(x) {
            return 0.0;
        }
        let pos = x / self.env.step() + self.env.origin() as f64;
        let j = (pos.floor() as usize).min(self.env.len() - 1);
        let u = pos - j as f64;
        if u <= 0.0 || j + 1 == self.env.len() {
            return self.local_time_at_index(j);
        }
        (1.0 - u) * self.local_time_at_index(j) + u * self.local_time_at_index(j + 1)
    }

    fn visited_range(&self) -> (usize, usize) {
        let lo = self
            .visits
            .iter()
            .position(|&c| c > 0)
            .unwrap_or(self.current)
            .min(self.current);
        let hi = self
            .visits
            .iter()
            .rposition(|&c| c > 0)
            .unwrap_or(self.current)
            .max(self.current);
        (lo, hi)
    }

    /// Knot local times over the visited range.
    pub fn local_time_profile(&self) -> LocalTimeProfile {
        let (lo, hi) = self.visited_range();
        LocalTimeProfile {
            t: self.t,
            bin_width: self.env.step(),
            bin_centers: (lo..=hi).map(|i| self.env.knot_x(i)).collect(),
            values: (lo..=hi).map(|i| self.local_time_at_index(i)).collect(),
        }
    }

    /// Clock time credited to each knot, divided by the grid step. Sums to `t / step`.
    pub fn occupation_profile(&self) -> LocalTimeProfile {
        let (lo, hi) = self.visited_range();
        let d = self.env.step();
        LocalTimeProfile {
            t: self.t,
            bin_width: d,
            bin_centers: (lo..=hi).map(|i| self.env.knot_x(i)).collect(),
            values: (lo..=hi)
                .map(|i| self.effective_visits(i) * self.tables.exit_time[i] / d)
                .collect(),
        }
    }
}

/// Run the embedded chain of the diffusion in `αW` from 0 until clock time `t_target`.
///
/// The environment is doubled with fresh increments whenever the chain reaches
/// an end knot.
pub fn simulate_chain<R: Rng + ?Sized>(
    env: &EnvironmentPath,
    alpha: f64,
    t_target: f64,
    rng: &mut R,
    opts: &ChainOptions,
) -> Result<ChainPath, DiffusionError> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(DiffusionError::InvalidParameter("alpha must be >= 0"));
    }
    if !(t_target > 0.0 && t_target.is_finite()) {
        return Err(DiffusionError::InvalidParameter("t_target must be positive"));
    }
    let mut env = env.clone();
    while env.origin() == 0 || env.origin() + 1 == env.len() {
        env = double_environment(&env, rng)?;
    }
    let mut tables = KnotChain::new(&env, alpha);
    let mut visits = vec![0u64; env.len()];
    let mut i = env.origin();
    let mut clock = 0.0;
    let mut steps = 0u64;
    let fraction;
    loop {
        let n = env.len();
        loop {
            let e = tables.exit_time[i];
            if clock + e >= t_target {
                break;
            }
            if steps >= opts.max_steps {
                return Err(DiffusionError::StepBudgetExceeded {
                    steps,
                    reached: clock,
                    target: t_target,
                    position: env.knot_x(i),
                });
            }
            clock += e;
            visits[i] += 1;
            steps += 1;
            i = if rng.next_u64() < tables.threshold[i] { i + 1 } else { i - 1 };
            if i == 0 || i + 1 == n {
                break;
            }
        }
        if i == 0 || i + 1 == n {
            let half = env.left_extent().abs().min(env.right_extent());
            if half >= opts.max_half_width {
                return Err(DiffusionError::WideningCapExceeded(opts.max_half_width));
            }
            let wider = double_environment(&env, rng)?;
            let shift = wider.origin() - env.origin();
            let mut v = vec![0u64; wider.len()];
            v[shift..shift + visits.len()].copy_from_slice(&visits);
            visits = v;
            i += shift;
            env = wider;
            tables = KnotChain::new(&env, alpha);
            continue;
        }
        fraction = (t_target - clock) / tables.exit_time[i];
        break;
    }
    Ok(ChainPath {
        alpha,
        t: t_target,
        env,
        visits,
        current: i,
        fraction,
        steps,
        tables,
    })
}
