//! One environment, one diffusion run to `t = e^α`, and everything the
//! experiments read off it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::diffusion::{rescale_to_unit_valley, simulate_chain, ChainOptions};
use crate::environment::{
    crossing_points, gibbs_weight_integral, sample_environment, standard_valley_widening, ShiftedPotential,
    WideningPolicy,
};

/// Stream domains, so no two sampling tasks ever share a stream.
pub mod domain {
    pub const REPLICA: u64 = 1;
    pub const REFERENCE: u64 = 2;
    pub const IDENTITY_FUNCTIONAL: u64 = 3;
    pub const IDENTITY_ALIAS: u64 = 4;
    pub const REFERENCE_ALIAS: u64 = 5;
    pub const BOOTSTRAP: u64 = 6;
}

/// `ChaCha8(master)` on stream `domain << 48 | group << 32 | index`.
pub fn stream_rng(master: u64, domain: u64, group: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((domain << 48) | ((group & 0xffff) << 32) | (index & 0xffff_ffff));
    rng
}

/// Statistics of a single replica, all in the original frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaOutcome {
    /// Valley bottom `m_α`.
    pub m: f64,
    pub ambiguous_valley: bool,
    /// `L*(e^α) / e^α`.
    pub sup_normalized: f64,
    /// Favorite point minus `m_α`.
    pub favorite_offset: f64,
    /// `L(e^α, m_α + x) / e^α` at the configured offsets.
    pub marginals: Vec<f64>,
    /// `sup_{|x| <= K} |L(e^α, m+x)/e^α · ∫_{a}^{b} e^{-W_m} / e^{-W_m(x)} - 1|`.
    pub window_discrepancy: f64,
    /// The ratio inside the discrepancy at `x = 0`, minus 1.
    pub bottom_ratio_error: f64,
    /// Share of `∫ L dx` falling inside `[m + a_{αr}, m + b_{αr}]`.
    pub window_time_fraction: f64,
    /// `L(e^α, 0)`.
    pub local_time_at_origin: f64,
    /// `X(e^α) - m_α`.
    pub position_offset: f64,
    /// `Σ L · dx / e^α`.
    pub normalization: f64,
    pub chain_steps: u64,
}

pub fn run_replica(cfg: &ExperimentConfig, alpha_index: usize, replica: usize) -> Result<ReplicaOutcome, String> {
    let alpha = cfg.alphas[alpha_index];
    let mut rng = stream_rng(cfg.seed, domain::REPLICA, alpha_index as u64, replica as u64);
    let a2 = alpha * alpha;
    let dx = cfg.dx;
    let half = (cfg.initial_half_width * a2 / dx).ceil() * dx;
    let env = sample_environment(dx, -half, half, &mut rng).map_err(|e| e.to_string())?;
    let policy = WideningPolicy {
        max_half_width: cfg.widening_cap * a2,
    };
    let (env, valley) = standard_valley_widening(env, alpha, policy, &mut rng).map_err(|e| e.to_string())?;

    // environment functional ∫_{a_{αr}}^{b_{αr}} e^{-W_m}
    let shifted = ShiftedPotential::new(&env, valley.m_index);
    let cp = crossing_points(&shifted, alpha * cfg.r).map_err(|e| e.to_string())?;
    let weight = gibbs_weight_integral(&shifted, 1.0, cp.a, cp.b).map_err(|e| e.to_string())?;

    let (scaled, book) = rescale_to_unit_valley(&env, alpha).map_err(|e| e.to_string())?;
    let horizon = book.horizon(1.0);
    let opts = ChainOptions {
        max_steps: cfg.chain_max_steps,
        max_half_width: cfg.widening_cap,
    };
    let chain = simulate_chain(&scaled, alpha, horizon, &mut rng, &opts).map_err(|e| e.to_string())?;

    let t = alpha.exp();
    let shift = chain.env.origin() - scaled.origin();
    let m_idx = valley.m_index + shift;
    let lt = |i: usize| book.local_time_to_original(chain.local_time_at_index(i)) / t;
    let n = chain.env.len();

    let mut best = (0usize, f64::NEG_INFINITY);
    let mut total = 0.0;
    for i in 0..n {
        let v = lt(i);
        total += v;
        if v > best.1 {
            best = (i, v);
        }
    }
    let knot = |offset: f64| -> Option<usize> {
        let k = (offset / dx).round() as isize + m_idx as isize;
        (k >= 0 && (k as usize) < n).then_some(k as usize)
    };
    let marginals = cfg
        .marginal_offsets
        .iter()
        .map(|&x| knot(x).map_or(0.0, lt))
        .collect();

    let kw = (cfg.window / dx).round() as isize;
    let mut disc: f64 = 0.0;
    let mut bottom = 0.0;
    for k in -kw..=kw {
        let i = m_idx as isize + k;
        let wm = shifted
            .knot_value(k)
            .ok_or_else(|| format!("window offset {k} outside environment"))?;
        let ratio = lt(i as usize) * (weight.ln_value + wm).exp();
        disc = disc.max((ratio - 1.0).abs());
        if k == 0 {
            bottom = ratio - 1.0;
        }
    }
    let lo = m_idx as isize + (cp.a / dx).ceil() as isize;
    let hi = m_idx as isize + (cp.b / dx).floor() as isize;
    let inside: f64 = (lo.max(0)..=hi.min(n as isize - 1)).map(|i| lt(i as usize)).sum::<f64>() * dx;

    Ok(ReplicaOutcome {
        m: valley.m,
        ambiguous_valley: valley.ambiguous,
        sup_normalized: best.1,
        favorite_offset: (best.0 as f64 - m_idx as f64) * dx,
        marginals,
        window_discrepancy: disc,
        bottom_ratio_error: bottom,
        window_time_fraction: inside / (total * dx),
        local_time_at_origin: lt(chain.env.origin()) * t,
        position_offset: book.space_to_original(chain.position()) - valley.m,
        normalization: total * dx,
        chain_steps: chain.steps,
    })
}
