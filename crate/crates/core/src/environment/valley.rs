//! h-extrema, barriers and the standard valley around the origin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{double_environment, EnvError, EnvironmentPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub x: f64,
    pub kind: ExtremumKind,
}

/// Standard h-valley `(p, m, q)` with its depth and inner directed ascent.
///
/// Indices refer to the environment the valley was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Valley {
    pub p: f64,
    pub m: f64,
    pub q: f64,
    pub p_index: usize,
    pub m_index: usize,
    pub q_index: usize,
    pub h: f64,
    pub depth: f64,
    pub ascent: f64,
    /// More than one extrema triple brackets the origin (only possible on a grid).
    pub ambiguous: bool,
}

/// Largest barrier crossed going from `x` to `y`:
/// `max_{z between x and y} (W(z) - min_{[x, z]} W)`.
pub fn barrier(env: &EnvironmentPath, x: f64, y: f64) -> Result<f64, EnvError> {
    let wx = env.evaluate(x)?;
    let wy = env.evaluate(y)?;
    let mut run_min = wx;
    let mut best = 0.0f64;
    let mut visit = |w: f64| {
        run_min = run_min.min(w);
        best = best.max(w - run_min);
    };
    let step = env.step();
    let pos = |t: f64| t / step + env.origin() as f64;
    if y >= x {
        let first = pos(x).floor() as i64 + 1;
        let last = pos(y).ceil() as i64 - 1;
        for i in first.max(0)..=last {
            visit(env.values()[i as usize]);
        }
    } else {
        let first = pos(x).ceil() as i64 - 1;
        let last = pos(y).floor() as i64 + 1;
        let mut i = first;
        while i >= last && i >= 0 {
            visit(env.values()[i as usize]);
            i -= 1;
        }
    }
    visit(wy);
    Ok(best)
}

/// Range-maximum table.
struct SparseMax {
    levels: Vec<Vec<f64>>,
}

impl SparseMax {
    fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().expect("level 0");
            let next = (0..=values.len() - 2 * width)
                .map(|i| prev[i].max(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        Self { levels }
    }

    /// Max over the inclusive range `lo..=hi`.
    fn query(&self, lo: usize, hi: usize) -> f64 {
        let len = hi - lo + 1;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let lvl = &self.levels[k];
        lvl[lo].max(lvl[hi + 1 - (1 << k)])
    }
}

/// For each index, the nearest index on each side holding a strictly smaller value.
fn strictly_lower_neighbours(w: &[f64]) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let n = w.len();
    let mut prev = vec![None; n];
    let mut next = vec![None; n];
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..n {
        while let Some(&top) = stack.last() {
            if w[top] >= w[i] {
                stack.pop();
            } else {
                break;
            }
        }
        prev[i] = stack.last().copied();
        stack.push(i);
    }
    stack.clear();
    for i in (0..n).rev() {
        while let Some(&top) = stack.last() {
            if w[top] >= w[i] {
                stack.pop();
            } else {
                break;
            }
        }
        next[i] = stack.last().copied();
        stack.push(i);
    }
    (prev, next)
}

/// Interior knots admitting h-minimum witnesses in `w`.
fn h_minima(w: &[f64], h: f64) -> Vec<usize> {
    let n = w.len();
    if n < 3 {
        return Vec::new();
    }
    let table = SparseMax::new(w);
    let (prev, next) = strictly_lower_neighbours(w);
    (1..n - 1)
        .filter(|&i| {
            let lo = prev[i].map_or(0, |j| j + 1);
            let hi = next[i].map_or(n - 1, |j| j - 1);
            let target = w[i] + h;
            lo < i && hi > i && table.query(lo, i - 1) >= target && table.query(i + 1, hi) >= target
        })
        .collect()
}

/// Collapse runs of same-kind extrema with no opposite kind between them,
/// keeping the most extreme value and, on ties, the leftmost knot.
pub(crate) fn merge_same_kind(w: &[f64], raw: Vec<(usize, ExtremumKind)>) -> Vec<(usize, ExtremumKind)> {
    let mut out: Vec<(usize, ExtremumKind)> = Vec::with_capacity(raw.len());
    for (i, kind) in raw {
        match out.last_mut() {
            Some(last) if last.1 == kind => {
                let better = match kind {
                    ExtremumKind::Min => w[i] < w[last.0],
                    ExtremumKind::Max => w[i] > w[last.0],
                };
                if better {
                    *last = (i, kind);
                }
            }
            _ => out.push((i, kind)),
        }
    }
    out
}

/// All h-extrema of the grid path, sorted by position with alternating kinds.
///
/// Domain endpoints are never extrema; witnesses may be any knot of the domain.
pub fn find_h_extrema(env: &EnvironmentPath, h: f64) -> Result<Vec<Extremum>, EnvError> {
    if !(h > 0.0) {
        return Err(EnvError::InvalidThreshold(h));
    }
    let w = env.values();
    let neg: Vec<f64> = w.iter().map(|v| -v).collect();
    let mut raw: Vec<(usize, ExtremumKind)> = h_minima(w, h)
        .into_iter()
        .map(|i| (i, ExtremumKind::Min))
        .chain(h_minima(&neg, h).into_iter().map(|i| (i, ExtremumKind::Max)))
        .collect();
    raw.sort_by_key(|&(i, _)| i);
    Ok(merge_same_kind(w, raw)
        .into_iter()
        .map(|(index, kind)| Extremum {
            index,
            x: env.knot_x(index),
            kind,
        })
        .collect())
}

/// The triple of successive extrema (max, min, max) whose span contains the origin.
pub fn standard_valley(env: &EnvironmentPath, h: f64) -> Result<Valley, EnvError> {
    let ext = find_h_extrema(env, h)?;
    let origin = env.origin();
    let mut found: Option<(usize, usize, usize)> = None;
    let mut count = 0;
    for t in ext.windows(3) {
        let shape = (t[0].kind, t[1].kind, t[2].kind);
        if shape != (ExtremumKind::Max, ExtremumKind::Min, ExtremumKind::Max) {
            continue;
        }
        if t[0].index > origin || t[2].index < origin {
            continue;
        }
        count += 1;
        let candidate = (t[0].index, t[1].index, t[2].index);
        found = match found {
            Some(prev) if prev.1.abs_diff(origin) <= candidate.1.abs_diff(origin) => Some(prev),
            _ => Some(candidate),
        };
    }
    let (pi, mi, qi) = found.ok_or(EnvError::ValleyNotContained { h })?;
    let w = env.values();
    let (p, m, q) = (env.knot_x(pi), env.knot_x(mi), env.knot_x(qi));
    let depth = (w[pi] - w[mi]).min(w[qi] - w[mi]);
    let ascent = barrier(env, p, m)?.max(barrier(env, q, m)?);
    Ok(Valley {
        p,
        m,
        q,
        p_index: pi,
        m_index: mi,
        q_index: qi,
        h,
        depth,
        ascent,
        ambiguous: count > 1,
    })
}

/// Cap on lazy widening: give up once the half-width exceeds `max_half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WideningPolicy {
    pub max_half_width: f64,
}

/// Double the window until a standard valley is contained or the cap is hit.
pub fn standard_valley_widening<R: Rng + ?Sized>(
    mut env: EnvironmentPath,
    h: f64,
    policy: WideningPolicy,
    rng: &mut R,
) -> Result<(EnvironmentPath, Valley), EnvError> {
    loop {
        match standard_valley(&env, h) {
            Ok(v) => return Ok((env, v)),
            Err(EnvError::ValleyNotContained { .. }) => {
                let half = env.left_extent().abs().min(env.right_extent());
                if half >= policy.max_half_width {
                    return Err(EnvError::WideningCapExceeded {
                        h,
                        cap: policy.max_half_width,
                    });
                }
                env = double_environment(&env, rng)?;
            }
            Err(e) => return Err(e),
        }
    }
}
