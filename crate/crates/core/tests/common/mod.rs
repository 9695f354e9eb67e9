#![allow(dead_code)]

use brox_core::environment::{EnvironmentPath, ExtremumKind};

/// Knot `i` is an h-minimum of `w` if some `ξ < i < ζ` have `w ≥ w[i] + h`
/// while `w[i]` is the minimum of `w` over `[ξ, ζ]`. Checked by trying every pair.
fn is_h_min(w: &[f64], i: usize, h: f64) -> bool {
    let n = w.len();
    for xi in 0..i {
        if w[xi] < w[i] + h || w[xi..=i].iter().any(|&v| v < w[i]) {
            continue;
        }
        for zeta in i + 1..n {
            if w[zeta] >= w[i] + h && w[i..=zeta].iter().all(|&v| v >= w[i]) {
                return true;
            }
        }
    }
    false
}

pub fn brute_extrema(env: &EnvironmentPath, h: f64) -> Vec<(usize, ExtremumKind)> {
    let w = env.values();
    let neg: Vec<f64> = w.iter().map(|v| -v).collect();
    let n = w.len();
    let mut raw = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if is_h_min(w, i, h) {
            raw.push((i, ExtremumKind::Min));
        }
        if is_h_min(&neg, i, h) {
            raw.push((i, ExtremumKind::Max));
        }
    }
    // adjacent same-kind entries: keep the most extreme, leftmost on ties
    let mut out: Vec<(usize, ExtremumKind)> = Vec::new();
    for (i, k) in raw {
        if let Some(last) = out.last_mut() {
            if last.1 == k {
                let better = match k {
                    ExtremumKind::Min => w[i] < w[last.0],
                    ExtremumKind::Max => w[i] > w[last.0],
                };
                if better {
                    *last = (i, k);
                }
                continue;
            }
        }
        out.push((i, k));
    }
    out
}

/// `(p, m, q)` indices: successive (max, min, max) around the origin,
/// the one with `m` nearest the origin, leftmost on ties.
pub fn brute_valley(env: &EnvironmentPath, h: f64) -> Option<(usize, usize, usize)> {
    let ext = brute_extrema(env, h);
    let o = env.origin();
    let mut best: Option<(usize, usize, usize)> = None;
    for t in ext.windows(3) {
        if t[0].1 != ExtremumKind::Max || t[1].1 != ExtremumKind::Min || t[2].1 != ExtremumKind::Max {
            continue;
        }
        if !(t[0].0 <= o && o <= t[2].0) {
            continue;
        }
        let c = (t[0].0, t[1].0, t[2].0);
        match best {
            Some(b) if b.1.abs_diff(o) <= c.1.abs_diff(o) => {}
            _ => best = Some(c),
        }
    }
    best
}

/// Brute-force barrier over knots strictly between `i` and `j`, plus the endpoints.
pub fn brute_barrier(w: &[f64], i: usize, j: usize) -> f64 {
    let idx: Vec<usize> = if i <= j { (i..=j).collect() } else { (j..=i).rev().collect() };
    let mut best: f64 = 0.0;
    for (a, &z) in idx.iter().enumerate() {
        let min = idx[..=a].iter().map(|&k| w[k]).fold(f64::INFINITY, f64::min);
        best = best.max(w[z] - min);
    }
    best
}

/// A random grid of at most 200 knots; `coarse` values make ties likely.
pub fn random_grid(seed: u64, coarse: bool) -> EnvironmentPath {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=200usize);
    let origin = rng.random_range(0..n);
    let mut vals = vec![0.0; n];
    for i in origin + 1..n {
        let d: f64 = if coarse { rng.random_range(-2..=2) as f64 * 0.5 } else { rng.random_range(-1.0..1.0) };
        vals[i] = vals[i - 1] + d;
    }
    for i in (0..origin).rev() {
        let d: f64 = if coarse { rng.random_range(-2..=2) as f64 * 0.5 } else { rng.random_range(-1.0..1.0) };
        vals[i] = vals[i + 1] + d;
    }
    EnvironmentPath::from_values(0.1, origin, vals).expect("valid grid")
}
