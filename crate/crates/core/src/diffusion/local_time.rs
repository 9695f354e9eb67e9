//! Local-time estimators, hitting times and inverse local times on a simulated path.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{DiffusionError, DiffusionPath, ScaleMap};

/// Histogram bin width matched to a driving step: `4 √dt`.
pub fn default_bin_width(dt: f64) -> f64 {
    4.0 * dt.sqrt()
}

/// Half-width of the transfer band matched to a driving step: `2 √dt`.
pub fn default_band(dt: f64) -> f64 {
    2.0 * dt.sqrt()
}

/// Local time on a uniform grid of bin centres `j * bin_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeProfile {
    pub t: f64,
    pub bin_width: f64,
    pub bin_centers: Vec<f64>,
    pub values: Vec<f64>,
}

impl LocalTimeProfile {
    /// `Σ L · bin_width`, which should equal `t`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width
    }

    /// Value of the bin containing `x` (0 outside the support).
    pub fn value_at(&self, x: f64) -> f64 {
        let Some(&first) = self.bin_centers.first() else {
            return 0.0;
        };
        let j = ((x - first) / self.bin_width).round();
        if j < 0.0 || j as usize >= self.values.len() {
            return 0.0;
        }
        self.values[j as usize]
    }

    /// `x,L` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,L")?;
        for (x, l) in self.bin_centers.iter().zip(&self.values) {
            writeln!(out, "{x},{l}")?;
        }
        Ok(())
    }
}

fn bin_of(x: f64, w: f64) -> i64 {
    (x / w).round() as i64
}

/// Histogram estimator: clock time spent in each bin up to `t`, divided by the bin width.
pub fn local_time_occupation(
    path: &DiffusionPath,
    bin_width: f64,
    t: f64,
) -> Result<LocalTimeProfile, DiffusionError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(DiffusionError::InvalidParameter("bin_width must be positive"));
    }
    path.check_horizon(t)?;
    let last = path.clock_index(t)?;
    let bins: Vec<i64> = path.positions[..=last].iter().map(|&x| bin_of(x, bin_width)).collect();
    let lo = *bins.iter().min().expect("non-empty");
    let hi = *bins.iter().max().expect("non-empty");
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    for (k, &b) in bins.iter().enumerate() {
        let end = path.clock.get(k + 1).copied().unwrap_or(t).min(t);
        let dur = end - path.clock[k];
        if dur > 0.0 {
            values[(b - lo) as usize] += dur;
        }
    }
    for v in &mut values {
        *v /= bin_width;
    }
    Ok(LocalTimeProfile {
        t,
        bin_width,
        bin_centers: (lo..=hi).map(|j| j as f64 * bin_width).collect(),
        values,
    })
}

/// Estimate `L_X(t, x) = e^{-αW(x)} L_B(T⁻¹(t), S(x))` from the driving path,
/// using the occupation of the band `|B - S(x)| <= eps`.
pub fn local_time_transfer(
    path: &DiffusionPath,
    map: &ScaleMap,
    x: f64,
    t: f64,
    eps: f64,
) -> Result<f64, DiffusionError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DiffusionError::InvalidParameter("eps must be positive"));
    }
    path.check_horizon(t)?;
    let v = match map.evaluate(x) {
        Ok(v) => v,
        // far outside the explored range the band is empty
        Err(DiffusionError::OutsideEnvironment(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let s = path.driving_time(t)?;
    let dt = path.dt();
    let full = (s / dt).floor() as usize;
    let b = &path.driving.values;
    let mut occ = 0.0;
    for &bk in &b[..full.min(b.len() - 1)] {
        if (bk - v).abs() <= eps {
            occ += dt;
        }
    }
    let rest = s - full as f64 * dt;
    if rest > 0.0 && full < b.len() && (b[full] - v).abs() <= eps {
        occ += rest;
    }
    Ok((-map.potential_at(x)?).exp() * occ / (2.0 * eps))
}

/// First clock time at which the path reaches `x`; `None` if it never does.
pub fn hitting_time(path: &DiffusionPath, x: f64) -> Option<f64> {
    let p = &path.positions;
    if p[0] == x {
        return Some(path.clock[0]);
    }
    for k in 0..p.len() - 1 {
        let (a, b) = (p[k] - x, p[k + 1] - x);
        if b == 0.0 {
            return Some(path.clock[k + 1]);
        }
        if (a < 0.0) != (b < 0.0) {
            let frac = a / (a - b);
            return Some(path.clock[k] + frac * (path.clock[k + 1] - path.clock[k]));
        }
    }
    None
}

/// `σ(r, x)`: end of the first step after which the occupation estimate in the
/// bin of `x` reaches `r`. `None` if `r` is not reached on the horizon.
pub fn inverse_local_time(
    path: &DiffusionPath,
    r: f64,
    x: f64,
    bin_width: f64,
) -> Result<Option<f64>, DiffusionError> {
    if !(r >= 0.0) {
        return Err(DiffusionError::InvalidParameter("r must be >= 0"));
    }
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(DiffusionError::InvalidParameter("bin_width must be positive"));
    }
    if r == 0.0 {
        return Ok(Some(0.0));
    }
    let target = bin_of(x, bin_width);
    let need = r * bin_width;
    let mut acc = 0.0;
    for k in 0..path.positions.len() - 1 {
        if bin_of(path.positions[k], bin_width) == target {
            acc += path.clock[k + 1] - path.clock[k];
            if acc >= need {
                return Ok(Some(path.clock[k + 1]));
            }
        }
    }
    Ok(None)
}

/// Leftmost bin attaining the maximum: `(x*, L*)`.
pub fn favorite_point(profile: &LocalTimeProfile) -> Option<(f64, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in profile.values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, v)| (profile.bin_centers[i], v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{simulate_path, DrivingPath, Extension, SimOptions};
    use crate::environment::EnvironmentPath;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(positions: Vec<f64>, clock: Vec<f64>) -> DiffusionPath {
        DiffusionPath {
            alpha: 0.0,
            driving: DrivingPath {
                dt: 1.0,
                values: positions.clone(),
            },
            clock,
            positions,
            env: EnvironmentPath::flat(1.0, 10, 10).unwrap(),
        }
    }

    fn brownian(seed: u64, t: f64, dt: f64) -> DiffusionPath {
        let env = EnvironmentPath::flat(0.1, 10, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = SimOptions {
            extension: Extension::Flat,
            ..SimOptions::default()
        };
        simulate_path(&env, 1.0, &mut rng, dt, t, &opts).unwrap()
    }

    #[test]
    fn occupation_sums_to_t() {
        let path = brownian(2, 1.0, 1e-4);
        for &t in &[0.1, 0.5, 1.0] {
            let prof = local_time_occupation(&path, 0.04, t).unwrap();
            assert!((prof.mass() - t).abs() <= 1e-9 * t);
            assert!(prof.values.iter().all(|&v| v >= 0.0));
        }
        assert!(local_time_occupation(&path, 0.04, 2.0).is_err());
    }

    #[test]
    fn confined_path_fills_one_bin() {
        let path = synthetic(vec![0.0, 0.01, -0.01, 0.02], vec![0.0, 0.5, 1.0, 1.5]);
        let prof = local_time_occupation(&path, 0.1, 1.2).unwrap();
        assert_eq!(prof.values.len(), 1);
        assert!((prof.values[0] - 1.2 / 0.1).abs() < 1e-12);
    }

    #[test]
    fn flat_profile_matches_independent_histogram_of_b() {
        let path = brownian(9, 1.0, 1e-4);
        let w = 0.04;
        let prof = local_time_occupation(&path, w, 1.0).unwrap();
        // direct histogram of the driving values with unit-step clock
        let b = &path.driving.values;
        let last = path.clock_index(1.0).unwrap();
        let mut hist = std::collections::BTreeMap::new();
        for k in 0..=last {
            let end = path.clock.get(k + 1).copied().unwrap_or(1.0).min(1.0);
            *hist.entry((b[k] / w).round() as i64).or_insert(0.0) += end - path.clock[k];
        }
        for (j, occ) in hist {
            assert_eq!(prof.value_at(j as f64 * w), occ / w);
        }
    }

    #[test]
    fn transfer_vanishes_far_away_and_scales_with_prefactor() {
        let path = brownian(4, 1.0, 1e-4);
        let env = EnvironmentPath::flat(0.1, 10, 10).unwrap();
        let map = ScaleMap::new(&env, 1.0).unwrap();
        assert!(local_time_transfer(&path, &map, 0.0, 1.0, 0.02).unwrap() > 0.0);
        assert_eq!(local_time_transfer(&path, &map, 50.0, 1.0, 0.02).unwrap(), 0.0);

        // frozen driving path, W(x) = w at the query point: doubling α multiplies by e^{-αw}
        let w = 0.4;
        let env = EnvironmentPath::from_fn(0.1, 10, 10, |x| if x == 0.0 { 0.0 } else { w }).unwrap();
        let m1 = ScaleMap::new(&env, 1.0).unwrap();
        let m2 = ScaleMap::new(&env, 2.0).unwrap();
        let x = 0.5;
        let frozen = synthetic(vec![0.0; 3], vec![0.0, 1.0, 2.0]);
        let mut p1 = frozen.clone();
        p1.driving.values = vec![m1.evaluate(x).unwrap(); 3];
        let mut p2 = frozen;
        p2.driving.values = vec![m2.evaluate(x).unwrap(); 3];
        let l1 = local_time_transfer(&p1, &m1, x, 2.0, 0.01).unwrap();
        let l2 = local_time_transfer(&p2, &m2, x, 2.0, 0.01).unwrap();
        assert!((l2 / l1 - (-w).exp()).abs() < 1e-12);
    }

    #[test]
    fn hitting_time_cases() {
        let path = synthetic(vec![0.0, 1.0, -1.0, 2.0], vec![0.0, 1.0, 3.0, 4.0]);
        assert_eq!(hitting_time(&path, 0.0), Some(0.0));
        assert_eq!(hitting_time(&path, 0.5), Some(0.5));
        // -0.5 is crossed on the second step: 1 → -1 over [1, 3]
        assert_eq!(hitting_time(&path, -0.5), Some(2.5));
        // 1.5 is crossed on the last step: -1 → 2 over [3, 4]
        assert_eq!(hitting_time(&path, 1.5), Some(3.0 + 2.5 / 3.0));
        assert_eq!(hitting_time(&path, 7.0), None);
    }

    #[test]
    fn inverse_local_time_properties() {
        let path = brownian(6, 1.0, 1e-4);
        let w = 0.04;
        assert_eq!(inverse_local_time(&path, 0.0, 0.0, w).unwrap(), Some(0.0));
        let mut prev = 0.0;
        for &r in &[0.05, 0.1, 0.2, 0.3] {
            let Some(s) = inverse_local_time(&path, r, 0.0, w).unwrap() else {
                break;
            };
            assert!(s >= prev);
            prev = s;
            let at = local_time_occupation(&path, w, s).unwrap().value_at(0.0);
            assert!(at >= r * (1.0 - 1e-12));
            let k = path.clock_index(s).unwrap();
            let before = local_time_occupation(&path, w, path.clock[k - 1]).unwrap().value_at(0.0);
            assert!(before < r);
        }
        assert_eq!(inverse_local_time(&path, 1e9, 0.0, w).unwrap(), None);
    }

    #[test]
    fn favorite_point_rules() {
        let single = LocalTimeProfile {
            t: 1.0,
            bin_width: 1.0,
            bin_centers: vec![3.0],
            values: vec![2.0],
        };
        assert_eq!(favorite_point(&single), Some((3.0, 2.0)));
        let tie = LocalTimeProfile {
            t: 1.0,
            bin_width: 1.0,
            bin_centers: vec![-1.0, 0.0, 1.0],
            values: vec![5.0, 1.0, 5.0],
        };
        assert_eq!(favorite_point(&tie), Some((-1.0, 5.0)));

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let n = rng.random_range(1..40);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
            let prof = LocalTimeProfile {
                t: 1.0,
                bin_width: 0.5,
                bin_centers: (0..n).map(|i| i as f64 * 0.5).collect(),
                values: values.clone(),
            };
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            let idx = values.iter().position(|&v| v == max).unwrap();
            assert_eq!(favorite_point(&prof), Some((idx as f64 * 0.5, max)));
        }
    }
}
