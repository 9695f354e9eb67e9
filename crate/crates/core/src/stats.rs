//! Empirical distributions, Kolmogorov–Smirnov tests, bootstrap intervals and
//! monotone-trend checks.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("sample of size {n} is below the minimum {min}")]
    Undersized { n: usize, min: usize },
    #[error("a trend needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("trend abscissae must be strictly increasing")]
    UnorderedPoints,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Sorted sample with free-form provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    values: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl SampleSet {
    /// Sorts the values; NaNs are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::InvalidParameter("NaN in sample"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
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

    pub fn ecdf(&self, x: f64) -> Result<f64, StatsError> {
        ecdf_sorted(&self.values, x)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        let n = self.values.len() as f64;
        let m = self.mean();
        let var = self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn ecdf_sorted(sorted: &[f64], x: f64) -> Result<f64, StatsError> {
    if sorted.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64)
}

/// Fraction of values `<= x`.
pub fn ecdf(sample: &[f64], x: f64) -> Result<f64, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(sample.iter().filter(|&&v| v <= x).count() as f64 / sample.len() as f64)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // 1 - (√(2π)/λ) Σ e^{-(2k-1)² π² / (8λ²)}
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let s: f64 = (1..=6).map(|k| y.powi((2 * k - 1) * (2 * k - 1))).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let x = (-2.0 * lambda * lambda).exp();
        let s: f64 = (1..=10)
            .map(|k: i32| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * x.powi(k * k)
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub test: String,
    #[serde(rename = "D")]
    pub statistic: f64,
    pub n: usize,
    pub m: Option<usize>,
    #[serde(rename = "p_bound")]
    pub p_value_bound: f64,
}

impl KsResult {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value_bound > level
    }

    /// `{test, D, n, m, p_bound, verdict}`.
    pub fn to_json(&self, level: f64) -> serde_json::Value {
        serde_json::json!({
            "test": self.test,
            "D": self.statistic,
            "n": self.n,
            "m": self.m,
            "p_bound": self.p_value_bound,
            "verdict": Verdict::from_bool(self.passes(level)),
        })
    }
}

/// Two-sample KS statistic by a merge over the pooled order statistics.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < n && a[i] == x {
            i += 1;
        }
        while j < m && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(KsResult {
        test: "ks_two_sample".into(),
        statistic: d,
        n,
        m: Some(m),
        p_value_bound: kolmogorov_q(ne.sqrt() * d),
    })
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &[f64], cdf: F) -> Result<KsResult, StatsError> {
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let a = sorted(a);
    let n = a.len() as f64;
    let d = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        test: "ks_one_sample".into(),
        statistic: d,
        n: a.len(),
        m: None,
        p_value_bound: kolmogorov_q(n.sqrt() * d),
    })
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_mean_ci<R: Rng + ?Sized>(
    sample: &[f64],
    level: f64,
    resamples: usize,
    rng: &mut R,
) -> Result<(f64, f64), StatsError> {
    if sample.len() < 10 {
        return Err(StatsError::Undersized {
            n: sample.len(),
            min: 10,
        });
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(StatsError::InvalidParameter("level in (0,1) and resamples > 0"));
    }
    let n = sample.len();
    let shift = sample[0];
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let s: f64 = (0..n).map(|_| sample[rng.random_range(0..n)] - shift).sum();
            shift + s / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let idx = |q: f64| ((q * resamples as f64).floor() as usize).min(resamples - 1);
    Ok((means[idx(tail)], means[idx(1.0 - tail)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendDirection {
    /// Distances that should shrink: final value must be below the threshold.
    Nonincreasing,
    /// Fractions that should grow: final value must reach the threshold.
    Nondecreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendRule {
    pub direction: TrendDirection,
    pub slack: f64,
    pub threshold: f64,
}

impl TrendRule {
    pub fn nonincreasing(threshold: f64) -> Self {
        Self {
            direction: TrendDirection::Nonincreasing,
            slack: 1.1,
            threshold,
        }
    }

    pub fn nondecreasing(threshold: f64) -> Self {
        Self {
            direction: TrendDirection::Nondecreasing,
            slack: 1.1,
            threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    pub verdict: Verdict,
    pub monotone: bool,
    pub final_ok: bool,
    pub points: Vec<(f64, f64)>,
}

/// Finite-`α` stand-in for a limit claim: monotone up to `slack` per step and
/// a final value on the right side of `threshold`.
pub fn trend_check(points: &[(f64, f64)], rule: &TrendRule) -> Result<TrendVerdict, StatsError> {
    if points.len() < 3 {
        return Err(StatsError::TooFewPoints(points.len()));
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(StatsError::UnorderedPoints);
    }
    let last = points[points.len() - 1].1;
    let (monotone, final_ok) = match rule.direction {
        TrendDirection::Nonincreasing => (
            points.windows(2).all(|w| w[1].1 <= rule.slack * w[0].1),
            last < rule.threshold,
        ),
        TrendDirection::Nondecreasing => (
            points.windows(2).all(|w| w[1].1 * rule.slack >= w[0].1),
            last >= rule.threshold,
        ),
    };
    Ok(TrendVerdict {
        verdict: Verdict::from_bool(monotone && final_ok),
        monotone,
        final_ok,
        points: points.to_vec(),
    })
}
