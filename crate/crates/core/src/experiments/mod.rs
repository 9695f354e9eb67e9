//! Config-driven experiments comparing simulated local times with their limit laws.
//!
//! A [`Session`] owns the expensive shared pieces (one replica batch per `α`,
//! one set of reference draws) and computes each lazily, so `all` pays for
//! them once. Every random draw comes from a stream indexed by
//! `(domain, group, index)`, and batches are collected in index order, which
//! makes reports independent of the worker count.

mod config;
mod replica;

pub use config::ExperimentConfig;
pub use replica::{domain, run_replica, stream_rng, ReplicaOutcome};

use std::cell::OnceCell;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::bessel::{
    functional_sample, profile_sample, rayknight_alias_sample, sample_profile_point, HorizonRule,
    TwoSidedBessel,
};
use crate::stats::{
    bootstrap_mean_ci, ks_one_sample, ks_two_sample, trend_check, SampleSet, TrendRule, Verdict,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("sampler failure: {0}")]
    Sampler(String),
    #[error("statistics failure: {0}")]
    Stats(#[from] crate::stats::StatsError),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Identity,
    SupLocaltime,
    Profile,
    EnvApprox,
    Exponent,
    Position,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Identity,
        ExperimentId::SupLocaltime,
        ExperimentId::Profile,
        ExperimentId::EnvApprox,
        ExperimentId::Exponent,
        ExperimentId::Position,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Identity => "identity",
            ExperimentId::SupLocaltime => "sup-localtime",
            ExperimentId::Profile => "profile",
            ExperimentId::EnvApprox => "env-approx",
            ExperimentId::Exponent => "exponent",
            ExperimentId::Position => "position",
        }
    }
}

/// A verdict together with the statistic behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub detail: Value,
}

impl Check {
    fn new(name: &str, ok: bool, detail: Value) -> Self {
        Self {
            name: name.to_string(),
            verdict: Verdict::from_bool(ok),
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSummary {
    pub alpha: f64,
    pub failed: usize,
    pub total: usize,
    pub rate: f64,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub master_seed: u64,
    pub stream_layout: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub per_alpha: Vec<Value>,
    pub checks: Vec<Check>,
    pub failures: Vec<FailureSummary>,
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub samples: Vec<(String, Vec<f64>)>,
}

impl ExperimentReport {
    fn new(id: ExperimentId, cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: id.name().to_string(),
            config: cfg.clone(),
            provenance: Provenance {
                generator: "ChaCha8".into(),
                master_seed: cfg.seed,
                stream_layout: "domain<<48 | alpha_index<<32 | replica".into(),
            },
            per_alpha: Vec::new(),
            checks: Vec::new(),
            failures: Vec::new(),
            wall_clock_seconds: 0.0,
            samples: Vec::new(),
        }
    }

    pub fn failure_rates_ok(&self) -> bool {
        self.failures.iter().all(|f| f.rate < self.config.max_failure_rate)
    }

    /// Every check passes and every failure rate is below the cap.
    pub fn passed(&self) -> bool {
        self.failure_rates_ok() && self.checks.iter().all(|c| c.verdict.passed())
    }

    /// The report without wall-clock time, for reproducibility comparisons.
    pub fn statistics(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("wall_clock_seconds");
        v
    }

    /// `samples_<experiment>.csv`: a `#` metadata line, a header, one column per sample set.
    pub fn write_samples_csv(&self, dir: &Path) -> std::io::Result<()> {
        let path = dir.join(format!("samples_{}.csv", self.experiment));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let c = &self.config;
        writeln!(
            out,
            "# seed={} dx={} bessel_dt={} bessel_cutoff={} besq_dt={} replicas={}",
            c.seed, c.dx, c.bessel_dt, c.bessel_cutoff, c.besq_dt, c.replicas
        )?;
        let names: Vec<&str> = self.samples.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(out, "{}", names.join(","))?;
        let rows = self.samples.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
        for i in 0..rows {
            let mut line = String::new();
            for (k, (_, v)) in self.samples.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                if let Some(x) = v.get(i) {
                    write!(line, "{x}").expect("string write");
                }
            }
            writeln!(out, "{line}")?;
        }
        out.flush()
    }
}

/// Reference draws of the limit laws.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    /// `1 / ∫ e^{-R}`.
    pub inverse_functional: Vec<f64>,
    /// `1 / (4τ + 4τ̃)`.
    pub inverse_alias: Vec<f64>,
    /// `ℛ(x)` per configured offset.
    pub marginals: Vec<Vec<f64>>,
    /// Points drawn from `ℛ`.
    pub profile_draws: Vec<f64>,
    pub max_truncation_ratio: f64,
}

pub struct ReplicaBatch {
    pub alpha: f64,
    pub outcomes: Vec<Result<ReplicaOutcome, String>>,
}

impl ReplicaBatch {
    pub fn ok(&self) -> impl Iterator<Item = &ReplicaOutcome> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    fn failure_summary(&self) -> FailureSummary {
        let messages: Vec<String> = self.outcomes.iter().filter_map(|o| o.as_ref().err().cloned()).collect();
        let total = self.outcomes.len();
        FailureSummary {
            alpha: self.alpha,
            failed: messages.len(),
            total,
            rate: messages.len() as f64 / total as f64,
            messages: messages.into_iter().take(10).collect(),
        }
    }
}

pub struct Session {
    cfg: ExperimentConfig,
    pool: rayon::ThreadPool,
    batches: OnceCell<Vec<ReplicaBatch>>,
    reference: OnceCell<Result<ReferenceSet, String>>,
}

fn sorted_median(xs: &[f64]) -> f64 {
    SampleSet::new(xs.to_vec()).map(|s| s.median()).unwrap_or(f64::NAN)
}

impl Session {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?;
        Ok(Self {
            cfg,
            pool,
            batches: OnceCell::new(),
            reference: OnceCell::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    fn horizon_rule(&self) -> HorizonRule {
        HorizonRule {
            cutoff: self.cfg.bessel_cutoff,
            ..HorizonRule::default()
        }
    }

    pub fn batches(&self) -> &[ReplicaBatch] {
        self.batches.get_or_init(|| {
            let cfg = &self.cfg;
            (0..cfg.alphas.len())
                .map(|ai| {
                    let outcomes = self.pool.install(|| {
                        (0..cfg.replicas)
                            .into_par_iter()
                            .map(|k| run_replica(cfg, ai, k))
                            .collect()
                    });
                    ReplicaBatch {
                        alpha: cfg.alphas[ai],
                        outcomes,
                    }
                })
                .collect()
        })
    }

    pub fn reference(&self) -> Result<&ReferenceSet, ExperimentError> {
        self.reference
            .get_or_init(|| self.build_reference())
            .as_ref()
            .map_err(|e| ExperimentError::Sampler(e.clone()))
    }

    fn build_reference(&self) -> Result<ReferenceSet, String> {
        let cfg = &self.cfg;
        let rule = self.horizon_rule();
        let offsets = &cfg.marginal_offsets;
        type Draw = (f64, Vec<f64>, f64, f64);
        let draws: Vec<Result<Draw, String>> = self.pool.install(|| {
            (0..cfg.reference_samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream_rng(cfg.seed, domain::REFERENCE, 0, k as u64);
                    let two = TwoSidedBessel::sample(cfg.bessel_dt, &rule, &mut rng).map_err(|e| e.to_string())?;
                    let f = functional_sample(&two);
                    let marg = profile_sample(&two, offsets).map_err(|e| e.to_string())?;
                    let point = sample_profile_point(&two, &mut rng);
                    Ok((1.0 / f.value, marg, point, f.truncation_bound / f.value))
                })
                .collect()
        });
        let alias: Vec<Result<f64, String>> = self.pool.install(|| {
            (0..cfg.reference_samples)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream_rng(cfg.seed, domain::REFERENCE_ALIAS, 0, k as u64);
                    rayknight_alias_sample(cfg.besq_dt, cfg.besq_max_steps, &mut rng)
                        .map(|v| 1.0 / v)
                        .map_err(|e| e.to_string())
                })
                .collect()
        });
        let mut out = ReferenceSet {
            inverse_functional: Vec::new(),
            inverse_alias: alias.into_iter().collect::<Result<_, _>>()?,
            marginals: vec![Vec::new(); offsets.len()],
            profile_draws: Vec::new(),
            max_truncation_ratio: 0.0,
        };
        for d in draws {
            let (inv, marg, point, ratio) = d?;
            out.inverse_functional.push(inv);
            for (slot, v) in out.marginals.iter_mut().zip(marg) {
                slot.push(v);
            }
            out.profile_draws.push(point);
            out.max_truncation_ratio = out.max_truncation_ratio.max(ratio);
        }
        Ok(out)
    }

    fn ks_trend_checks(
        &self,
        report: &mut ExperimentReport,
        label: &str,
        stats: &[(f64, f64)],
        cap: f64,
    ) -> Result<(), ExperimentError> {
        let rule = TrendRule {
            slack: self.cfg.slack,
            ..TrendRule::nonincreasing(cap)
        };
        if stats.len() >= 3 {
            let t = trend_check(stats, &rule)?;
            report.checks.push(Check::new(
                &format!("{label}: KS distance nonincreasing in alpha, final < {cap}"),
                t.verdict.passed(),
                serde_json::to_value(&t).expect("serializable"),
            ));
        } else {
            let ok = stats.last().is_some_and(|p| p.1 < cap);
            report.checks.push(Check::new(
                &format!("{label}: KS distance at the last alpha < {cap} (fewer than 3 alphas, no trend)"),
                ok,
                json!({ "points": stats }),
            ));
        }
        Ok(())
    }

    fn attach_failures(&self, report: &mut ExperimentReport) {
        report.failures = self.batches().iter().map(|b| b.failure_summary()).collect();
    }

    pub fn run(&self, id: ExperimentId) -> Result<ExperimentReport, ExperimentError> {
        let start = Instant::now();
        let mut report = match id {
            ExperimentId::Identity => self.identity()?,
            ExperimentId::SupLocaltime => self.sup_localtime()?,
            ExperimentId::Profile => self.profile()?,
            ExperimentId::EnvApprox => self.env_approx()?,
            ExperimentId::Exponent => self.exponent()?,
            ExperimentId::Position => self.position()?,
        };
        report.wall_clock_seconds = start.elapsed().as_secs_f64();
        Ok(report)
    }

    fn identity(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let n = cfg.identity_samples;
        let rule = self.horizon_rule();
        let functional: Vec<Result<(f64, f64), String>> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream_rng(cfg.seed, domain::IDENTITY_FUNCTIONAL, 0, k as u64);
                    let two = TwoSidedBessel::sample(cfg.bessel_dt, &rule, &mut rng).map_err(|e| e.to_string())?;
                    let f = functional_sample(&two);
                    Ok((f.value, f.truncation_bound))
                })
                .collect()
        });
        let alias: Vec<Result<f64, String>> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let mut rng = stream_rng(cfg.seed, domain::IDENTITY_ALIAS, 0, k as u64);
                    rayknight_alias_sample(cfg.besq_dt, cfg.besq_max_steps, &mut rng).map_err(|e| e.to_string())
                })
                .collect()
        });
        let functional: Vec<(f64, f64)> = functional
            .into_iter()
            .collect::<Result<_, _>>()
            .map_err(ExperimentError::Sampler)?;
        let alias: Vec<f64> = alias.into_iter().collect::<Result<_, _>>().map_err(ExperimentError::Sampler)?;
        let values: Vec<f64> = functional.iter().map(|p| p.0).collect();
        let max_bound = functional.iter().map(|p| p.1).fold(0.0, f64::max);

        let mut report = ExperimentReport::new(ExperimentId::Identity, cfg);
        let ks = ks_two_sample(&values, &alias)?;
        report.checks.push(Check::new(
            "functional vs alias: two-sample KS passes",
            ks.passes(cfg.ks_level),
            ks.to_json(cfg.ks_level),
        ));
        for (label, xs, dom) in [
            ("functional", &values, 0u64),
            ("alias", &alias, 1u64),
        ] {
            let set = SampleSet::new(xs.clone())?;
            let (mean, se) = (set.mean(), set.std_error());
            let mut rng = stream_rng(cfg.seed, domain::BOOTSTRAP, 0, dom);
            let ci = if xs.len() >= 10 {
                Some(bootstrap_mean_ci(xs, 0.95, cfg.bootstrap_resamples, &mut rng)?)
            } else {
                None
            };
            report.checks.push(Check::new(
                &format!("{label} mean within 3 standard errors of 4"),
                (mean - 4.0).abs() < 3.0 * se,
                json!({ "mean": mean, "std_error": se, "bootstrap_ci95": ci, "n": xs.len() }),
            ));
        }
        report.per_alpha.push(json!({
            "n": n,
            "max_truncation_bound": max_bound,
            "functional_median": sorted_median(&values),
            "alias_median": sorted_median(&alias),
        }));
        report.samples = vec![("functional".into(), values), ("alias".into(), alias)];
        Ok(report)
    }

    fn sup_localtime(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let reference = self.reference()?;
        let mut report = ExperimentReport::new(ExperimentId::SupLocaltime, cfg);
        let mut ks_ref = Vec::new();
        let mut ks_alias = Vec::new();
        for batch in self.batches() {
            let sup: Vec<f64> = batch.ok().map(|o| o.sup_normalized).collect();
            if sup.is_empty() {
                return Err(ExperimentError::Sampler(format!("no successful replicas at alpha {}", batch.alpha)));
            }
            let ks = ks_two_sample(&sup, &reference.inverse_functional)?;
            let ks2 = ks_two_sample(&sup, &reference.inverse_alias)?;
            ks_ref.push((batch.alpha, ks.statistic));
            ks_alias.push((batch.alpha, ks2.statistic));
            let fav: Vec<f64> = batch.ok().map(|o| o.favorite_offset.abs()).collect();
            report.per_alpha.push(json!({
                "alpha": batch.alpha,
                "replicas_ok": sup.len(),
                "ks_vs_functional": ks.to_json(cfg.ks_level),
                "ks_vs_alias": ks2.to_json(cfg.ks_level),
                "median": sorted_median(&sup),
                "reference_median": sorted_median(&reference.inverse_functional),
                "median_abs_favorite_offset": sorted_median(&fav),
            }));
            report.samples.push((format!("alpha_{}", batch.alpha), sup));
        }
        self.ks_trend_checks(&mut report, "L*/t vs 1/∫e^-R", &ks_ref, cfg.ks_cap)?;
        let a = trend_check(&ks_ref, &TrendRule { slack: cfg.slack, ..TrendRule::nonincreasing(cfg.ks_cap) }).ok();
        let b = trend_check(&ks_alias, &TrendRule { slack: cfg.slack, ..TrendRule::nonincreasing(cfg.ks_cap) }).ok();
        if let (Some(a), Some(b)) = (a, b) {
            report.checks.push(Check::new(
                "same verdict with the alias reference law",
                a.verdict == b.verdict,
                json!({ "functional": a.verdict, "alias": b.verdict, "alias_points": ks_alias }),
            ));
        }
        report.per_alpha.push(json!({ "reference_max_truncation_ratio": reference.max_truncation_ratio }));
        report.samples.push(("reference".into(), reference.inverse_functional.clone()));
        self.attach_failures(&mut report);
        Ok(report)
    }

    fn profile(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let reference = self.reference()?;
        let mut report = ExperimentReport::new(ExperimentId::Profile, cfg);
        let mut per_x: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.marginal_offsets.len()];
        let mut worst_norm: f64 = 0.0;
        let zero = cfg.marginal_offsets.iter().position(|&x| x == 0.0);
        let mut last_medians = None;
        for batch in self.batches() {
            let ok: Vec<&ReplicaOutcome> = batch.ok().collect();
            if ok.is_empty() {
                return Err(ExperimentError::Sampler(format!("no successful replicas at alpha {}", batch.alpha)));
            }
            let mut entries = Vec::new();
            for (j, &x) in cfg.marginal_offsets.iter().enumerate() {
                let vals: Vec<f64> = ok.iter().map(|o| o.marginals[j]).collect();
                let ks = ks_two_sample(&vals, &reference.marginals[j])?;
                per_x[j].push((batch.alpha, ks.statistic));
                entries.push(json!({ "x": x, "ks": ks.to_json(cfg.ks_level), "median": sorted_median(&vals) }));
                report.samples.push((format!("alpha_{}_x_{}", batch.alpha, x), vals));
            }
            let norms: Vec<f64> = ok.iter().map(|o| o.normalization).collect();
            let mean_norm = norms.iter().sum::<f64>() / norms.len() as f64;
            worst_norm = worst_norm.max((mean_norm - 1.0).abs());
            if let Some(z) = zero {
                let at_bottom: Vec<f64> = ok.iter().map(|o| o.marginals[z]).collect();
                let sup: Vec<f64> = ok.iter().map(|o| o.sup_normalized).collect();
                last_medians = Some((sorted_median(&at_bottom), sorted_median(&sup)));
            }
            report.per_alpha.push(json!({
                "alpha": batch.alpha,
                "replicas_ok": ok.len(),
                "marginals": entries,
                "mean_normalization": mean_norm,
            }));
        }
        for (j, &x) in cfg.marginal_offsets.iter().enumerate() {
            self.ks_trend_checks(&mut report, &format!("marginal at x = {x}"), &per_x[j], cfg.marginal_ks_cap)?;
        }
        report.checks.push(Check::new(
            &format!("profile normalization within {}", cfg.normalization_tol),
            worst_norm <= cfg.normalization_tol,
            json!({ "worst_abs_deviation": worst_norm }),
        ));
        if let Some((bottom, sup)) = last_medians {
            let rel = (bottom - sup).abs() / sup;
            report.checks.push(Check::new(
                &format!("median at the bottom vs median of L*/t within {}", cfg.median_band),
                rel <= cfg.median_band,
                json!({ "bottom_median": bottom, "sup_median": sup, "relative_gap": rel }),
            ));
        }
        self.attach_failures(&mut report);
        Ok(report)
    }

    fn env_approx(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let mut report = ExperimentReport::new(ExperimentId::EnvApprox, cfg);
        let mut curves: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.deltas.len()];
        for batch in self.batches() {
            let d: Vec<f64> = batch.ok().map(|o| o.window_discrepancy).collect();
            if d.is_empty() {
                return Err(ExperimentError::Sampler(format!("no successful replicas at alpha {}", batch.alpha)));
            }
            let mut fr = Vec::new();
            for (j, &delta) in cfg.deltas.iter().enumerate() {
                let f = d.iter().filter(|&&v| v <= delta).count() as f64 / d.len() as f64;
                curves[j].push((batch.alpha, f));
                fr.push(json!({ "delta": delta, "fraction": f }));
            }
            let bottom: Vec<f64> = batch.ok().map(|o| o.bottom_ratio_error).collect();
            let inside: Vec<f64> = batch.ok().map(|o| o.window_time_fraction).collect();
            report.per_alpha.push(json!({
                "alpha": batch.alpha,
                "replicas_ok": d.len(),
                "fractions": fr,
                "median_discrepancy": sorted_median(&d),
                "median_bottom_ratio_error": sorted_median(&bottom),
                "median_window_time_fraction": sorted_median(&inside),
            }));
            report.samples.push((format!("alpha_{}", batch.alpha), d));
        }
        for (j, &delta) in cfg.deltas.iter().enumerate() {
            let threshold = if delta == cfg.delta_star { cfg.pass_fraction } else { 0.0 };
            let rule = TrendRule {
                slack: cfg.slack,
                ..TrendRule::nondecreasing(threshold)
            };
            if curves[j].len() >= 3 {
                let t = trend_check(&curves[j], &rule)?;
                report.checks.push(Check::new(
                    &format!("fraction within delta = {delta} nondecreasing, final >= {threshold}"),
                    t.verdict.passed(),
                    serde_json::to_value(&t).expect("serializable"),
                ));
            }
        }
        self.attach_failures(&mut report);
        Ok(report)
    }

    fn exponent(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let mut report = ExperimentReport::new(ExperimentId::Exponent, cfg);
        let mut stats = Vec::new();
        let mut last_clamp = 0.0;
        for batch in self.batches() {
            let mut clamped = 0usize;
            let mut zero = 0usize;
            let vals: Vec<f64> = batch
                .ok()
                .map(|o| {
                    let l = o.local_time_at_origin;
                    if l <= 0.0 {
                        zero += 1;
                        clamped += 1;
                        return 0.0;
                    }
                    let v = l.ln() / batch.alpha;
                    if !(0.0..=1.0).contains(&v) {
                        clamped += 1;
                    }
                    v.clamp(0.0, 1.0)
                })
                .collect();
            if vals.is_empty() {
                return Err(ExperimentError::Sampler(format!("no successful replicas at alpha {}", batch.alpha)));
            }
            let ks = ks_one_sample(&vals, |u| {
                let u = u.clamp(0.0, 1.0);
                2.0 * u - u * u
            })?;
            let rate = clamped as f64 / vals.len() as f64;
            last_clamp = rate;
            stats.push((batch.alpha, ks.statistic));
            report.per_alpha.push(json!({
                "alpha": batch.alpha,
                "replicas_ok": vals.len(),
                "ks": ks.to_json(cfg.ks_level),
                "clamp_rate": rate,
                "zero_local_time": zero,
                "median": sorted_median(&vals),
            }));
            report.samples.push((format!("alpha_{}", batch.alpha), vals));
        }
        self.ks_trend_checks(&mut report, "log L(e^a, 0)/a vs min(U, U')", &stats, cfg.exponent_ks_cap)?;
        report.checks.push(Check::new(
            &format!("clamp rate at the last alpha < {}", cfg.max_clamp_rate),
            last_clamp < cfg.max_clamp_rate,
            json!({ "clamp_rate": last_clamp }),
        ));
        self.attach_failures(&mut report);
        Ok(report)
    }

    fn position(&self) -> Result<ExperimentReport, ExperimentError> {
        let cfg = &self.cfg;
        let reference = self.reference()?;
        let mut report = ExperimentReport::new(ExperimentId::Position, cfg);
        let mut stats = Vec::new();
        for batch in self.batches() {
            let off: Vec<f64> = batch.ok().map(|o| o.position_offset).collect();
            if off.is_empty() {
                return Err(ExperimentError::Sampler(format!("no successful replicas at alpha {}", batch.alpha)));
            }
            let ks = ks_two_sample(&off, &reference.profile_draws)?;
            stats.push((batch.alpha, ks.statistic));
            report.per_alpha.push(json!({
                "alpha": batch.alpha,
                "replicas_ok": off.len(),
                "ks": ks.to_json(cfg.ks_level),
                "median_abs_offset": sorted_median(&off.iter().map(|x| x.abs()).collect::<Vec<_>>()),
            }));
            report.samples.push((format!("alpha_{}", batch.alpha), off));
        }
        self.ks_trend_checks(&mut report, "X(e^a) - m_a vs draws from the profile", &stats, cfg.position_ks_cap)?;
        report.samples.push(("reference".into(), reference.profile_draws.clone()));
        self.attach_failures(&mut report);
        Ok(report)
    }
}

pub fn run_identity_check(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::Identity)
}

pub fn run_sup_localtime(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::SupLocaltime)
}

pub fn run_profile_marginals(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::Profile)
}

pub fn run_env_functional_approx(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::EnvApprox)
}

pub fn run_exponent_law(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::Exponent)
}

pub fn run_position_density(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    Session::new(cfg.clone())?.run(ExperimentId::Position)
}

/// Run every experiment on one shared session.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<ExperimentReport>, ExperimentError> {
    let session = Session::new(cfg.clone())?;
    ExperimentId::ALL.iter().map(|&id| session.run(id)).collect()
}
