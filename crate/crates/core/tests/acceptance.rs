//! Runs every acceptance criterion at its stated size and tolerance and prints
//! one PASS/FAIL line each. Exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use brox_core::bessel::besq2_hitting_time;
use brox_core::diffusion::{local_time_occupation, simulate_path, Extension, SimOptions};
use brox_core::environment::{
    find_h_extrema, sample_environment, standard_valley, standard_valley_widening, EnvironmentPath, WideningPolicy,
};
use brox_core::experiments::{domain, stream_rng, ExperimentConfig, ExperimentId, ExperimentReport, Session};
use brox_core::stats::SampleSet;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn checks_with(report: &ExperimentReport, prefixes: &[&str]) -> Outcome {
    let picked: Vec<_> = report
        .checks
        .iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect();
    let mut ok = !picked.is_empty() && report.failure_rates_ok();
    let mut parts = Vec::new();
    for c in &picked {
        ok &= c.verdict.passed();
        parts.push(format!("{:?} {} {}", c.verdict, c.name, c.detail));
    }
    let rates: Vec<String> = report.failures.iter().map(|f| format!("{}:{:.3}", f.alpha, f.rate)).collect();
    parts.push(format!("replica failure rates [{}]", rates.join(", ")));
    outcome(ok, parts.join("\n      "))
}

fn identity(session: &Session) -> Outcome {
    match session.run(ExperimentId::Identity) {
        Ok(r) => checks_with(&r, &["functional vs alias", "functional mean", "alias mean"]),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn besq_mean() -> Outcome {
    let n = 10_000u64;
    let draw = |dt: f64, group: u64| -> Result<SampleSet, String> {
        let xs = (0..n)
            .map(|k| {
                let mut rng = stream_rng(99, domain::REFERENCE, group, k);
                besq2_hitting_time(dt, 1_000_000_000, &mut rng).map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        SampleSet::new(xs).map_err(|e| e.to_string())
    };
    let (a, b) = match (draw(1e-5, 0), draw(5e-6, 1)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e),
    };
    let (m, se) = (a.mean(), a.std_error());
    let width = 6.0 * se;
    let shift = (b.mean() - m).abs();
    outcome(
        (m - 0.5).abs() < 3.0 * se && shift < width,
        format!("mean {m:.5} ± {:.5} (3σ); halved dt mean {:.5}, shift {shift:.5} vs CI width {width:.5}", 3.0 * se, b.mean()),
    )
}

fn degenerate() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    let env = EnvironmentPath::flat(0.01, 100, 100).expect("flat grid");
    let opts = SimOptions { extension: Extension::Flat, ..SimOptions::default() };
    for k in 0..100u64 {
        let mut rng = stream_rng(5, domain::REPLICA, 0, k);
        let t = 1.0;
        let path = match simulate_path(&env, 1.0, &mut rng, 1e-4, t, &opts) {
            Ok(p) => p,
            Err(e) => return outcome(false, e.to_string()),
        };
        exact &= path.positions == path.driving.values[..path.positions.len()];
        exact &= path.clock.iter().enumerate().all(|(i, &c)| (c - i as f64 * 1e-4).abs() <= 1e-9 * (1.0 + c));
        let prof = match local_time_occupation(&path, 0.01, t) {
            Ok(p) => p,
            Err(e) => return outcome(false, e.to_string()),
        };
        worst = worst.max((prof.mass() - t).abs() / t);
    }
    outcome(exact && worst <= 1e-2, format!("bit-exact {exact}; worst occupation error {worst:.2e} over 100 replicas"))
}

fn valley_machinery() -> Outcome {
    let mut mismatches = 0;
    for seed in 0..200u64 {
        let env = common::random_grid(10_000 + seed, seed % 2 == 0);
        for h in [0.5, 1.0, 2.0] {
            let got: Vec<_> = find_h_extrema(&env, h).expect("h > 0").iter().map(|e| (e.index, e.kind)).collect();
            let v = standard_valley(&env, h).ok().map(|v| (v.p_index, v.m_index, v.q_index));
            if got != common::brute_extrema(&env, h) || v != common::brute_valley(&env, h) {
                mismatches += 1;
            }
        }
    }
    let mut good = 0;
    let n = 500u64;
    for k in 0..n {
        let mut rng = stream_rng(11, domain::REPLICA, 7, k);
        let found = sample_environment(1e-3, -4.0, 4.0, &mut rng)
            .and_then(|env| standard_valley_widening(env, 1.0, WideningPolicy { max_half_width: 1e3 }, &mut rng));
        if let Ok((_, v)) = found {
            if v.ascent < 1.0 && 1.0 < v.depth {
                good += 1;
            }
        }
    }
    let frac = good as f64 / n as f64;
    outcome(
        mismatches == 0 && frac >= 0.99,
        format!("{mismatches} oracle mismatches on 200 grids × 3 thresholds; A < 1 < D in {good}/{n} = {frac:.3}"),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        alphas: vec![3.0, 4.0, 5.0],
        replicas: 24,
        reference_samples: 200,
        identity_samples: 200,
        bootstrap_resamples: 200,
        ..ExperimentConfig::default()
    };
    let run = |workers: usize| -> Result<Vec<serde_json::Value>, String> {
        let s = Session::new(ExperimentConfig { workers, ..cfg.clone() }).map_err(|e| e.to_string())?;
        ExperimentId::ALL
            .iter()
            .map(|&id| {
                let mut v = s.run(id).map_err(|e| e.to_string())?.statistics();
                v.as_object_mut().expect("object").remove("config");
                Ok(v)
            })
            .collect()
    };
    match (run(1), run(1), run(2), run(3)) {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => {
            outcome(a == b && a == c && a == d, format!("six experiments; repeat equal {}, 2 workers equal {}, 3 workers equal {}", a == b, a == c, a == d))
        }
        _ => outcome(false, "a run failed"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let session = match Session::new(ExperimentConfig::default()) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL  session setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut all = true;
    let mut report = |n: u32, title: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        all &= o.ok;
        println!(
            "{}  criterion {n}: {title} ({:.1}s)\n      {}",
            if o.ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    };
    report(1, "functional vs Ray-Knight alias identity", &|| identity(&session));
    report(2, "BESQ(2) hitting-time mean", &besq_mean);
    report(3, "degenerate reduction with W = 0", &degenerate);
    report(4, "normalized maximal local time", &|| match session.run(ExperimentId::SupLocaltime) {
        Ok(r) => checks_with(&r, &["L*/t vs 1/∫e^-R"]),
        Err(e) => outcome(false, e.to_string()),
    });
    report(5, "environment-functional approximation", &|| match session.run(ExperimentId::EnvApprox) {
        Ok(r) => checks_with(&r, &["fraction within delta = 0.5 "]),
        Err(e) => outcome(false, e.to_string()),
    });
    report(6, "profile marginals", &|| match session.run(ExperimentId::Profile) {
        Ok(r) => checks_with(&r, &["marginal at x", "profile normalization"]),
        Err(e) => outcome(false, e.to_string()),
    });
    report(7, "exponent law", &|| match session.run(ExperimentId::Exponent) {
        Ok(r) => checks_with(&r, &["log L(e^a, 0)/a", "clamp rate"]),
        Err(e) => outcome(false, e.to_string()),
    });
    report(8, "valley machinery", &valley_machinery);
    report(9, "determinism across repeats and worker counts", &determinism);
    println!("{} in {:.1}s", if all { "ALL PASS" } else { "SOME CRITERIA FAILED" }, start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
