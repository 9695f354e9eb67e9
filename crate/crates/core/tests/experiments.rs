use std::process::Command;

use brox_core::experiments::{run_env_functional_approx, ExperimentConfig, ExperimentId, Session};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        alphas: vec![3.0, 4.0, 5.0],
        replicas: 12,
        reference_samples: 100,
        identity_samples: 100,
        bootstrap_resamples: 100,
        ..ExperimentConfig::default()
    }
}

#[test]
fn reports_are_reproducible_across_worker_counts() {
    let a = Session::new(small()).unwrap();
    let b = Session::new(ExperimentConfig { workers: 2, ..small() }).unwrap();
    for id in ExperimentId::ALL {
        let mut ra = a.run(id).unwrap().statistics();
        let mut rb = b.run(id).unwrap().statistics();
        ra["config"]["workers"] = 0.into();
        rb["config"]["workers"] = 0.into();
        assert_eq!(ra, rb, "{}", id.name());
    }
}

#[test]
fn env_approx_statistics_are_well_formed() {
    let cfg = ExperimentConfig { deltas: vec![0.5, f64::MAX], ..small() };
    let r = run_env_functional_approx(&cfg).unwrap();
    for entry in &r.per_alpha {
        let fr = entry["fractions"].as_array().unwrap();
        assert_eq!(fr[1]["fraction"].as_f64().unwrap(), 1.0);
    }
    for (_, d) in &r.samples {
        assert!(d.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn cli_writes_report_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, serde_json::to_string(&small()).unwrap()).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_brox"))
        .args(["exponent", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "5"])
        .status()
        .unwrap();
    assert!(matches!(status.code(), Some(0) | Some(1)));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "exponent");
    assert_eq!(report["config"]["seed"], 5);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["detail"].is_object()));
    let csv = std::fs::read_to_string(out.join("samples_exponent.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# seed=5"));
    assert_eq!(lines.next().unwrap(), "alpha_3,alpha_4,alpha_5");
    assert_eq!(lines.count(), 12);
}

#[test]
fn cli_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"replicas": 0}"#).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_brox"))
        .args(["sup-localtime", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
