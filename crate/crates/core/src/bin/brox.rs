use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use brox_core::experiments::{ExperimentConfig, ExperimentId, ExperimentReport, Session};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "brox", version, about = "Local-time experiments for diffusions in Brownian potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config; missing keys take defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory for report.json and samples_*.csv
    #[arg(long, global = true, default_value = "brox-out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Functional of the two-sided Bessel process vs its Ray-Knight alias
    Identity,
    /// Normalized maximal local time vs 1/∫e^-R
    SupLocaltime,
    /// Local-time profile marginals around the valley bottom
    Profile,
    /// Window discrepancy against the environment functional
    EnvApprox,
    /// log L(e^a, 0)/a vs min(U, U')
    Exponent,
    /// Position offset from the valley bottom
    Position,
    /// Every experiment on a shared replica batch
    All,
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_json_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn summarize(r: &ExperimentReport) {
    eprintln!("[{}] {:.1}s", r.experiment, r.wall_clock_seconds);
    for c in &r.checks {
        eprintln!("  {:?}  {}", c.verdict, c.name);
    }
    for f in &r.failures {
        if f.failed > 0 {
            eprintln!("  alpha {}: {}/{} replicas failed", f.alpha, f.failed, f.total);
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    let cfg = load(&cli)?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ids: Vec<ExperimentId> = match cli.command {
        Command::Identity => vec![ExperimentId::Identity],
        Command::SupLocaltime => vec![ExperimentId::SupLocaltime],
        Command::Profile => vec![ExperimentId::Profile],
        Command::EnvApprox => vec![ExperimentId::EnvApprox],
        Command::Exponent => vec![ExperimentId::Exponent],
        Command::Position => vec![ExperimentId::Position],
        Command::All => ExperimentId::ALL.to_vec(),
    };
    let session = Session::new(cfg)?;
    let mut reports = Vec::new();
    for id in ids {
        let r = session.run(id)?;
        summarize(&r);
        r.write_samples_csv(&cli.out)?;
        reports.push(r);
    }
    let passed = reports.iter().all(ExperimentReport::passed);
    let body = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        serde_json::json!({ "passed": passed, "reports": reports })
    };
    let path = cli.out.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&body)?).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("{} -> {}", if passed { "PASS" } else { "FAIL" }, path.display());
    Ok(passed)
}
