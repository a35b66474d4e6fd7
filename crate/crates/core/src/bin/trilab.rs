use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use trilinear_lab::harness::{execute, exit_status, Command, RunConfig};

/// Run one experiment and write report.json, metadata.json and tables/*.csv.
/// Flags override values from --config.
#[derive(Parser, Debug)]
#[command(name = "trilab", version)]
struct Args {
    #[arg(long, value_enum)]
    command: Option<Command>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// PBM or JSON bitmap for pattern-search and dichotomy.
    #[arg(long)]
    bitmap: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    k0: Option<u32>,
    #[arg(long)]
    m_factor: Option<u32>,
    #[arg(long)]
    max_iter: Option<usize>,
}

fn resolve(a: Args) -> trilinear_lab::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = a.command {
        cfg.command = c;
    }
    cfg.n = a.n.or(cfg.n);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.out = a.out.unwrap_or(cfg.out);
    cfg.bitmap = a.bitmap.or(cfg.bitmap);
    cfg.trials = a.trials.or(cfg.trials);
    cfg.pattern.t_min = a.t_min.or(cfg.pattern.t_min);
    cfg.dichotomy.k0 = a.k0.unwrap_or(cfg.dichotomy.k0);
    cfg.dichotomy.m_factor = a.m_factor.unwrap_or(cfg.dichotomy.m_factor);
    cfg.dichotomy.max_iter = a.max_iter.unwrap_or(cfg.dichotomy.max_iter);
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = resolve(args).and_then(|cfg| execute(&cfg));
    match outcome {
        Ok(out) => {
            for c in &out.report.checks {
                println!(
                    "{} {} {} ({})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.rule
                );
            }
            ExitCode::from(exit_status(&out.report) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
