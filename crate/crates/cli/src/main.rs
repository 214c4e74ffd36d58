use std::path::PathBuf;
use std::process::ExitCode;

use biot_core::cli::{parse_config, run, Mode, RunConfig};
use clap::Parser;

/// Dynamic Biot solver: convergence studies, single runs and the invariant
/// suite. Flags override the configuration file; BIOT_SEED overrides the
/// seed.
#[derive(Debug, Parser)]
#[command(name = "biot", version)]
struct Args {
    /// Sectioned key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// time-study | space-study | single-run | property-suite
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Polynomial degree in time.
    #[arg(long)]
    k: Option<usize>,
    /// Pressure degree in space (0 or 1).
    #[arg(long)]
    ell: Option<usize>,
    /// Number of refinement levels.
    #[arg(long)]
    levels: Option<usize>,
}

fn load(args: &Args) -> biot_core::Result<RunConfig> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut c = parse_config(&text)?;
    if let Some(m) = &args.mode {
        c.mode = m.parse::<Mode>()?;
    }
    if let Some(o) = &args.out {
        c.out = o.clone();
    }
    if let Some(k) = args.k {
        c.k = k;
    }
    if let Some(l) = args.ell {
        c.ell = l;
    }
    if let Some(l) = args.levels {
        c.levels = l;
    }
    if let Ok(seed) = std::env::var("BIOT_SEED") {
        c.seed = seed
            .trim()
            .parse()
            .map_err(|_| biot_core::Error::Config(format!("BIOT_SEED must be a non-negative integer (got '{seed}')")))?;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("biot: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for a in &outcome.artifacts {
                println!("wrote {}", a.display());
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("biot: {e}");
            ExitCode::from(2)
        }
    }
}
