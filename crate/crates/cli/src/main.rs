//! Batch driver for the truncated circle calculus.
//!
//! Reports are JSON on standard output; a human summary goes to standard
//! error unless `--json-only` is given. Exit codes: 0 when every check
//! passes, 1 when a check fails or the calculus reports a hard error, 2 on
//! configuration problems.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};
use report::Report;

#[derive(Parser)]
#[command(
    name = "hkp",
    about = "Factorization, KP, Taylor and flow suites for the truncated circle calculus",
    version
)]
struct Cli {
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed for the randomized suites.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Truncation order in h.
    #[arg(long, global = true, value_name = "INT")]
    n: Option<usize>,

    /// Depth of the symbol floor (orders below -k are dropped).
    #[arg(long, global = true, value_name = "INT")]
    k: Option<i64>,

    /// Trigonometric mode count (also the spectral cap for `prop4`).
    #[arg(long, global = true, value_name = "INT")]
    modes: Option<usize>,

    /// Matrix dimension of the coefficients.
    #[arg(long, global = true, value_name = "INT")]
    dim: Option<usize>,

    /// Suppress the human summary on standard error.
    #[arg(long, global = true)]
    json_only: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Birkhoff factorization round-trip, structure audit and negative control.
    Factorize,
    /// KP Lax residuals, bracket agreement, proof identities and FD cross-check.
    Kp,
    /// Taylor-series bridge in its three regimes.
    Taylor,
    /// Flow factorization defect and RK convergence study.
    Prop4,
    /// Bell polynomial table against set-partition enumeration.
    Bell,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.load_file(path)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.n {
        cfg.h_order = n;
    }
    if let Some(k) = cli.k {
        cfg.floor = k;
    }
    if let Some(modes) = cli.modes {
        cfg.modes = Some(modes);
    }
    if let Some(dim) = cli.dim {
        cfg.dim = dim;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> hkp_core::Result<Report> {
    match cli.command {
        Command::Factorize => commands::cmd_factorize(cfg),
        Command::Kp => commands::cmd_kp(cfg),
        Command::Taylor => commands::cmd_taylor(cfg),
        Command::Prop4 => commands::cmd_prop4(cfg),
        Command::Bell => commands::cmd_bell(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&cli, &cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    // tolerate a closed stdout (e.g. piped through head)
    use std::io::Write;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let _ = writeln!(std::io::stdout(), "{json}");
    if !cli.json_only {
        report.summarize(std::io::stderr()).ok();
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
