//! JSON report schema shared by every subcommand.

use serde::Serialize;

use crate::config::RunConfig;

/// One named check: a residual and the flag saying it met its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, pass: bool) -> Self {
        Check { name: name.into(), residual, pass }
    }

    /// A residual judged against an upper tolerance.
    pub fn bounded(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Check::new(name, residual, residual.is_finite() && residual <= tol)
    }
}

/// Full result of a subcommand run; serialized to standard output.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-readable summary, one line per check.
    pub fn summarize(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        for c in &self.checks {
            writeln!(
                out,
                "  [{}] {:<32} residual {:.3e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.residual
            )?;
        }
        writeln!(
            out,
            "{}: {} ({} checks, {:.0} ms)",
            self.command,
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.wall_time_ms
        )
    }
}
