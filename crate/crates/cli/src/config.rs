//! Run configuration: defaults, flat key=value config files, and flag
//! overrides. Every tunable is validated before a command runs; violations
//! are configuration errors (exit code 2), not check failures.

use std::fmt;
use std::path::Path;

use serde::Serialize;

/// Tolerances for the pass/fail flags. All must be positive.
#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub roundtrip: f64,
    pub lax: f64,
    pub bracket: f64,
    pub fd: f64,
    pub proof: f64,
    pub taylor_identity: f64,
    pub taylor_chain: f64,
    pub taylor_general: f64,
    pub defect: f64,
    pub bell: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            roundtrip: 1e-9,
            lax: 1e-8,
            bracket: 1e-12,
            fd: 1e-4,
            proof: 1e-8,
            taylor_identity: 1e-10,
            taylor_chain: 1e-9,
            taylor_general: 1e-8,
            defect: 1e-5,
            bell: 1e-9,
        }
    }
}

/// Fully resolved run configuration, echoed verbatim into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// RNG seed for the randomized suites.
    pub seed: u64,
    /// Truncation order in h (`N`).
    pub h_order: usize,
    /// Depth of the symbol floor (`K`, orders below `-K` are dropped).
    pub floor: i64,
    /// Trigonometric mode count for random data; `None` leaves the
    /// per-command default in force.
    pub modes: Option<usize>,
    /// Hard cap on the mode support of refits.
    pub hard_cap: usize,
    /// Matrix dimension of the coefficients.
    pub dim: usize,
    /// RK4 step count for the flow integration.
    pub steps: usize,
    /// Refit-resolution multiplier for grid-based comparisons.
    pub grid_factor: usize,
    /// Amplitude of random coefficient data.
    pub amplitude: f64,
    /// Number of random instances per randomized check.
    pub trials: usize,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            h_order: 4,
            floor: 6,
            modes: None,
            hard_cap: 64,
            dim: 1,
            steps: 64,
            grid_factor: 4,
            amplitude: 0.25,
            trials: 5,
            tolerances: Tolerances::default(),
        }
    }
}

/// A configuration problem: bad file syntax, unknown key, or an invariant
/// violation. Mapped to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("invalid value {value:?} for key {key:?}")))
}

impl RunConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "n" => self.h_order = parse(key, value)?,
            "k" => self.floor = parse(key, value)?,
            "modes" => self.modes = Some(parse(key, value)?),
            "hard_cap" => self.hard_cap = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "steps" => self.steps = parse(key, value)?,
            "grid_factor" => self.grid_factor = parse(key, value)?,
            "amplitude" => self.amplitude = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "tol_roundtrip" => self.tolerances.roundtrip = parse(key, value)?,
            "tol_lax" => self.tolerances.lax = parse(key, value)?,
            "tol_bracket" => self.tolerances.bracket = parse(key, value)?,
            "tol_fd" => self.tolerances.fd = parse(key, value)?,
            "tol_proof" => self.tolerances.proof = parse(key, value)?,
            "tol_taylor_identity" => self.tolerances.taylor_identity = parse(key, value)?,
            "tol_taylor_chain" => self.tolerances.taylor_chain = parse(key, value)?,
            "tol_taylor_general" => self.tolerances.taylor_general = parse(key, value)?,
            "tol_defect" => self.tolerances.defect = parse(key, value)?,
            "tol_bell" => self.tolerances.bell = parse(key, value)?,
            _ => return Err(ConfigError(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Merge a flat `key=value` config file ('#' starts a comment).
    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Check the cross-field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.dim < 1 {
            return Err(ConfigError("dim must be at least 1".into()));
        }
        if self.h_order < 1 {
            return Err(ConfigError("n must be at least 1".into()));
        }
        if self.floor < self.h_order as i64 {
            return Err(ConfigError(format!(
                "k (symbol floor depth, {}) must be at least n (h-order, {})",
                self.floor, self.h_order
            )));
        }
        if let Some(m) = self.modes {
            if m > self.hard_cap {
                return Err(ConfigError(format!(
                    "modes ({m}) must not exceed hard_cap ({})",
                    self.hard_cap
                )));
            }
        }
        if self.steps < 1 {
            return Err(ConfigError("steps must be at least 1".into()));
        }
        if self.grid_factor < 1 {
            return Err(ConfigError("grid_factor must be at least 1".into()));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(ConfigError("amplitude must be positive and finite".into()));
        }
        if self.trials < 1 {
            return Err(ConfigError("trials must be at least 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tol_roundtrip", t.roundtrip),
            ("tol_lax", t.lax),
            ("tol_bracket", t.bracket),
            ("tol_fd", t.fd),
            ("tol_proof", t.proof),
            ("tol_taylor_identity", t.taylor_identity),
            ("tol_taylor_chain", t.taylor_chain),
            ("tol_taylor_general", t.taylor_general),
            ("tol_defect", t.defect),
            ("tol_bell", t.bell),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    /// Mode count with a per-command default.
    pub fn modes_or(&self, default: usize) -> usize {
        self.modes.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_roundtrip_and_overrides() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nseed = 99\nn=3\nk = 5  # inline\ntol_lax = 1e-7").unwrap();
        let mut cfg = RunConfig::default();
        cfg.load_file(f.path()).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.h_order, 3);
        assert_eq!(cfg.floor, 5);
        assert_eq!(cfg.tolerances.lax, 1e-7);
        cfg.set("seed", "3").unwrap();
        assert_eq!(cfg.seed, 3);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("frobnicate", "1").is_err());
        assert!(cfg.set("seed", "not-a-number").is_err());
    }

    #[test]
    fn invariants_enforced() {
        let mut cfg = RunConfig::default();
        cfg.set("k", "2").unwrap(); // below n = 4
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.set("dim", "0").unwrap();
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.set("modes", "1000").unwrap();
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.set("tol_bell", "-1").unwrap();
        assert!(cfg.validate().is_err());
    }
}
