//! Run configuration, read from a TOML file and/or command-line flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use sharpcheck::geometry::MAX_N;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Constants,
    VerifyExtremal,
    Deficit,
    PdeCheck,
    Pohozaev,
    Mass,
    Asymptotics,
    Supersolution,
    LimitStudy,
    Fullspace,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Everything a single run needs. Unset family parameters take the
/// per-command defaults documented on each command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub n: usize,
    pub lambda: f64,
    /// Boundary centre `x0'`; shorter lists are padded with zeros.
    pub x0_prime: Vec<f64>,
    /// Defaults to the Liouville normalisation.
    pub c_tilde: Option<f64>,
    pub p: Option<f64>,
    pub radii: Vec<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub seed: u64,
    pub output_format: OutputFormat,
    pub fixtures_path: Option<PathBuf>,
    /// Expression for `deficit` and `fullspace`.
    pub field: Option<String>,
    /// Tail declaration for `field`, e.g. `compact:2` or `bounded:3`.
    pub tail: Option<String>,
    /// `gaussian`, `bump` or `library`.
    pub builtin: Option<String>,
    /// Pohozaev centre `y`.
    pub y: Vec<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub r1: Option<f64>,
    pub c0: f64,
    pub k_max: u32,
    /// Where `limit-study` writes its table as CSV.
    pub table_path: Option<PathBuf>,
    pub timing: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            n: 2,
            lambda: 1.0,
            x0_prime: Vec::new(),
            c_tilde: None,
            p: None,
            radii: Vec::new(),
            rel_tol: None,
            abs_tol: None,
            seed: 1,
            output_format: OutputFormat::Json,
            fixtures_path: None,
            field: None,
            tail: None,
            builtin: None,
            y: Vec::new(),
            gamma: None,
            delta: None,
            r1: None,
            c0: 1.0,
            k_max: 6,
            table_path: None,
            timing: true,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.command.is_none() {
            return Err("no command given".into());
        }
        if !(2..=MAX_N).contains(&self.n) {
            return Err(format!("n = {} is outside 2..={MAX_N}", self.n));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(format!("lambda = {} must be positive", self.lambda));
        }
        if self.x0_prime.len() > self.n - 1 {
            return Err(format!("x0_prime has {} entries, at most {} allowed", self.x0_prime.len(), self.n - 1));
        }
        for (name, t) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(format!("{name} = {t} must be positive"));
                }
            }
        }
        if !self.y.is_empty() && self.y.len() != self.n {
            return Err(format!("y must have {} entries", self.n));
        }
        if self.threads == Some(0) {
            return Err("threads must be at least 1".into());
        }
        if !(self.c0 > 0.0) {
            return Err(format!("c0 = {} must be positive", self.c0));
        }
        if self.field.is_some() && self.builtin.is_some() {
            return Err("give either field or builtin, not both".into());
        }
        Ok(())
    }

    /// `x0'` padded to length `n - 1`.
    pub fn x0(&self) -> Vec<f64> {
        let mut v = self.x0_prime.clone();
        v.resize(self.n - 1, 0.0);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::from_toml("command = \"verify-extremal\"\nn = 3\nlambda = 2.0\nx0_prime = [0.7]\n").unwrap();
        assert_eq!(c.command, Some(Command::VerifyExtremal));
        assert_eq!(c.x0(), vec![0.7, 0.0]);
        assert!(c.validate().is_ok());
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        let bad = RunConfig { command: Some(Command::Mass), n: 9, ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }
}
