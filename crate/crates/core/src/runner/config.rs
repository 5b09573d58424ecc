use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::gibbs::{ChainSettings, InitialState};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "MFON_OUTPUT_DIR";

const FALLBACK_OUTPUT_DIR: &str = "mfon-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Rate,
    SteinTerms,
    Oracle,
    VerifyLemmas,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Rate => "rate",
            Command::SteinTerms => "stein-terms",
            Command::Oracle => "oracle",
            Command::VerifyLemmas => "verify-lemmas",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv|json)"))),
        }
    }
}

/// Everything a run needs. Serializes to the JSON echoed in output headers;
/// the output directory is not part of the echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Spin dimensions. Only `verify-lemmas` accepts more than one.
    #[serde(rename = "N")]
    pub dims: Vec<usize>,
    pub beta: f64,
    pub n_values: Vec<usize>,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub master_seed: u64,
    pub init: InitialState,
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Points of the log grid on `[1e-6, 200]` for `verify-lemmas`.
    pub grid_points: usize,
    /// `rate`: evaluate the exact oracle distance.
    pub oracle: bool,
    /// `rate`: run chains for empirical distances and Stein terms.
    pub simulate: bool,
    /// Oracle cells per unit of `|S|`.
    pub cells_per_unit: usize,
    /// Largest `n` the oracle will accept.
    pub oracle_max_n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let chain = ChainSettings::default();
        Self {
            command: Command::Simulate,
            dims: vec![3],
            beta: 5.0,
            n_values: vec![64],
            sweeps: chain.sweeps,
            burn_in: chain.burn_in,
            thin: chain.thin,
            chains: 4,
            master_seed: 1,
            init: chain.init,
            output_dir: None,
            format: OutputFormat::Csv,
            grid_points: 100_000,
            oracle: false,
            simulate: false,
            cells_per_unit: crate::oracle::DEFAULT_CELLS_PER_UNIT,
            oracle_max_n: crate::oracle::DEFAULT_MAX_N,
        }
    }
}

impl ExperimentConfig {
    pub fn for_command(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn chain_settings(&self) -> ChainSettings {
        ChainSettings {
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            thin: self.thin,
            init: self.init,
        }
    }

    /// Explicit directory, else `$MFON_OUTPUT_DIR`, else `./mfon-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }

    /// Whether `rate` runs chains: requested explicitly, or implied when the
    /// oracle is off.
    pub fn rate_simulates(&self) -> bool {
        self.simulate || !self.oracle
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.dims.is_empty() {
            return bad("N must list at least one dimension".into());
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return bad(format!("N = {d} must be >= 2"));
        }
        if self.command == Command::VerifyLemmas {
            if self.grid_points == 0 {
                return bad("grid_points must be >= 1".into());
            }
            return Ok(());
        }
        if self.dims.len() != 1 {
            return bad(format!("{} takes a single N, got {:?}", self.command.name(), self.dims));
        }
        let dim = self.dims[0];
        if !self.beta.is_finite() || !(self.beta > dim as f64) {
            return bad(format!("beta = {} must exceed N = {dim}", self.beta));
        }
        if self.n_values.is_empty() {
            return bad("n_values must be nonempty".into());
        }
        let mut sorted = self.n_values.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad(format!("n_values must be distinct, got {:?}", self.n_values));
        }
        let needs_chains = match self.command {
            Command::Simulate | Command::SteinTerms => true,
            Command::Rate => self.rate_simulates(),
            _ => false,
        };
        if needs_chains {
            if self.n_values.contains(&0) {
                return bad("n must be >= 1".into());
            }
            if self.thin == 0 || self.chains == 0 {
                return bad("thin and chains must be >= 1".into());
            }
            if self.sweeps < self.thin {
                return bad(format!("sweeps = {} yields no records with thin = {}", self.sweeps, self.thin));
            }
        }
        let needs_oracle = match self.command {
            Command::Oracle => true,
            Command::Rate => self.oracle,
            _ => false,
        };
        if needs_oracle {
            if let Some(&n) = self.n_values.iter().find(|&&n| n < 2 || n > self.oracle_max_n) {
                return bad(format!("oracle n = {n} outside [2, {}]", self.oracle_max_n));
            }
            if self.cells_per_unit < 2 {
                return bad("cells_per_unit must be >= 2".into());
            }
        }
        if self.command == Command::Rate && self.n_values.len() < crate::stein::MIN_RATE_POINTS {
            return bad(format!(
                "rate needs at least {} system sizes, got {}",
                crate::stein::MIN_RATE_POINTS,
                self.n_values.len()
            ));
        }
        Ok(())
    }
}

/// Parses `"3"`, `"2,3,5"` or `"2..10"` (inclusive) into a list.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse integer list '{text}'"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: usize = a.trim().parse().map_err(|_| bad())?;
        let hi: usize = b.trim().parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_usize_list("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_usize_list("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_usize_list("16, 32,64").unwrap(), vec![16, 32, 64]);
        assert!(parse_usize_list("a,b").is_err());
        assert!(parse_usize_list("5..2").is_err());
    }

    #[test]
    fn validation_messages() {
        let mut c = ExperimentConfig::for_command(Command::Simulate);
        assert!(c.validate().is_ok());
        c.beta = 2.5;
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.contains("must exceed")));
        c.beta = 5.0;
        c.n_values = vec![8, 8];
        assert!(c.validate().is_err());
        let mut r = ExperimentConfig::for_command(Command::Rate);
        r.n_values = vec![16, 32, 64];
        assert!(r.validate().is_err());
        let mut v = ExperimentConfig::for_command(Command::VerifyLemmas);
        v.dims = (2..=10).collect();
        v.beta = 0.0;
        assert!(v.validate().is_ok());
    }

    #[test]
    fn json_roundtrip_without_output_dir() {
        let mut c = ExperimentConfig::for_command(Command::Rate);
        c.output_dir = Some("/tmp/somewhere".into());
        let text = c.to_json();
        assert!(!text.contains("somewhere"));
        assert!(text.contains("\"command\":\"rate\""));
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.output_dir, None);
        assert_eq!(back.n_values, c.n_values);
        assert!(ExperimentConfig::from_json("{\"bogus\": 1}").is_err());
    }
}
