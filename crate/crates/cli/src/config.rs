//! Experiment configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tentomo_core::normalops::{UcpConfig, UcpScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "identities.algebra")]
    Algebra,
    #[serde(rename = "identities.ibp")]
    Ibp,
    #[serde(rename = "identities.john")]
    John,
    #[serde(rename = "identities.prop-ray")]
    PropRay,
    #[serde(rename = "identities.mrt")]
    Mrt,
    #[serde(rename = "decompose")]
    Decompose,
    #[serde(rename = "ucp.ray")]
    UcpRay,
    #[serde(rename = "ucp.mrt")]
    UcpMrt,
    #[serde(rename = "ucp.trt")]
    UcpTrt,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Algebra,
        Suite::Ibp,
        Suite::John,
        Suite::PropRay,
        Suite::Mrt,
        Suite::Decompose,
        Suite::UcpRay,
        Suite::UcpMrt,
        Suite::UcpTrt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Algebra => "identities.algebra",
            Suite::Ibp => "identities.ibp",
            Suite::John => "identities.john",
            Suite::PropRay => "identities.prop-ray",
            Suite::Mrt => "identities.mrt",
            Suite::Decompose => "decompose",
            Suite::UcpRay => "ucp.ray",
            Suite::UcpMrt => "ucp.mrt",
            Suite::UcpTrt => "ucp.trt",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Tolerance used when the config does not set one.
    pub fn default_tolerance(&self, m: usize) -> f64 {
        match self {
            Suite::Algebra | Suite::Ibp => 0.0,
            Suite::John if m >= 2 => 1e-8,
            Suite::John => 1e-9,
            Suite::PropRay | Suite::Mrt => 1e-5,
            Suite::Decompose => 1e-6,
            Suite::UcpRay | Suite::UcpMrt | Suite::UcpTrt => 1e-9,
        }
    }

    fn ucp(&self) -> Option<UcpScenario> {
        match self {
            Suite::UcpRay => Some(UcpScenario::Ray),
            Suite::UcpMrt => Some(UcpScenario::Mrt),
            Suite::UcpTrt => Some(UcpScenario::Trt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    /// Total degree of the random polynomial core.
    pub degree: u32,
    /// Support radius; read as an exact decimal.
    pub rho: f64,
    /// Bump exponent.
    pub s: u32,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { degree: 2, rho: 1.0, s: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub size: usize,
    pub length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { size: 128, length: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Suite,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub field: FieldSpec,
    #[serde(default = "default_rule_degree")]
    pub rule_degree: usize,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random fields, lines or points per case.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Assert vanishing on the negative-control field of the ucp suites.
    #[serde(default)]
    pub invert_control: bool,
    /// Write measured seconds; `false` writes 0 so reruns are byte-identical.
    #[serde(default = "default_true")]
    pub record_timing: bool,
    /// Not echoed into reports, so reruns into different directories match.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
}

fn default_n() -> usize {
    2
}
fn default_m() -> usize {
    1
}
fn default_rule_degree() -> usize {
    60
}
fn default_seed() -> u64 {
    1
}
fn default_samples() -> usize {
    20
}
fn default_true() -> bool {
    true
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("invalid config: field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

impl ConfigError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ConfigError::Read { .. } | ConfigError::Parse { .. } => 2,
            ConfigError::Invalid { .. } => 3,
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> Result<(), ConfigError> {
    Err(ConfigError::Invalid { field, message: message.into() })
}

impl ExperimentConfig {
    pub fn parse(path: &Path, text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(path, &text)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.scenario.default_tolerance(self.m))
    }

    pub fn ucp(&self) -> UcpConfig {
        UcpConfig {
            n: self.n,
            m: self.m,
            k: self.k,
            seed: self.seed,
            degree: self.field.degree,
            s: self.field.s,
            rule_degree: self.rule_degree,
            points: self.samples,
            tolerance: self.tolerance(),
            invert_control: self.invert_control,
        }
    }

    /// Checks the preconditions of the selected suite.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (n, m, k, s) = (self.n, self.m, self.k, self.field.s);
        if !(2..=3).contains(&n) {
            return invalid("n", format!("must be 2 or 3, got {n}"));
        }
        if self.samples == 0 {
            return invalid("samples", "must be positive");
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return invalid("tolerance", format!("must be a finite non-negative number, got {t}"));
            }
        }
        if !(self.field.rho > 0.0 && self.field.rho.is_finite()) {
            return invalid("field.rho", format!("must be positive, got {}", self.field.rho));
        }
        if self.field.degree > 6 {
            return invalid("field.degree", format!("at most 6 is supported, got {}", self.field.degree));
        }
        let rule = |min: usize| {
            if self.rule_degree < min || self.rule_degree > 2000 {
                invalid("rule_degree", format!("must lie in {min}..=2000, got {}", self.rule_degree))
            } else {
                Ok(())
            }
        };
        match self.scenario {
            Suite::Algebra => {
                if !(1..=3).contains(&m) {
                    return invalid("m", format!("identities.algebra needs 1 <= m <= 3, got {m}"));
                }
                if k > m {
                    return invalid("k", format!("needs k <= m, got k = {k}, m = {m}"));
                }
                if s < m as u32 + 1 {
                    return invalid("field.s", format!("needs s >= m + 1 = {} for m derivatives, got {s}", m + 1));
                }
            }
            Suite::Ibp => {
                if !(1..=4).contains(&m) {
                    return invalid("m", format!("identities.ibp reads m as the order s and needs 1 <= s <= 4, got {m}"));
                }
            }
            Suite::John => {
                if !(1..=2).contains(&m) {
                    return invalid("m", format!("identities.john needs m in 1..=2, got {m}"));
                }
                if s < 2 * m as u32 + 1 {
                    return invalid("field.s", format!("identities.john needs s >= 2m + 1 = {}, got {s}", 2 * m + 1));
                }
            }
            Suite::PropRay | Suite::Mrt => {
                if !(1..=2).contains(&m) {
                    return invalid("m", format!("{} needs m in 1..=2, got {m}", self.scenario.name()));
                }
                if self.scenario == Suite::Mrt && k > m {
                    return invalid("k", format!("identities.mrt needs k <= m, got k = {k}, m = {m}"));
                }
                if s < m as u32 + 1 {
                    return invalid("field.s", format!("needs s >= m + 1 = {} for m derivatives, got {s}", m + 1));
                }
                rule(2)?;
            }
            Suite::Decompose => {
                if n != 2 {
                    return invalid("n", format!("decompose runs in the plane, got n = {n}"));
                }
                if !(1..=2).contains(&m) {
                    return invalid("m", format!("decompose needs m in 1..=2, got {m}"));
                }
                if self.grid.size < 16 || self.grid.size % 2 != 0 || self.grid.size > 1024 {
                    return invalid("grid.size", format!("must be even and in 16..=1024, got {}", self.grid.size));
                }
                if !(self.grid.length > 0.0) || self.field.rho > self.grid.length / 4.0 {
                    return invalid(
                        "grid.length",
                        format!("support radius {} must not exceed L/4 = {}", self.field.rho, self.grid.length / 4.0),
                    );
                }
                if s < 4 {
                    return invalid("field.s", format!("decompose differentiates twice and needs s >= 4, got {s}"));
                }
            }
            Suite::UcpRay | Suite::UcpMrt | Suite::UcpTrt => {
                let sc = self.scenario.ucp().expect("ucp suite");
                if let Err(e) = self.ucp().validate(sc) {
                    return invalid("scenario", e.to_string());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(Path::new("c.json"), text)
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(r#"{"scenario": "identities.ibp"}"#).unwrap();
        assert_eq!(c.n, 2);
        assert_eq!(c.tolerance(), 0.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse("{\n  \"scenario\": \"decompose\",\n  \"bogus\": 1\n}").unwrap_err();
        match e {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other}"),
        }
        assert_eq!(parse(r#"{"scenario": "nope"}"#).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn validation_names_the_field() {
        let c = parse(r#"{"scenario": "identities.mrt", "m": 1, "k": 2}"#).unwrap();
        match c.validate().unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "k"),
            other => panic!("{other}"),
        }
        let c = parse(r#"{"scenario": "decompose", "grid": {"size": 64, "length": 2.0}}"#).unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
    }
}
