//! JSON reports and CSV residual tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub parameters: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

impl Residual {
    /// `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, parameters: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Residual {
            name: name.into(),
            parameters: parameters.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            seconds: 0.0,
        }
    }

    /// Exact check: value 0 when equal, 1 otherwise.
    pub fn exact(name: impl Into<String>, parameters: impl Into<String>, equal: bool) -> Self {
        Self::at_most(name, parameters, if equal { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub config: ExperimentConfig,
    pub residuals: Vec<Residual>,
    pub timing: Timing,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const CSV_HEADER: [&str; 6] = ["check_name", "parameters", "residual", "tolerance", "pass", "seconds"];

/// Writes the residual table of `report` as CSV.
pub fn write_table(report: &Report, out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.residuals {
        w.write_record([
            r.name.clone(),
            r.parameters.clone(),
            format!("{:e}", r.value),
            format!("{:e}", r.tolerance),
            r.pass.to_string(),
            format!("{:.6}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<dir>/<suite>.csv`; returns the path.
pub fn emit_tables(report: &Report, dir: &Path) -> Result<PathBuf, csv::Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.csv", report.scenario));
    let file = std::fs::File::create(&path)?;
    write_table(report, std::io::BufWriter::new(file))?;
    Ok(path)
}

/// Writes `<dir>/<suite>.json`; returns the path.
pub fn write_report(report: &Report, dir: &Path) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.json", report.scenario));
    std::fs::write(&path, report.to_json() + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn empty() -> Report {
        let config = ExperimentConfig::parse(Path::new("c"), r#"{"scenario": "identities.ibp"}"#).unwrap();
        Report { schema: SCHEMA, scenario: "identities.ibp".into(), config, residuals: vec![], timing: Timing { total_seconds: 0.0 } }
    }

    #[test]
    fn empty_report_gives_header_only() {
        let mut buf = Vec::new();
        write_table(&empty(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "check_name,parameters,residual,tolerance,pass,seconds\n");
    }

    #[test]
    fn rows_and_json_shape() {
        let mut r = empty();
        r.residuals.push(Residual::at_most("a", "n=2;m=1", 1.5e-12, 1e-10));
        r.residuals.push(Residual::exact("b", "", false));
        assert!(!r.passed());
        let mut buf = Vec::new();
        write_table(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("a,n=2;m=1,1.5e-12,1e-10,true,0.000000"), "{text}");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["residuals"][1]["pass"], false);
        assert_eq!(v["config"]["scenario"], "identities.ibp");
    }
}
