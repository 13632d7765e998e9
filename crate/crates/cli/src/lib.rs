//! Batch front end: runs identity suites and experiments from JSON configs
//! and writes JSON reports plus CSV residual tables.

pub mod config;
pub mod report;
pub mod suites;

use std::path::{Path, PathBuf};

use config::{ExperimentConfig, Suite};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

/// Overrides applied on top of the config file by `tentomo run`.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub suite: Option<Suite>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Value of `OUTPUT_DIR`, consulted when `out` is unset.
    pub output_dir_env: Option<PathBuf>,
}

pub fn validate_command(path: &Path) -> i32 {
    match ExperimentConfig::load(path).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => {
            println!("{}: ok ({})", path.display(), c.scenario.name());
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_command(path: &Path, opts: &RunOptions) -> i32 {
    let mut cfg = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(s) = opts.suite {
        cfg.scenario = s;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = opts.out.clone().or_else(|| opts.output_dir_env.clone()) {
        cfg.output_dir = dir;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let report = match suites::run_suite(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: precondition violated: {e}");
            return EXIT_PRECONDITION;
        }
    };
    let written = report::write_report(&report, &cfg.output_dir)
        .map_err(|e| e.to_string())
        .and_then(|json| report::emit_tables(&report, &cfg.output_dir).map(|csv| (json, csv)).map_err(|e| e.to_string()));
    let (json, csv) = match written {
        Ok(paths) => paths,
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", cfg.output_dir.display());
            return EXIT_PRECONDITION;
        }
    };
    let failed: Vec<_> = report.residuals.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!("FAIL {} [{}]: {:e} > {:e}", r.name, r.parameters, r.value, r.tolerance);
    }
    println!(
        "{}: {} checks, {} failed; report {}; table {}",
        report.scenario,
        report.residuals.len(),
        failed.len(),
        json.display(),
        csv.display()
    );
    if failed.is_empty() {
        EXIT_PASS
    } else {
        EXIT_RESIDUAL
    }
}
