//! Subcommand implementations. Each returns the text for stdout or a [`CommandError`]
//! carrying the process exit code.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nsys_core::scan::{PointModel, ScanError};
use nsys_core::{contrast_curve, run_scan, threshold_detect};
use serde_json::json;
use thiserror::Error;

use crate::config::{self, ConfigError, RunConfig};
use crate::output::{self, OutputFile, RunManifest};
use crate::validate::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Solver(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} of {total} validation checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(ConfigError::Io { .. }) | CommandError::Io { .. } => EXIT_IO,
            CommandError::Config(_) | CommandError::ChecksFailed { .. } => EXIT_INVALID,
            CommandError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<ScanError> for CommandError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Config(v) => CommandError::Config(ConfigError::Validation(v)),
            other => CommandError::Solver(other.to_string()),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<OutputFile, CommandError> {
    let path = output::write_file(dir, name, contents).map_err(|source| CommandError::Io {
        path: dir.join(name),
        source,
    })?;
    Ok(OutputFile {
        path: path.display().to_string(),
        rows: contents.lines().count().saturating_sub(1),
    })
}

fn manifest(
    dir: &Path,
    command: &str,
    run: &RunConfig,
    started: Instant,
    mut outputs: Vec<OutputFile>,
) -> Result<Vec<OutputFile>, CommandError> {
    let m = RunManifest {
        artifact: "nsys",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config: config::serialize(run),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs: outputs.clone(),
    };
    let text = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
    outputs.push(write(dir, "manifest.json", &text)?);
    Ok(outputs)
}

pub fn scan(run: &RunConfig, out: &Path, workers: usize) -> Result<String, CommandError> {
    let started = Instant::now();
    let spectrum = run_scan(&run.system, &run.scan, workers)?;
    let written = vec![write(out, "spectrum.csv", &output::spectrum_csv(&spectrum))?];
    let files = manifest(out, "scan", run, started, written)?;
    Ok(files.iter().map(|f| format!("wrote {}\n", f.path)).collect())
}

pub fn contrast(run: &RunConfig, out: &Path, workers: usize) -> Result<String, CommandError> {
    let started = Instant::now();
    let spectrum = run_scan(&run.system, &run.scan, workers)?;
    let curve = contrast_curve(&spectrum);
    let written = vec![write(out, "contrast.csv", &output::contrast_csv(&curve))?];
    manifest(out, "contrast", run, started, written)?;
    Ok(match threshold_detect(&curve) {
        Ok(d) => format!("delta10_threshold_mhz {d:.6}\n"),
        Err(_) => "NO_THRESHOLD\n".to_string(),
    })
}

pub fn steady(run: &RunConfig) -> Result<String, CommandError> {
    let model = PointModel::new(&run.system, run.scan.off_resonant)
        .map_err(|e| CommandError::Solver(e.to_string()))?;
    let (d, a, v) = (run.steady.delta10, run.steady.aom, run.system.doppler.velocity);
    let p = model
        .solve(d, a, v)
        .map_err(|e| CommandError::Solver(e.to_string()))?;
    let doc = json!({
        "delta10_mhz": d,
        "aom_mhz": a,
        "velocity_m_per_s": v,
        "rho": output::operator_json(p.rho.matrix()),
        "delta_rho": output::operator_json(&p.probe.delta_rho),
        "l2_coeff": p.l2_coeff,
        "l3_coeff": p.probe.absorption_coefficient,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("json serializes") + "\n")
}

pub fn validate(run: &RunConfig) -> Result<String, CommandError> {
    let checks = run_suite(run);
    let mut text = String::new();
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!("{mark}  {}  {}\n", c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        print!("{text}");
        return Err(CommandError::ChecksFailed {
            failed,
            total: checks.len(),
        });
    }
    text.push_str(&format!("all {} checks passed\n", checks.len()));
    Ok(text)
}
