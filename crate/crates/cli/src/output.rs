//! CSV and JSON emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nsys_core::superop::Operator;
use nsys_core::{ContrastCurve, Spectrum};
use serde::Serialize;
use serde_json::{json, Value};

pub const SPECTRUM_HEADER: &str =
    "delta10_mhz,aom_mhz,l2_coeff,l2_transmission,l3_coeff,l3_transmission";
pub const CONTRAST_HEADER: &str = "delta10_mhz,l3_contrast,l3_width_mhz";

fn axis(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn value(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::with_capacity(80 * (spectrum.points.len() + 1));
    out.push_str(SPECTRUM_HEADER);
    out.push('\n');
    for p in &spectrum.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            axis(p.delta10),
            axis(p.aom),
            value(p.l2_coeff),
            value(p.l2_transmission),
            value(p.l3_coeff),
            value(p.l3_transmission)
        ));
    }
    out
}

pub fn contrast_csv(curve: &ContrastCurve) -> String {
    let mut out = String::from(CONTRAST_HEADER);
    out.push('\n');
    for ((d, c), w) in curve.delta10.iter().zip(&curve.contrast).zip(&curve.width) {
        let w = w.map_or_else(|| "nan".to_string(), value);
        out.push_str(&format!("{},{},{}\n", axis(*d), value(*c), w));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(contents.as_bytes())?;
    Ok(path)
}

pub fn operator_json(m: &Operator) -> Value {
    let part = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..4).map(|i| (0..4).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}
