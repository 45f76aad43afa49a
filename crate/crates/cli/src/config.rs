//! Flat `section.key = value` configuration files.
//!
//! Lines are `key = value`; `#` starts a comment. A `[section]` header
//! prefixes the keys that follow it until the next header, so `[l1]` followed
//! by `rabi = 6` is the same as `l1.rabi = 6`. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use nsys_core::model::{DecayModel, FieldConfig, Level, LevelScheme};
use nsys_core::units::rabi_from_saturation;
use nsys_core::{
    Axis, DopplerConfig, ProbeOptions, ProbeReadout, ScanConfig, SystemConfig, ValidationError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The single grid point reported by `steady`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyPoint {
    pub delta10: f64,
    pub aom: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub scan: ScanConfig,
    pub steady: SteadyPoint,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            scan: ScanConfig::default(),
            steady: SteadyPoint {
                delta10: 0.0,
                aom: 0.0,
            },
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Number,
    Count,
    Switch,
    Readout,
}

const KEYS: &[(&str, Kind)] = &[
    ("levels.hyperfine_splitting", Kind::Number),
    ("decay.gamma_e", Kind::Number),
    ("decay.branching_e0", Kind::Number),
    ("decay.branching_e1", Kind::Number),
    ("decay.gamma_ground", Kind::Number),
    ("l1.rabi", Kind::Number),
    ("l1.intensity", Kind::Number),
    ("l1.rabi_off_resonant", Kind::Number),
    ("l1.intensity_off_resonant", Kind::Number),
    ("l2.rabi_e0", Kind::Number),
    ("l2.intensity_e0", Kind::Number),
    ("l2.rabi_e1", Kind::Number),
    ("l2.intensity_e1", Kind::Number),
    ("l3.rabi_e0", Kind::Number),
    ("l3.intensity_e0", Kind::Number),
    ("l3.rabi_e1", Kind::Number),
    ("l3.intensity_e1", Kind::Number),
    ("l3.max_ratio", Kind::Number),
    ("probe.readout", Kind::Readout),
    ("probe.beat", Kind::Switch),
    ("doppler.enabled", Kind::Switch),
    ("doppler.temperature", Kind::Number),
    ("doppler.mass", Kind::Number),
    ("doppler.nodes", Kind::Count),
    ("doppler.span", Kind::Number),
    ("doppler.velocity", Kind::Number),
    ("scan.delta10_start", Kind::Number),
    ("scan.delta10_stop", Kind::Number),
    ("scan.delta10_step", Kind::Number),
    ("scan.aom_start", Kind::Number),
    ("scan.aom_stop", Kind::Number),
    ("scan.aom_step", Kind::Number),
    ("scan.off_resonant", Kind::Switch),
    ("scan.optical_depth", Kind::Number),
    ("steady.delta10", Kind::Number),
    ("steady.aom", Kind::Number),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Number(f64),
    Count(usize),
    Switch(bool),
    Readout(ProbeReadout),
}

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    match kind {
        Kind::Number => raw
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Number)
            .ok_or_else(|| format!("expected a finite number, got `{raw}`")),
        Kind::Count => raw
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| format!("expected a non-negative integer, got `{raw}`")),
        Kind::Switch => match raw {
            "on" | "true" | "yes" => Ok(Value::Switch(true)),
            "off" | "false" | "no" => Ok(Value::Switch(false)),
            _ => Err(format!("expected on or off, got `{raw}`")),
        },
        Kind::Readout => match raw {
            "phase-matched" => Ok(Value::Readout(ProbeReadout::PhaseMatched)),
            "total" => Ok(Value::Readout(ProbeReadout::Total)),
            _ => Err(format!("expected phase-matched or total, got `{raw}`")),
        },
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut values: Vec<(&'static str, Value, usize)> = Vec::new();
    let mut section = String::new();
    for (n, raw_line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError::Parse {
            line: line_no,
            message,
        };
        if let Some(header) = line.strip_prefix('[') {
            let name = header
                .strip_suffix(']')
                .ok_or_else(|| err(format!("unterminated section header `{line}`")))?
                .trim();
            section = name.to_string();
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let full = if section.is_empty() || key.contains('.') {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let (name, kind) = KEYS
            .iter()
            .find(|(k, _)| *k == full)
            .ok_or_else(|| err(format!("unknown key `{full}`")))?;
        if values.iter().any(|(k, _, _)| k == name) {
            return Err(err(format!("duplicate key `{full}`")));
        }
        let value = parse_value(*kind, raw).map_err(|m| err(format!("`{full}`: {m}")))?;
        values.push((name, value, line_no));
    }
    build(&values)
}

fn build(values: &[(&'static str, Value, usize)]) -> Result<RunConfig, ConfigError> {
    let get = |key: &str| values.iter().find(|(k, _, _)| *k == key).map(|(_, v, _)| *v);
    let num = |key: &str, default: f64| match get(key) {
        Some(Value::Number(x)) => x,
        _ => default,
    };
    let switch = |key: &str, default: bool| match get(key) {
        Some(Value::Switch(x)) => x,
        _ => default,
    };
    let invalid = |name: &str, e: nsys_core::ModelError| ValidationError::new(name, e.to_string());

    let def = RunConfig::default();
    let ds = &def.system;

    let scheme = LevelScheme::new(num("levels.hyperfine_splitting", ds.scheme.hyperfine_splitting()))
        .map_err(|e| invalid("levels.hyperfine_splitting > 0", e))?;
    let db = ds.decay.branching();
    let decay = DecayModel::with_fraction(
        num("decay.gamma_e", ds.decay.gamma_e()),
        [
            num("decay.branching_e0", db[0][0]),
            num("decay.branching_e1", db[1][0]),
        ],
        num("decay.gamma_ground", ds.decay.gamma_ground()),
    )
    .map_err(|e| invalid("decay model", e))?;
    let gamma = decay.gamma_e();

    let rabi = |rabi_key: &str, intensity_key: &str, default: f64| -> Result<f64, ValidationError> {
        match (get(rabi_key), get(intensity_key)) {
            (Some(_), Some(_)) => Err(ValidationError::new(
                "one drive-strength key per leg",
                format!("both {rabi_key} and {intensity_key} are set"),
            )),
            (Some(Value::Number(r)), None) => Ok(r),
            (None, Some(Value::Number(s))) if s >= 0.0 => Ok(rabi_from_saturation(gamma, s)),
            (None, Some(Value::Number(s))) => Err(ValidationError::new(
                format!("{intensity_key} >= 0"),
                format!("got {s}"),
            )),
            _ => Ok(default),
        }
    };
    let l1 = FieldConfig::l1(
        rabi("l1.rabi", "l1.intensity", ds.l1.rabi(Level::Excited0))?,
        rabi(
            "l1.rabi_off_resonant",
            "l1.intensity_off_resonant",
            ds.l1.rabi(Level::Excited1),
        )?,
    )
    .map_err(|e| invalid("L1 drive", e))?;
    let l2 = FieldConfig::l2(
        rabi("l2.rabi_e0", "l2.intensity_e0", ds.l2.rabi(Level::Excited0))?,
        rabi("l2.rabi_e1", "l2.intensity_e1", ds.l2.rabi(Level::Excited1))?,
        0.0,
    )
    .map_err(|e| invalid("L2 drive", e))?;
    let l3 = FieldConfig::l3(
        rabi("l3.rabi_e0", "l3.intensity_e0", ds.l3.rabi(Level::Excited0))?,
        rabi("l3.rabi_e1", "l3.intensity_e1", ds.l3.rabi(Level::Excited1))?,
    )
    .map_err(|e| invalid("L3 drive", e))?;

    let readout = match get("probe.readout") {
        Some(Value::Readout(r)) => r,
        _ => ds.probe.readout,
    };
    let nodes = match get("doppler.nodes") {
        Some(Value::Count(n)) => n,
        _ => ds.doppler.nodes,
    };
    let system = SystemConfig {
        scheme,
        decay,
        l1,
        l2,
        l3,
        l3_ratio_bound: num("l3.max_ratio", ds.l3_ratio_bound),
        probe: ProbeOptions {
            readout,
            beat: switch("probe.beat", ds.probe.beat),
        },
        doppler: DopplerConfig {
            temperature: num("doppler.temperature", ds.doppler.temperature),
            mass_amu: num("doppler.mass", ds.doppler.mass_amu),
            nodes,
            span: num("doppler.span", ds.doppler.span),
            velocity: num("doppler.velocity", ds.doppler.velocity),
        },
        optical_depth: num("scan.optical_depth", ds.optical_depth),
    };
    let sc = &def.scan;
    let scan = ScanConfig {
        delta10: Axis {
            start: num("scan.delta10_start", sc.delta10.start),
            stop: num("scan.delta10_stop", sc.delta10.stop),
            step: num("scan.delta10_step", sc.delta10.step),
        },
        aom: Axis {
            start: num("scan.aom_start", sc.aom.start),
            stop: num("scan.aom_stop", sc.aom.stop),
            step: num("scan.aom_step", sc.aom.step),
        },
        doppler: switch("doppler.enabled", sc.doppler),
        off_resonant: switch("scan.off_resonant", sc.off_resonant),
    };
    system.validate()?;
    scan.validate()?;
    Ok(RunConfig {
        system,
        scan,
        steady: SteadyPoint {
            delta10: num("steady.delta10", def.steady.delta10),
            aom: num("steady.aom", def.steady.aom),
        },
    })
}

fn on_off(x: bool) -> &'static str {
    if x {
        "on"
    } else {
        "off"
    }
}

/// Writes every key with its value; `parse(&serialize(c))` reproduces `c` exactly.
pub fn serialize(config: &RunConfig) -> String {
    let s = &config.system;
    let b = s.decay.branching();
    let readout = match s.probe.readout {
        ProbeReadout::PhaseMatched => "phase-matched",
        ProbeReadout::Total => "total",
    };
    let mut out = String::new();
    let mut put = |section: &str, entries: &[(&str, String)]| {
        let _ = writeln!(out, "[{section}]");
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out.push('\n');
    };
    put(
        "levels",
        &[("hyperfine_splitting", s.scheme.hyperfine_splitting().to_string())],
    );
    put(
        "decay",
        &[
            ("gamma_e", s.decay.gamma_e().to_string()),
            ("branching_e0", b[0][0].to_string()),
            ("branching_e1", b[1][0].to_string()),
            ("gamma_ground", s.decay.gamma_ground().to_string()),
        ],
    );
    put(
        "l1",
        &[
            ("rabi", s.l1.rabi(Level::Excited0).to_string()),
            ("rabi_off_resonant", s.l1.rabi(Level::Excited1).to_string()),
        ],
    );
    put(
        "l2",
        &[
            ("rabi_e0", s.l2.rabi(Level::Excited0).to_string()),
            ("rabi_e1", s.l2.rabi(Level::Excited1).to_string()),
        ],
    );
    put(
        "l3",
        &[
            ("rabi_e0", s.l3.rabi(Level::Excited0).to_string()),
            ("rabi_e1", s.l3.rabi(Level::Excited1).to_string()),
            ("max_ratio", s.l3_ratio_bound.to_string()),
        ],
    );
    put(
        "probe",
        &[
            ("readout", readout.to_string()),
            ("beat", on_off(s.probe.beat).to_string()),
        ],
    );
    put(
        "doppler",
        &[
            ("enabled", on_off(config.scan.doppler).to_string()),
            ("temperature", s.doppler.temperature.to_string()),
            ("mass", s.doppler.mass_amu.to_string()),
            ("nodes", s.doppler.nodes.to_string()),
            ("span", s.doppler.span.to_string()),
            ("velocity", s.doppler.velocity.to_string()),
        ],
    );
    let sc = &config.scan;
    put(
        "scan",
        &[
            ("delta10_start", sc.delta10.start.to_string()),
            ("delta10_stop", sc.delta10.stop.to_string()),
            ("delta10_step", sc.delta10.step.to_string()),
            ("aom_start", sc.aom.start.to_string()),
            ("aom_stop", sc.aom.stop.to_string()),
            ("aom_step", sc.aom.step.to_string()),
            ("off_resonant", on_off(sc.off_resonant).to_string()),
            ("optical_depth", s.optical_depth.to_string()),
        ],
    );
    put(
        "steady",
        &[
            ("delta10", config.steady.delta10.to_string()),
            ("aom", config.steady.aom.to_string()),
        ],
    );
    out.truncate(out.trim_end().len());
    out.push('\n');
    out
}
