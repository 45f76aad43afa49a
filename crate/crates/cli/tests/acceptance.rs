//! One PASS/FAIL line per acceptance criterion, run against the shipped configs.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nsys_cli::config::{self, RunConfig};
use nsys_cli::validate::{self, Check};
use nsys_core::scan::{trace_feature, Beam};
use nsys_core::{contrast_curve, run_scan, threshold_detect, Axis, Spectrum};

const GAMMA: f64 = 6.07;
const AOM_STEP_TOL: f64 = 1.0;
const SIGN_CHANGE_TOL_MHZ: f64 = 3.0;
const WIDTH_AGREEMENT: f64 = 0.30;
const SCAN_BUDGET_S: f64 = 30.0;
const DOPPLER_SCAN_BUDGET_S: f64 = 600.0;
const DOPPLER_RUNTIME_NODES: usize = 129;

struct Outcome {
    passed: bool,
    detail: String,
}

fn cfg_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> RunConfig {
    config::load(&cfg_path(name)).unwrap()
}

fn scan(run: &RunConfig) -> Spectrum {
    run_scan(&run.system, &run.scan, 1).unwrap()
}

fn transparency_at_resonance(fig8: &RunConfig, spectrum: &Spectrum, elapsed: f64) -> Outcome {
    let tol = AOM_STEP_TOL * fig8.scan.aom.step + 1e-9;
    let mut misses = Vec::new();
    for (i, &d) in spectrum.delta10.iter().enumerate() {
        let f = trace_feature(&spectrum.aom, &spectrum.transmission(i, Beam::L2));
        let ok = f.is_some_and(|f| f.contrast < 0.0 && f.position.abs() <= tol);
        if !ok {
            misses.push(d);
        }
    }

    let mut doppler = fig8.clone();
    doppler.scan.doppler = true;
    doppler.system.doppler.nodes = DOPPLER_RUNTIME_NODES;
    let started = Instant::now();
    run_scan(&doppler.system, &doppler.scan, 1).unwrap();
    let doppler_elapsed = started.elapsed().as_secs_f64();

    let full_grid = spectrum.delta10.len() == 71 && spectrum.aom.len() == 201;
    Outcome {
        passed: misses.is_empty()
            && full_grid
            && elapsed < SCAN_BUDGET_S
            && doppler_elapsed < DOPPLER_SCAN_BUDGET_S,
        detail: format!(
            "L2 maximum within {tol:.2} MHz of two-photon resonance at {}/{} detunings (misses {misses:?}); \
             {}x{} scan {elapsed:.1} s (< {SCAN_BUDGET_S} s), {DOPPLER_RUNTIME_NODES}-node Doppler scan \
             {doppler_elapsed:.1} s (< {DOPPLER_SCAN_BUDGET_S} s)",
            spectrum.delta10.len() - misses.len(),
            spectrum.delta10.len(),
            spectrum.delta10.len(),
            spectrum.aom.len(),
        ),
    }
}

fn gain_below_zero_detuning(spectrum: &Spectrum) -> Outcome {
    let curve = contrast_curve(spectrum);
    let mut wrong = Vec::new();
    for (&d, &c) in curve.delta10.iter().zip(&curve.contrast) {
        if d.abs() <= SIGN_CHANGE_TOL_MHZ {
            continue;
        }
        let ok = if d <= 0.0 { c < 0.0 } else { c > 0.0 };
        if !ok {
            wrong.push(d);
        }
    }
    let threshold = threshold_detect(&curve).ok();
    let near_zero = threshold.is_some_and(|t| t.abs() <= SIGN_CHANGE_TOL_MHZ);
    Outcome {
        passed: wrong.is_empty() && near_zero,
        detail: format!(
            "L3 gain below / absorption above resonance outside +/-{SIGN_CHANGE_TOL_MHZ} MHz \
             (wrong sign at {wrong:?}); threshold {threshold:?} MHz (|.| <= {SIGN_CHANGE_TOL_MHZ})"
        ),
    }
}

fn pure_lambda_transparency(fig9: &RunConfig) -> Outcome {
    let spectrum = scan(fig9);
    let mut bad = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &d) in spectrum.delta10.iter().enumerate() {
        let f2 = trace_feature(&spectrum.aom, &spectrum.transmission(i, Beam::L2));
        let f3 = trace_feature(&spectrum.aom, &spectrum.transmission(i, Beam::L3));
        match (f2, f3) {
            (Some(a), Some(b)) if a.contrast < 0.0 && b.contrast < 0.0 => {
                match (a.width, b.width) {
                    (Some(wa), Some(wb)) => {
                        let r = wb / wa;
                        lo = lo.min(r);
                        hi = hi.max(r);
                        if (r - 1.0).abs() > WIDTH_AGREEMENT {
                            bad.push(d);
                        }
                    }
                    _ => bad.push(d),
                }
            }
            _ => bad.push(d),
        }
    }
    let threshold = threshold_detect(&contrast_curve(&spectrum));
    Outcome {
        passed: bad.is_empty() && threshold.is_err(),
        detail: format!(
            "both beams transparent with L3/L2 width ratio in [{lo:.3}, {hi:.3}] \
             (1 +/- {WIDTH_AGREEMENT}) , failing detunings {bad:?}; threshold: {}",
            match threshold {
                Ok(t) => format!("{t:.3} MHz"),
                Err(_) => "NO_THRESHOLD".into(),
            }
        ),
    }
}

fn width_at(run: &RunConfig, delta10: f64) -> Option<f64> {
    let mut one = run.clone();
    one.scan.delta10 = Axis::new(delta10, delta10, 1.0).unwrap();
    let s = scan(&one);
    trace_feature(&s.aom, &s.transmission(0, Beam::L3)).and_then(|f| f.width)
}

fn sub_natural_width(fig8: &RunConfig) -> Outcome {
    let w = width_at(fig8, 15.0);
    let mut doubled = fig8.clone();
    doubled.system.l2 = doubled.system.l2.scaled(2.0).unwrap();
    let wd = width_at(&doubled, 15.0);
    let passed = matches!((w, wd), (Some(a), Some(b)) if a < GAMMA && b > a);
    Outcome {
        passed,
        detail: format!("L3 FWHM at delta10 = 15 MHz: {w:?} MHz (< {GAMMA}), with doubled L2 drive {wd:?} MHz"),
    }
}

fn from_checks(checks: &[Check]) -> Outcome {
    Outcome {
        passed: checks.iter().all(|c| c.passed),
        detail: checks
            .iter()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn validate_command(name: &str) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_nsys"))
        .args(["validate", "--config"])
        .arg(cfg_path(name))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    Outcome {
        passed: out.status.code() == Some(0),
        detail: format!(
            "nsys validate --config {name}: exit {:?}, {} checks, failures {failed:?}",
            out.status.code(),
            stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count()
        ),
    }
}

#[test]
fn acceptance() {
    let fig8 = load("fig8.cfg");
    let fig9 = load("fig9.cfg");

    let started = Instant::now();
    let spectrum8 = scan(&fig8);
    let elapsed = started.elapsed().as_secs_f64();

    let mut criteria = vec![
        ("resonant L2 transparency across detunings", transparency_at_resonance(&fig8, &spectrum8, elapsed)),
        ("L3 gain-to-absorption sign change near zero detuning", gain_below_zero_detuning(&spectrum8)),
        ("pure lambda: both beams transparent with similar widths", pure_lambda_transparency(&fig9)),
        ("sub-natural L3 width growing with L2 drive", sub_natural_width(&fig8)),
        ("probe linearization error is quadratic", from_checks(&[validate::perturbation_order()])),
    ];
    let mut steady = validate::two_level_oracle();
    steady.extend(validate::cpt_oracle());
    steady.push(validate::evolution_agreement());
    criteria.push(("steady-state oracles", from_checks(&steady)));
    criteria.push(("invariant suite via validate command", validate_command("fig8.cfg")));

    for (i, (name, o)) in criteria.iter().enumerate() {
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("{mark} criterion {}: {name} | {}", i + 1, o.detail);
    }
    let failed: Vec<usize> = criteria
        .iter()
        .enumerate()
        .filter(|(_, (_, o))| !o.passed)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
