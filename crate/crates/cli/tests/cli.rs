use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsys_cli::config;
use nsys_cli::output::{CONTRAST_HEADER, SPECTRUM_HEADER};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nsys-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn nsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsys"))
        .args(args)
        .env_remove("NSYS_WORKERS")
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL: &str = "\
[scan]
delta10_start = -4
delta10_stop = 4
delta10_step = 2
aom_start = -2
aom_stop = 2
aom_step = 0.1
";

#[test]
fn missing_config_is_an_io_error() {
    let out = nsys(&["steady", "--config", "/nonexistent/none.cfg"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_key_is_a_parse_error_naming_the_line() {
    let dir = scratch("unknown");
    let cfg = write_cfg(&dir, "[l1]\nrabi = 3\nrabbi = 4\n");
    let out = nsys(&["steady", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn probe_ratio_bound_violation_is_a_validation_error() {
    let dir = scratch("ratio");
    let cfg = write_cfg(&dir, "[l1]\nrabi = 1\n[l3]\nrabi_e0 = 0.5\n");
    let out = nsys(&["steady", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("perturbative ratio bound"));
}

#[test]
fn dark_degenerate_ground_is_a_solver_error() {
    let dir = scratch("singular");
    let cfg = write_cfg(
        &dir,
        "[decay]\ngamma_ground = 0\n[l1]\nrabi = 0\nrabi_off_resonant = 0\n\
         [l2]\nrabi_e0 = 0\nrabi_e1 = 0\n[l3]\nrabi_e0 = 0\nrabi_e1 = 0\n",
    );
    let out = nsys(&["steady", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_ground"));
}

#[test]
fn steady_with_fields_off_is_the_ground_mixture() {
    let dir = scratch("steady");
    let cfg = write_cfg(
        &dir,
        "[l1]\nrabi = 0\nrabi_off_resonant = 0\n[l2]\nrabi_e0 = 0\nrabi_e1 = 0\n\
         [l3]\nrabi_e0 = 0\nrabi_e1 = 0\n",
    );
    let out = nsys(&["steady", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let re = &doc["rho"]["re"];
    for (i, want) in [0.5, 0.5, 0.0, 0.0].into_iter().enumerate() {
        let got = re[i][i].as_f64().unwrap();
        assert!((got - want).abs() < 1e-12, "rho[{i}][{i}] = {got}");
    }
    let drho = &doc["delta_rho"]["re"];
    for row in drho.as_array().unwrap() {
        assert!(row.as_array().unwrap().iter().all(|x| x.as_f64().unwrap() == 0.0));
    }
}

#[test]
fn scan_writes_spectrum_and_manifest() {
    let dir = scratch("scan");
    let cfg = write_cfg(&dir, SMALL);
    let out_dir = dir.join("out");
    let out = nsys(&["scan", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SPECTRUM_HEADER));
    assert_eq!(lines.count(), 5 * 41);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "scan");
    assert_eq!(manifest["outputs"][0]["rows"], 5 * 41);
    let embedded = config::parse(manifest["config"].as_str().unwrap()).unwrap();
    assert_eq!(embedded, config::parse(SMALL).unwrap());
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = scratch("workers");
    let cfg = write_cfg(&dir, SMALL);
    let mut csvs = Vec::new();
    for workers in ["1", "2", "4"] {
        let out_dir = dir.join(format!("w{workers}"));
        let out = nsys(&["scan", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--workers", workers]);
        assert_eq!(out.status.code(), Some(0));
        csvs.push(std::fs::read(out_dir.join("spectrum.csv")).unwrap());
    }
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn contrast_writes_curve_and_reports_threshold_or_none() {
    let dir = scratch("contrast");
    let cfg = write_cfg(&dir, SMALL);
    let out_dir = dir.join("out");
    let out = nsys(&["contrast", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("NO_THRESHOLD") || stdout.starts_with("delta10_threshold_mhz"));
    let csv = std::fs::read_to_string(out_dir.join("contrast.csv")).unwrap();
    assert!(csv.starts_with(CONTRAST_HEADER));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn unwritable_output_directory_is_an_io_error() {
    let dir = scratch("unwritable");
    let cfg = write_cfg(&dir, SMALL);
    let blocker = dir.join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = nsys(&["scan", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn shipped_configs_round_trip() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let a = config::load(&path).unwrap();
            let b = config::parse(&config::serialize(&a)).unwrap();
            assert_eq!(a, b, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn pure_lambda_config_has_no_threshold() {
    let dir = scratch("fig9");
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/fig9.cfg");
    let out_dir = dir.join("out");
    let out = nsys(&["contrast", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "NO_THRESHOLD");
}

#[test]
fn lambda_cpt_config_is_dark() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/lambda_cpt.cfg");
    let out = nsys(&["steady", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let re = &doc["rho"]["re"];
    let excited = re[2][2].as_f64().unwrap() + re[3][3].as_f64().unwrap();
    assert!(excited < 1e-3, "excited population {excited}");
}

#[test]
fn shipped_default_config_matches_empty_config_and_validates() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.cfg");
    assert_eq!(config::load(&cfg).unwrap(), config::parse("").unwrap());
    let out = nsys(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
