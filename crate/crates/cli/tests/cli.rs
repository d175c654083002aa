//! End-to-end checks of the `otto` binary: exit codes, file shapes,
//! determinism and full-precision round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn otto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otto"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn temp_file(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("otto-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, text: &str) -> String {
    let path = temp_file(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_CYCLE: &str = r#"
[cycle]
omega_a = 5.382
omega_b = 12.717
j_coupling = 2.0
tau_h = 1.0
tau_ba = 0.2
tau_c = 1.0
tau_ab = 0.2
samples_per_branch = 8
adiabat_steps = 400

[cycle.hot_bath]
temperature = 7.5
gamma_relax = 0.382

[cycle.cold_bath]
temperature = 1.5
gamma_relax = 0.342

[cycle.adiabat]
kind = "linear"
"#;

#[test]
fn simulate_emits_the_documented_columns() {
    let cfg = write_config("columns.toml", SMALL_CYCLE);
    let out = otto(&["simulate", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "t,branch,omega,b1,b2,b3,b4,b5,E,S_E,S_VN,T_dyn,phase_modulus,phi,phi_B,W_cum,Q_cum"
    );
    assert_eq!(text.lines().count(), 1 + 4 * 8);
    assert!(!text.contains('\r'));
}

#[test]
fn identical_config_gives_byte_identical_output() {
    let cfg = fixture("fig3_short.toml");
    let out1 = temp_file("det1.csv");
    let out2 = temp_file("det2.csv");
    for out in [&out1, &out2] {
        let r = otto(&[
            "simulate",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "17",
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trajectory_csv_round_trips_at_full_precision() {
    let cfg = write_config("roundtrip.toml", SMALL_CYCLE);
    let out = otto(&["simulate", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // re-render every float from its parsed value; the text must not change
    for line in text.lines().skip(1) {
        for (i, field) in line.split(',').enumerate() {
            if i == 1 {
                continue; // branch label
            }
            let x: f64 = field.parse().unwrap_or_else(|_| panic!("field {field}"));
            let re = if x.is_nan() {
                "NaN".to_string()
            } else {
                format!("{x:.16e}")
            };
            assert_eq!(re, field, "field {i} changed under round trip");
        }
    }
}

#[test]
fn zero_samples_yield_header_only_file() {
    let cfg = write_config(
        "empty.toml",
        &SMALL_CYCLE.replace("samples_per_branch = 8", "samples_per_branch = 0"),
    );
    let out = otto(&["simulate", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn empty_sweep_grid_exits_zero_with_header_only() {
    let cfg = write_config(
        "empty_sweep.toml",
        &format!(
            "{SMALL_CYCLE}\n[sweep]\nparameter = \"tau_h\"\nstart = 1.0\nstop = 2.0\npoints = 0\n"
        ),
    );
    let out = otto(&["sweep", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn sweep_single_point_matches_limit_cycle_row() {
    let cfg = write_config(
        "single_sweep.toml",
        &format!("{SMALL_CYCLE}\n[sweep]\nparameter = \"tau_h\"\nvalues = [1.0]\n"),
    );
    let sweep_out = otto(&["sweep", "--config", &cfg]);
    let lc_out = otto(&["limit-cycle", "--config", &cfg]);
    assert!(sweep_out.status.success() && lc_out.status.success());
    let sweep_text = String::from_utf8(sweep_out.stdout).unwrap();
    let lc_text = String::from_utf8(lc_out.stdout).unwrap();
    // the sweep row carries two extra leading columns, then the same summary
    let sweep_row: Vec<&str> = sweep_text.lines().nth(1).unwrap().split(',').collect();
    let lc_row: Vec<&str> = lc_text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&sweep_row[2..], &lc_row[..]);
}

#[test]
fn failed_points_are_recorded_and_sweep_continues() {
    let cfg = write_config(
        "failing_sweep.toml",
        &format!("{SMALL_CYCLE}\n[sweep]\nparameter = \"tau_h\"\nvalues = [1.0, -2.0]\n"),
    );
    let out = otto(&["sweep", "--config", &cfg]);
    assert!(out.status.success(), "one good point keeps exit 0");
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",ok"));
    assert!(rows[1].contains("error:"));
}

#[test]
fn invalid_config_fails_with_diagnostic() {
    let cfg = write_config(
        "invalid.toml",
        &SMALL_CYCLE.replace("omega_b = 12.717", "omega_b = 1.0"),
    );
    let out = otto(&["simulate", "--config", &cfg]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("omega"), "diagnostic: {err}");

    let out = otto(&["simulate", "--config", "/nonexistent/path.toml"]);
    assert!(!out.status.success());
}

#[test]
fn unknown_keys_are_a_parse_error() {
    let cfg = write_config(
        "unknown_key.toml",
        &format!("{SMALL_CYCLE}\nnot_a_key = 1\n"),
    );
    let out = otto(&["simulate", "--config", &cfg]);
    assert!(!out.status.success());
}

#[test]
fn json_format_emits_parseable_rows() {
    let cfg = write_config("json.toml", SMALL_CYCLE);
    let out = otto(&["simulate", "--config", &cfg, "--format", "json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4 * 8);
    assert!(rows[0].get("S_E").unwrap().as_f64().unwrap() > 0.0);
}

#[test]
fn validate_passes_and_reports() {
    let out = otto(&["validate", "--seed", "7"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = String::from_utf8_lossy(&out.stderr);
    assert!(report.contains("PASS"));
    assert!(!report.contains("FAIL"));

    // table written on request
    let table = temp_file("validate.csv");
    let out = otto(&["validate", "--seed", "7", "--out", table.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("check,residual,threshold,status\n"));
}

#[test]
fn optimize_emits_probes_and_best_row() {
    let cfg = write_config(
        "optimize.toml",
        &format!("{SMALL_CYCLE}\n[optimize]\ntotal_budget = 2.4\nmin_adiabat = 0.05\n"),
    );
    let out = otto(&["optimize", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("best,"));
    assert!(text.lines().filter(|l| l.starts_with("probe,")).count() > 10);
}

#[test]
fn reference_mode_emits_isoentropic_adiabats() {
    let out = otto(&["simulate", "--config", &fixture("fig3_reference.toml")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (mut s_e_col, mut s_vn_col) = (None, None);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    for (i, name) in header.iter().enumerate() {
        if *name == "S_E" {
            s_e_col = Some(i);
        }
        if *name == "S_VN" {
            s_vn_col = Some(i);
        }
    }
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let se: f64 = cells[s_e_col.unwrap()].parse().unwrap();
        let svn: f64 = cells[s_vn_col.unwrap()].parse().unwrap();
        assert!((se - svn).abs() < 1e-8);
    }
}
