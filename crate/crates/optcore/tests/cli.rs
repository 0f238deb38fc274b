//! End-to-end checks of the command-line surface: flag handling, output
//! formats, exit codes, and the shipped data files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optcore::cost::{default_calibration, DeviceCalibration};
use optcore::model::{resnet18_preset, NetworkSpec, PrecisionConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optcore"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn shipped_calibration_matches_regenerated_fit() {
    let shipped = DeviceCalibration::load(&data_file("default_calibration.json")).unwrap();
    let fitted = default_calibration().unwrap();
    assert_eq!(
        serde_json::to_string(&shipped).unwrap(),
        serde_json::to_string(&fitted).unwrap(),
        "data/default_calibration.json drifted from the fit; regenerate with \
         `optcore calibrate --out data/default_calibration.json`"
    );
}

#[test]
fn shipped_network_matches_preset() {
    let shipped = NetworkSpec::load(&data_file("resnet18.json")).unwrap();
    let preset = resnet18_preset(PrecisionConfig::new(3, 4), 1024);
    assert_eq!(shipped, preset, "data/resnet18.json drifted from the preset");
}

#[test]
fn simulate_writes_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = run(&[
        "simulate",
        "--network",
        "resnet18",
        "--mode",
        "nru",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["network"], "resnet18");
    assert_eq!(report["mode"], "nru");
    assert_eq!(report["layers"].as_array().unwrap().len(), 21);
    assert!(report["header"]["calibration_source"]
        .as_str()
        .unwrap()
        .contains("fitted-default"));
}

#[test]
fn simulate_csv_has_layer_rows() {
    let out = run(&["simulate", "--network", "resnet18", "--mode", "ru", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 22, "header plus one row per layer");
    assert!(lines[0].starts_with("layer,"));
}

#[test]
fn map_json_exposes_exact_plan_fields() {
    let out = run(&["map", "--network", "resnet18"]);
    assert!(out.status.success());
    let plans: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plans.len(), 21);

    let base = [
        "layer_ref",
        "arms_per_stride",
        "strides_per_bank",
        "idle_mrs_per_bank",
        "stride_ops_total",
        "strides_per_cycle",
        "cycles",
        "active_mrs_per_cycle",
        "active_arms_per_cycle",
        "macs_total",
        "weight_values_total",
        "accumulation_fanin",
    ];
    for (i, plan) in plans.iter().enumerate() {
        let mut keys: Vec<&str> = plan.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort_unstable();
        let mut want: Vec<&str> = base.to_vec();
        if i == plans.len() - 1 {
            want.push("iterations");
        }
        want.sort_unstable();
        assert_eq!(keys, want, "plan {i} field set");
    }
    let encoder = plans.last().unwrap();
    assert_eq!(encoder["iterations"], encoder["cycles"]);
}

#[test]
fn map_rejects_csv() {
    let out = run(&["map", "--network", "resnet18", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:"), "stderr was: {err}");
}

#[test]
fn sweep_csv_header_and_grid_shape() {
    let out = run(&["sweep", "--dims", "64,128", "--seed", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# seed=3");
    assert_eq!(lines[1], "dim,precision_4,precision_8,precision_32");
    assert_eq!(lines.len(), 4, "two dim rows");
    assert!(lines[2].starts_with("64,"));
    assert!(lines[3].starts_with("128,"));
}

#[test]
fn transfer_reports_exact_link_energies() {
    let out = run(&["transfer", "--dims", "1024", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "payload,vector_size,payload_bytes,energy_mj,ratio_vs_image");
    assert_eq!(lines[1], "image,16384,65536,7680,1");
    assert_eq!(lines[2], "hypervector,1024,512,60,128");
}

#[test]
fn calibrate_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cal.json");
    let out = run(&["calibrate", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let written = DeviceCalibration::load(&out_path).unwrap();
    let fitted = default_calibration().unwrap();
    assert_eq!(written, fitted);
}

#[test]
fn verify_prints_suite_lines_and_passes() {
    let out = run(&["verify", "--seed", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "four suites plus the verdict");
    for line in &lines[..4] {
        assert!(line.contains("0 failures"), "suite line: {line}");
    }
    assert_eq!(lines[4], "verify: PASS");
}

#[test]
fn unknown_network_is_a_single_line_error() {
    let out = run(&["simulate", "--network", "resnet99", "--mode", "ru"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "stderr was: {err}");
    assert!(err.starts_with("error:"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flag_value_exits_two() {
    let out = run(&["simulate", "--network", "resnet18", "--mode", "warp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn help_and_version_exit_clean() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8(help.stdout).unwrap().contains("simulate"));

    let version = run(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}
