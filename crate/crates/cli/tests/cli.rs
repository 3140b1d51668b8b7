use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

const SCENARIO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/scenario.json");

fn swarmlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmlink"))
        .args(args)
        .output()
        .expect("spawn")
}

fn run_in(dir: &Path, config: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    all.extend(args);
    swarmlink(&all)
}

fn write_config(dir: &TempDir, value: &Value) -> PathBuf {
    let p = dir.path().join("scenario.json");
    fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(p).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn reference_antenna(vswr: f64) -> Value {
    json!({
        "freq_low": 2.4e9, "freq_high": 2.5e9, "gain_dbi": 3.0, "vswr": vswr,
        "input_power": 50.0, "input_impedance": 50.0, "rx_threshold_dbm": -85.0,
        "link_length": 2000.0, "operational_temp": 358.0
    })
}

#[test]
fn budget_reference_report_shows_margin() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &json!({ "budget": { "reference": true } }));
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["budget"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    let line = report.lines().find(|l| l.contains("Link Margin")).expect("margin line");
    assert_eq!(line, format!("{:>24} 6.229 dB", "Link Margin"));
    let file = fs::read_to_string(out.join("budget_report.txt")).unwrap();
    assert!(report.starts_with(&file));
    assert!(file.lines().all(|l| l == l.trim_end()));

    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("budget.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["mode"], "paper_literal");
}

#[test]
fn mode_flag_switches_to_corrected_sums() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &json!({ "budget": { "reference": true } }));
    let o = run_in(&tmp.path().join("out"), &cfg, &["budget", "--mode", "corrected"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .any(|l| l == format!("{:>24} 4.429 dB", "Link Margin")));
}

#[test]
fn two_ray_falls_below_friis_beyond_crossover() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({
            "seed": 1,
            "channel": {
                "link": {
                    "tx_power": 1.0, "tx_gain": 1.0, "rx_gain": 1.0, "wavelength": 0.125,
                    "distance": 1.0, "tx_height": 30.0, "rx_height": 2.0
                },
                "sweep": { "d_min": 10.0, "d_max": 100000.0, "points": 400 }
            }
        }),
    );
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["channel", "--sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Only the sweep was requested.
    assert!(!out.join("ber_awgn.csv").exists());

    let (header, rows) = read_csv(&out.join("channel_sweep.csv"));
    assert_eq!(header, ["d", "pr_friis_dbm", "pr_tworay_dbm"]);
    assert_eq!(rows.len(), 400);
    let dc = 4.0 * std::f64::consts::PI * 30.0 * 2.0 / 0.125;
    let far: Vec<_> = rows
        .iter()
        .map(|r| r.iter().map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| r[0] > 1.5 * dc)
        .collect();
    assert!(!far.is_empty());
    for r in far {
        assert!(r[2] < r[1], "two-ray {} not below Friis {} at {} m", r[2], r[1], r[0]);
    }
}

#[test]
fn ber_files_have_empty_theory_for_rician() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({
            "seed": 5,
            "channel": {
                "link": { "tx_power": 1.0, "tx_gain": 1.0, "rx_gain": 1.0, "wavelength": 0.125,
                          "distance": 1.0, "tx_height": 10.0, "rx_height": 2.0 },
                "ebn0_db": [0.0, 6.0],
                "n_bits": 20000
            }
        }),
    );
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["channel", "--ber"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for kind in ["awgn", "rician", "rayleigh"] {
        let (header, rows) = read_csv(&out.join(format!("ber_{kind}.csv")));
        assert_eq!(header, ["ebn0_db", "ber_theory", "ber_mc", "n_errors"]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][1].is_empty(), kind == "rician");
    }
}

#[test]
fn missing_section_is_a_validation_error_for_that_subcommand_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &json!({ "budget": { "reference": true } }));
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["network"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[validation]"), "{err}");
    assert!(err.contains("network: section is required"), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(!out.exists());

    assert!(run_in(&out, &cfg, &["budget"]).status.success());
}

#[test]
fn every_violation_is_reported_with_its_field() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({
            "budget": { "reference": true, "antenna": reference_antenna(0.5) },
            "optimize": { "wpa": { "renew_fraction": 1.5 } },
            "outputs": [{ "what": "nope", "path": "x.csv", "format": "csv" }]
        }),
    );
    let out = tmp.path().join("out");
    let o = run_in(&out, &cfg, &["validate"]);
    assert_eq!(o.status.code(), Some(1));
    let report = stdout(&o);
    let has = |needle: &str| report.lines().any(|l| l.contains(needle));
    assert!(has("budget.antenna.vswr") && report.contains(">= 1"), "{report}");
    assert!(has("optimize.wpa: renew_fraction"), "{report}");
    assert!(has("seed: required"), "{report}");
    assert!(has("outputs[0].what: unknown artifact 'nope'"), "{report}");
    assert!(report.ends_with("4 violation(s)\n"), "{report}");
    // Validation writes nothing, not even the output directory.
    assert!(!out.exists());

    // The same file fails every subcommand before anything is written.
    let o = run_in(&out, &cfg, &["budget"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("vswr"));
    assert!(!out.exists());
}

#[test]
fn seed_flag_satisfies_the_seed_requirement() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({ "optimize": { "dim": 2, "pso": { "max_iters": 20 }, "gwo": { "max_iters": 20 }, "wpa": { "max_iters": 5 } } }),
    );
    let out = tmp.path().join("out");
    assert_eq!(run_in(&out, &cfg, &["optimize"]).status.code(), Some(2));
    let o = run_in(&out, &cfg, &["optimize", "--seed", "9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out.join("optimize_trace.csv"));
    assert_eq!(header, ["algorithm", "iteration", "best_value"]);
    assert_eq!(rows.len(), 20 + 20 + 5);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for cmd in [
        "dynamics",
        "wind",
        "optimize",
        "formation",
        "channel",
        "budget",
        "berdist",
        "network",
    ] {
        for dir in [&a, &b] {
            let o = run_in(dir.path(), Path::new(SCENARIO), &[cmd]);
            assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 21);
    for n in names {
        let x = fs::read(a.path().join(&n)).unwrap();
        let y = fs::read(b.path().join(&n)).unwrap();
        assert!(x == y, "{n:?} differs between runs");
    }
}

#[test]
fn parallel_flag_does_not_change_results() {
    let serial = TempDir::new().unwrap();
    let parallel = TempDir::new().unwrap();
    let cfg = Path::new(SCENARIO);
    assert!(run_in(serial.path(), cfg, &["channel", "--ber"]).status.success());
    assert!(run_in(parallel.path(), cfg, &["channel", "--ber", "--parallel"])
        .status
        .success());
    for kind in ["awgn", "rician", "rayleigh"] {
        let f = format!("ber_{kind}.csv");
        assert_eq!(
            fs::read(serial.path().join(&f)).unwrap(),
            fs::read(parallel.path().join(&f)).unwrap()
        );
    }
}

#[test]
fn output_override_redirects_one_artifact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({
            "berdist": {},
            "outputs": [{ "what": "berdist", "path": "curves/ber_vs_distance.csv", "format": "csv" }]
        }),
    );
    let out = tmp.path().join("out");
    assert!(run_in(&out, &cfg, &["berdist"]).status.success());
    let (header, rows) = read_csv(&out.join("curves/ber_vs_distance.csv"));
    assert_eq!(header, ["distance_m", "pr_dbm", "ebn0_db", "ber"]);
    assert_eq!(rows.len(), 81);
    assert!(!out.join("berdist.csv").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, &json!({ "budget": { "reference": true } }));
    // A regular file where the output directory should be.
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let o = run_in(&blocker.join("out"), &cfg, &["budget"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[io]"), "{}", stderr(&o));
}

#[test]
fn unreadable_or_malformed_config() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(tmp.path(), &tmp.path().join("absent.json"), &["budget"]);
    assert_eq!(o.status.code(), Some(3));

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"budget\": ").unwrap();
    let o = run_in(tmp.path(), &bad, &["budget"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[parse]"));

    // Unknown fields are rejected rather than silently ignored.
    fs::write(&bad, r#"{ "budgett": {} }"#).unwrap();
    assert_eq!(run_in(tmp.path(), &bad, &["budget"]).status.code(), Some(2));
}

#[test]
fn orphaned_node_is_a_model_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        &json!({
            "network": {
                "kind": "star", "n_uavs": 3, "link_range": 1.0,
                "positions": [[0, 0, 0], [0, 0, 0.5], [5, 0, 0], [0, 0, 0.9]]
            }
        }),
    );
    let o = run_in(tmp.path(), &cfg, &["network"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(
        stderr(&o).trim_end(),
        "error[model] infeasible topology: orphaned nodes [2]"
    );
}

#[test]
fn example_scenario_validates() {
    let o = swarmlink(&["validate", "--config", SCENARIO]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
