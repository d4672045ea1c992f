//! Command-line behaviour: outputs, exit codes and the database file.

use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = hpkit::cli::run(std::iter::once("hpkit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid JSON")
}

#[test]
fn predict_reports_energy_and_counts() {
    let (code, out, _) = run(&["predict", "-s", "HPHPPHHPHPPH", "--mode", "count"]);
    assert_eq!(code, 0);
    assert!(out.ends_with('\n'));
    let v = json(&out);
    assert_eq!(v["status"], "Optimal");
    assert_eq!(v["energy"], -5);
    assert_eq!(v["degeneracy"]["value"], 122);
    assert_eq!(v["core_degeneracy"]["value"], 38);
}

#[test]
fn predicted_structure_checks_out() {
    let (_, out, _) = run(&["predict", "-s", "HHPPHH", "-l", "fcc", "--out", "json"]);
    let v = json(&out);
    let moves = v["structure"].as_str().unwrap();
    let (code, out, _) = run(&["check", "-s", "HHPPHH", "-l", "fcc", "-x", moves]);
    assert_eq!(code, 0);
    let c = json(&out);
    assert_eq!(c["valid"], true);
    assert_eq!(c["energy"], v["energy"]);
}

#[test]
fn check_reports_violations_without_failing() {
    let (code, out, _) = run(&["check", "-s", "HPPH", "-x", "FLFB", "--out", "text"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("invalid\n"));
    let (code, _, err) = run(&["check", "-s", "HPPH", "-x", "FLQ"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown move"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["predict", "-s", "HPXH"]).0, 1);
    assert_eq!(run(&["predict", "-s", "HPPH", "-l", "hex"]).0, 1);
    assert_eq!(run(&["predict"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
}

#[test]
fn capacity_errors_exit_with_two() {
    let (code, _, err) = run(&["predict", "-s", &"H".repeat(22)]);
    assert_eq!(code, 2);
    assert!(err.contains("exceeds"));
    assert_eq!(run(&["oracle", "-s", &"HP".repeat(8)]).0, 2);
}

#[test]
fn database_file_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cores.db");
    let p = path.to_str().unwrap();
    let (code, _, _) = run(&["coredb", "build", "--nh-min", "2", "--nh-max", "4", "--layers", "3", "-o", p]);
    assert_eq!(code, 0);
    let (code, info, _) = run(&["coredb", "info", "--db", p, "--out", "json"]);
    assert_eq!(code, 0);
    assert_eq!(json(&info)["lattice"], "cubic");
    let (code, out, _) = run(&["predict", "-s", "HPPH", "--db", p]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["energy"], -1);

    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("contacts 4", "contacts 5", 1)).unwrap();
    let (code, _, err) = run(&["coredb", "info", "--db", p]);
    assert_eq!(code, 2);
    assert!(err.contains("checksum"), "{err}");
    assert_eq!(run(&["coredb", "info", "--db", dir.path().join("absent").to_str().unwrap()]).0, 2);
}

#[test]
fn missing_size_in_database_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cores.db");
    let p = path.to_str().unwrap();
    run(&["coredb", "build", "--nh-min", "2", "--nh-max", "2", "-o", p]);
    let (code, _, err) = run(&["predict", "-s", "HPHPH", "--db", p]);
    assert_eq!(code, 2);
    assert!(err.contains("coredb build"), "{err}");
}

#[test]
fn environment_variable_names_the_database() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cores.db");
    run(&["coredb", "build", "--nh-min", "2", "--nh-max", "2", "-o", path.to_str().unwrap()]);
    let bin = env!("CARGO_BIN_EXE_hpkit");
    let ok = Command::new(bin).args(["predict", "-s", "HPPH"]).env("HPKIT_COREDB", &path).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let missing = Command::new(bin).args(["predict", "-s", "HPHPH"]).env("HPKIT_COREDB", &path).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn stats_csv_has_one_row_per_sequence() {
    let (code, out, _) = run(&["stats", "--count", "8", "--length", "9", "--seed", "5", "--threads", "2"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("index,sequence"));
    assert!(out.contains("reduction_ratio"));
}

#[test]
fn side_chain_oracle_and_predict_agree() {
    let (_, o, _) = run(&["oracle", "-s", "HHPPHH", "-m", "sc"]);
    let (_, p, _) = run(&["predict", "-s", "HHPPHH", "-m", "sc", "--mode", "count"]);
    let (o, p) = (json(&o), json(&p));
    assert_eq!(o["optimal_energy"], p["energy"]);
    assert_eq!(o["degeneracy"], p["degeneracy"]["value"]);
    assert_eq!(o["core_degeneracy"], p["core_degeneracy"]["value"]);
}
