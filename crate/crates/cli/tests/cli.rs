use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surface-poisson"))
}

fn run(args: &[&str], out: &Path) -> (Output, Value) {
    let output = bin().args(args).arg("--out").arg(out).output().unwrap();
    let text = std::fs::read_to_string(out).unwrap_or_else(|_| panic!("no report: {output:?}"));
    (output, serde_json::from_str(&text).unwrap())
}

fn record<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == name)
        .unwrap_or_else(|| panic!("no record {name}"))
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

#[test]
fn verify_is_deterministic_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let args = ["verify", "--samples", "3", "--seed", "11"];
    let (out, report) = run(&args, &a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    run(&args, &b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(report["summary"]["all_passed"], true);
    assert_eq!(report["conventions"]["beta_sign"], 1.0);

    let c = dir.path().join("c.json");
    run(&["verify", "--samples", "3", "--seed", "12"], &c);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn tampered_beta_fails_closedness() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run(&["verify", "--samples", "2", "--tamper-beta"], &dir.path().join("t.json"));
    assert_eq!(out.status.code(), Some(1));
    let closed = record(&report, "form_closedness");
    assert_eq!(closed["passed"], false);
    assert!(closed["value"].as_f64().unwrap() > 1e-3);
    assert_eq!(record(&report, "form_invariance")["passed"], true);
    assert_eq!(report["config"]["tamper_beta"], true);
    assert_eq!(report["conventions"]["beta_sign"], -1.0);
}

#[test]
fn every_report_matches_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let validator = schema();
    let runs: [&[&str]; 7] = [
        &["alcove", "--group", "SU(3)"],
        &["alcove", "--group", "SO(3)"],
        &["verify", "--samples", "2"],
        &["cohomology", "--samples", "3", "--group", "su3"],
        &["sample", "--samples", "2", "--class", "0.1,-0.1", "--class", "0.2,-0.2"],
        &["bracket", "--steps", "3"],
        &["verify", "--samples", "1", "--tamper-beta"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let (_, report) = run(args, &dir.path().join(format!("{i}.json")));
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        for r in report["records"].as_array().unwrap() {
            assert!(r["tolerance"].is_number());
        }
    }
}

#[test]
fn alcove_tables_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let out = bin()
        .args(["alcove", "--group", "SU(2)", "--csv"])
        .arg(&csv)
        .arg("--out")
        .arg(dir.path().join("a.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("group,family,parameter"));
    let singular: Vec<&str> = lines[1..].iter().filter(|l| l.contains(",false,")).copied().collect();
    assert_eq!(singular.len(), 1);
    assert!(singular[0].contains(",1/2,"));

    let (out, report) = run(&["alcove", "--group", "SU(3)"], &dir.path().join("b.json"));
    assert!(out.status.success());
    assert_eq!(record(&report, "su3_case_table")["value"], 0.0);
    let rows = report["tables"][0]["rows"].as_array().unwrap();
    let vertex = rows.iter().find(|r| r[1] == "outer_face" && r[2] == "1/3").unwrap();
    assert_eq!((vertex[6].as_u64(), vertex[7].as_u64()), (Some(4), Some(0)));
}

#[test]
fn bracket_of_a_function_with_itself_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run(&["bracket", "--f", "x1 y1", "--g", "x1 y1", "--steps", "3"], &dir.path().join("b.json"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for row in report["tables"][0]["rows"].as_array().unwrap() {
        assert_eq!(row[2], "ok");
        assert!(row[3].as_f64().unwrap().abs() < 1e-10);
    }
    assert!(record(&report, "casimir")["value"].as_f64().unwrap() < 1e-6);
}

#[test]
fn config_file_is_echoed_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "group = \"SU(3)\"\nseed = 5\nsamples = 2\n[tolerances]\ncomplex = 1e-8\n",
    )
    .unwrap();
    let (out, report) = run(
        &["cohomology", "--config", cfg.to_str().unwrap(), "--seed", "6"],
        &dir.path().join("c.json"),
    );
    assert!(out.status.success());
    assert_eq!(report["config"]["group"], "SU(3)");
    assert_eq!(report["config"]["seed"], 6);
    assert_eq!(report["config"]["tolerances"]["complex"], 1e-8);
    assert_eq!(record(&report, "complex_exactness")["tolerance"], 1e-8);
    assert!(report["config"].get("out").is_none());
}

#[test]
fn bad_input_exits_with_an_error() {
    for args in [
        &["verify", "--group", "G2"][..],
        &["alcove", "--group", "SU(4)"],
        &["verify", "--tol-closed", "-1"],
        &["sample", "--class", "0.1,-0.1"],
        &["bracket", "--f", "x7"],
    ] {
        let out = bin().args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}
