//! The `nsaudit` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nsaudit::diagnostics::CSV_HEADER;
use nsaudit::runner::{ExperimentConfig, OUTPUT_ROOT_ENV};

fn nsaudit(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsaudit"))
        .args(args)
        .env(OUTPUT_ROOT_ENV, root)
        .output()
        .expect("binary runs")
}

fn emitted(name: &str) -> String {
    let out = nsaudit(Path::new("."), &["preset", name, "--emit-config"]);
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap()
}

/// The section5 preset on a 16³ grid, writing into `directory`.
fn small_section5(directory: &str) -> String {
    emitted("section5")
        .replace("n = 48", "n = 16")
        .replace("directory = section5", &format!("directory = {directory}"))
}

#[test]
fn emitted_configs_parse_back() {
    for name in [
        "section5",
        "theorem31_demo",
        "fractional_demo",
        "stokes_demo",
        "appendixC_demo",
    ] {
        let text = emitted(name);
        let parsed = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(parsed.to_ini(), text, "{name}");
    }
    let out = nsaudit(Path::new("."), &["preset", "section6", "--emit-config"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ini");
    fs::write(
        &path,
        small_section5("bad").replace("nu = 1.4142135623730951", "nu = -1"),
    )
    .unwrap();
    let out = nsaudit(dir.path(), &["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nu"), "{err}");
    assert!(!dir.path().join("bad").exists());
}

#[test]
fn run_writes_artifacts_that_audit_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s5.ini");
    fs::write(&path, small_section5("s5")).unwrap();
    let out = nsaudit(dir.path(), &["run", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = dir.path().join("s5");
    for f in [
        "timeseries.csv",
        "report.json",
        "run_meta.json",
        "checkpoint.bin",
    ] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(run.join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert!(csv.lines().count() > 10);

    let report = run.join("report.json");
    let audit = nsaudit(dir.path(), &["audit", report.to_str().unwrap()]);
    assert!(audit.status.success());
    assert!(String::from_utf8(audit.stdout)
        .unwrap()
        .contains(", 0 mismatches"));

    // A tampered verdict is caught.
    let text = fs::read_to_string(&report).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = &mut json["entries"][0]["satisfied"];
    *first = serde_json::Value::Bool(!first.as_bool().unwrap());
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, json.to_string()).unwrap();
    assert_eq!(
        nsaudit(dir.path(), &["audit", tampered.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let schema = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json");
    let check = Command::new("python3")
        .args([
            "-c",
            "import json, sys, jsonschema; jsonschema.validate(json.load(open(sys.argv[1])), json.load(open(sys.argv[2])))",
            report.to_str().unwrap(),
            schema,
        ])
        .output();
    match check {
        Ok(o) if String::from_utf8_lossy(&o.stderr).contains("No module named 'jsonschema'") => {
            eprintln!("python jsonschema unavailable, schema check skipped")
        }
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("python3 unavailable ({e}), schema check skipped"),
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let path = dir.path().join(format!("{d}.ini"));
        fs::write(&path, small_section5(d)).unwrap();
        assert!(nsaudit(dir.path(), &["run", path.to_str().unwrap()])
            .status
            .success());
    }
    let read = |d: &str| fs::read(dir.path().join(d).join("report.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    let csv = |d: &str| fs::read(dir.path().join(d).join("timeseries.csv")).unwrap();
    assert_eq!(csv("a"), csv("b"));
}

#[test]
fn sweep_runs_each_config_and_reports_the_worst_exit() {
    let configs = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    fs::write(configs.path().join("good.ini"), small_section5("ignored")).unwrap();
    fs::write(configs.path().join("broken.ini"), "[model]\nkind = nse\n").unwrap();
    fs::write(configs.path().join("notes.txt"), "not a config").unwrap();
    let out = nsaudit(root.path(), &["sweep", configs.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(root.path().join("good").join("report.json").is_file());
    assert!(!root.path().join("notes").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.path().join("sweep_summary.json")).unwrap())
            .unwrap();
    assert_eq!(
        summary["runs"].as_array().map(Vec::len),
        Some(2),
        "{summary}"
    );
}
