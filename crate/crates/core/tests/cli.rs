use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn ipl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn version_names_report_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = ipl(dir.path(), &["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("ipl 0.1.0"), "{text}");
    assert!(text.contains("report format 1"), "{text}");
}

#[test]
fn spectrum_of_path_with_run_config() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p3.json",
        r#"{"vertices":["a","b","c"],"edges":[["a","b"],["b","c"]]}"#,
    );
    let out = ipl(dir.path(), &["spectrum", "--graph", "p3.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let eig: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    for (x, y) in eig.iter().zip([0.0, 1.0, 3.0]) {
        assert!((x - y).abs() < 1e-12);
    }
    assert_eq!(v["run_config"]["command"], "spectrum");
    assert_eq!(v["run_config"]["input_paths"]["graph"], "p3.json");
    assert_eq!(v["zero_multiplicity"], 1);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = ipl(
        dir.path(),
        &["fuzz", "--suite", "eml", "--seed", "9", "--count", "4", "--max-n", "6"],
    );
    let b = ipl(
        dir.path(),
        &["fuzz", "--suite", "eml", "--seed", "9", "--count", "4", "--max-n", "6"],
    );
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_flattens_keys() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.json", r#"{"rows":[[2,1],[1,2]]}"#);
    let out = ipl(dir.path(), &["--csv", "conformality", "m.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.lines().any(|l| l == "rho_strong,0.5"));
    assert!(text.lines().any(|l| l == "run_config.flags.csv,true"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "indef.json", r#"{"rows":[[1,2],[2,1]]}"#);
    write(dir.path(), "broken.json", "{rows");
    write(
        dir.path(),
        "diag6.json",
        r#"{"rows":[[2,0.1,0.1,0.1,0.1,0.1],[0.1,2,0.1,0.1,0.1,0.1],[0.1,0.1,2,0.1,0.1,0.1],[0.1,0.1,0.1,2,0.1,0.1],[0.1,0.1,0.1,0.1,2,0.1],[0.1,0.1,0.1,0.1,0.1,2]]}"#,
    );
    let cases: [&[&str]; 5] = [
        &["conformality", "indef.json"],
        &["conformality", "broken.json"],
        &["conformality", "missing.json"],
        &["conformality", "--bogus"],
        &["--weak-cap", "5", "conformality", "diag6.json"],
    ];
    for args in cases {
        let out = ipl(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let forced = ipl(
        dir.path(),
        &["--weak-cap", "5", "--force", "conformality", "diag6.json"],
    );
    assert_eq!(forced.status.code(), Some(0));
}

#[test]
fn cheeger_check_passes_on_path() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "p3.json",
        r#"{"vertices":["a","b","c"],"edges":[["a","b"],["b","c"]]}"#,
    );
    let out = ipl(dir.path(), &["verify", "cheeger", "--graph", "p3.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["phi"], 1.0);
    assert_eq!(v["omega"], 2.0);
}
