use std::fs;
use std::path::Path;
use std::process::Command;

fn dfemlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dfemlab"))
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
}

#[test]
fn run_writes_artifacts_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let st = dfemlab().arg("run").arg(configs().join("patch_dfem.json")).arg("--out").arg(dir).status().unwrap();
        assert!(st.success());
    }
    let ra = fs::read(a.path().join("results.csv")).unwrap();
    assert_eq!(ra, fs::read(b.path().join("results.csv")).unwrap());
    assert_eq!(fs::read(a.path().join("fields.vtk")).unwrap(), fs::read(b.path().join("fields.vtk")).unwrap());

    let text = String::from_utf8(ra).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    let rec = rows.records().next().unwrap().unwrap();
    let col = |name: &str| rec[headers.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
    assert!(col("R_d") < 1e-8, "{text}");
    assert!(!a.path().join("crack_history.csv").exists());
}

#[test]
fn errors_are_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema": 9}"#).unwrap();
    let out = dfemlab().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    let line: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(line["error"], "config");

    let missing = dfemlab().arg("run").arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let line: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(line["error"], "io");
}

#[test]
fn bench_bar_rows_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let st = dfemlab().args(["bench", "bar1d", "--out"]).arg(dir.path()).status().unwrap();
    assert!(st.success());
    let rows = fs::read_to_string(dir.path().join("bar1d.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 8);
    let slopes = fs::read_to_string(dir.path().join("bar1d_slopes.csv")).unwrap();
    assert_eq!(slopes.lines().count(), 3);
}

#[test]
fn inclined_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let st = dfemlab()
        .args(["bench", "inclined", "--angles", "3", "--methods", "xdfem", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let table = fs::read_to_string(dir.path().join("inclined_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "beta_deg,K_I_xdfem,K_II_xdfem");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("90.00,0.0000,"));
}

#[test]
fn bad_flags_fail() {
    let out = dfemlab().args(["bench", "griffith", "--enrichment", "sideways"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = dfemlab().args(["bench", "plate-hole", "--methods", "q9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
