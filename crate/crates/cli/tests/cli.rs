use std::path::Path;
use std::process::{Command, Output};

const NETWORK: &str = "1 2\n2 3\n3 1\n3 4\n4 5\n5 6\n6 4\n1 6\n";

fn infmax(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infmax")).current_dir(dir).args(args).output().expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("net.txt"), NETWORK).unwrap();
    std::fs::write(dir.path().join("run.toml"), "network = \"net.txt\"\np = 0.3\nk = 2\nomega_count = 30\nseed = 17\n")
        .unwrap();
    dir
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup();
    let runs: &[(&[&str], &[&str])] = &[
        (&["sample"], &["manifest.json", "scenarios.json"]),
        (&["presolve", "--presolve", "ina", "--repeats", "2"], &["presolve.csv", "presolve.json"]),
        (&["solve"], &["solve.json"]),
        (&["oracle"], &["oracle.json"]),
        (&["export", "--format", "mps"], &["model.mps"]),
        (&["verify", "--kind", "prop1", "--instances", "4"], &["verify.json"]),
    ];
    for (args, files) in runs {
        let mut contents = Vec::new();
        for out in ["a", "b"] {
            let mut full = args.to_vec();
            full.extend(["--config", "run.toml", "-o", out]);
            let status = infmax(dir.path(), &full);
            assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
            contents.push(files.iter().map(|f| read(dir.path(), &format!("{out}/{f}"))).collect::<Vec<_>>());
        }
        assert_eq!(contents[0], contents[1], "{args:?}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = setup();
    let out = infmax(dir.path(), &["solve", "--config", "run.toml", "--k", "6", "-o", "o"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "o/solve.json")).unwrap();
    assert_eq!(report["k"], 6);
    assert!((report["objective"].as_f64().unwrap() - 6.0).abs() < 1e-9);
    assert_eq!(report["omega_count"], 30);
}

#[test]
fn solve_from_stored_scenarios_matches_direct_run() {
    let dir = setup();
    assert!(infmax(dir.path(), &["sample", "--config", "run.toml", "-o", "s"]).status.success());
    assert!(infmax(dir.path(), &["solve", "--config", "run.toml", "-o", "direct"]).status.success());
    let out = infmax(dir.path(), &["solve", "--scenarios", "s/scenarios.json", "--k", "2", "-o", "stored"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(dir.path(), "direct/solve.json"), read(dir.path(), "stored/solve.json"));
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(infmax(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(infmax(dir.path(), &["solve", "--k", "x"]).status.code(), Some(2));
    assert_eq!(infmax(dir.path(), &["solve", "--network", "net.txt", "--p", "0.3"]).status.code(), Some(2));
    assert_eq!(
        infmax(dir.path(), &["solve", "--network", "missing.txt", "--seed", "1", "--p", "0.3"]).status.code(),
        Some(2)
    );
    assert_eq!(infmax(dir.path(), &["--help"]).status.code(), Some(0));

    let skipped =
        infmax(dir.path(), &["verify", "--kind", "theorem2", "--p", "0.5", "--omega", "5", "--seed", "1", "-o", "v"]);
    assert_eq!(skipped.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&skipped.stdout).contains("skipped"));
    assert!(dir.path().join("v/verify.json").exists());
}

#[test]
fn connectivity_check_writes_report() {
    let dir = setup();
    let out = infmax(
        dir.path(),
        &["verify", "--kind", "theorem2", "--p", "0.8", "--omega", "5", "--trials", "20", "--seed", "4", "-o", "v"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "v/verify.json")).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["report"]["trials"], 20);
}

#[test]
fn master_cap_exports_models() {
    let dir = setup();
    let out = infmax(dir.path(), &["solve", "--config", "run.toml", "--master-cap", "3", "-o", "x"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("model.lp"));
    assert!(read(dir.path(), "x/model.lp").starts_with("\\"));
    assert!(read(dir.path(), "x/model.mps").contains("ENDATA"));
}
