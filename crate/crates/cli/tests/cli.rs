use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ncpsi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncpsi")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_config(dir: &Path, name: &str, body: &str, extra: &[&str]) -> (Output, Option<Value>) {
    let path = write_config(dir, name, body);
    let mut args = vec!["run", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = ncpsi(&args);
    let stem = name.trim_end_matches(".toml");
    let doc = fs::read_to_string(dir.join(format!("{stem}.json"))).ok().map(|s| serde_json::from_str(&s).unwrap());
    (out, doc)
}

const THETA: &str = "theta = [[0.0, 0.37], [-0.37, 0.0]]";

#[test]
fn weyl_ratio_is_near_one() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "task = \"weyl\"\nn = 2\n{THETA}\ntruncation = {{ radius = 25, margin = 0 }}\n\
         [output]\nstem = \"weyl\"\n[operator]\nkind = \"laplacian\"\n[params]\nlambda_cut = 400.0\n"
    );
    let (out, doc) = run_config(tmp.path(), "weyl.toml", &body, &["--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = doc.unwrap();
    let ratio = doc["result"]["report"]["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    assert!(tmp.path().join("weyl.counting.csv").is_file());
    assert!(tmp.path().join("weyl.timing.json").is_file());
}

#[test]
fn algebra_check_passes_on_commutative_torus() {
    let tmp = TempDir::new().unwrap();
    let body = "task = \"algebra-check\"\nn = 2\ntruncation = { radius = 4, margin = 1 }\n\
                [output]\nstem = \"alg\"\n[params]\ntrials = 4\n";
    let (out, doc) = run_config(tmp.path(), "alg.toml", body, &["--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(doc.unwrap()["passed"], Value::Bool(true));
}

#[test]
fn flat_laplacian_parametrix_has_one_component() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "task = \"parametrix\"\nn = 2\n{THETA}\ntruncation = {{ radius = 8, margin = 2 }}\n\
         [output]\nstem = \"par\"\n[operator]\nkind = \"laplacian\"\n[params]\nterms = 3\nshells = [2, 4]\n"
    );
    let (out, doc) = run_config(tmp.path(), "par.toml", &body, &["--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = doc.unwrap();
    assert_eq!(doc["result"]["nonzero_components"], serde_json::json!([0]));
}

#[test]
fn result_document_is_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "task = \"duality\"\nn = 2\n{THETA}\ntruncation = {{ radius = 6, margin = 0 }}\nseed = 3\n\
         [output]\nstem = \"dual\"\n[params]\ns = 0.75\nradius = 4\ncount = 12\n"
    );
    let path = write_config(tmp.path(), "dual.toml", &body);
    let read = || {
        assert!(ncpsi(&["run", path.to_str().unwrap()]).status.success());
        fs::read(tmp.path().join("dual.json")).unwrap()
    };
    let first = read();
    let second = read();
    assert_eq!(first, second);
}

#[test]
fn malformed_config_exits_with_code_two() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "bad.toml", "task = \"weyl\"\nn = 2\ntruncation = { radius = 4 }\n");
    assert_eq!(ncpsi(&["run", path.to_str().unwrap()]).status.code(), Some(2));

    let asym = "task = \"weyl\"\nn = 2\ntheta = [[0.0, 0.3], [0.3, 0.0]]\ntruncation = { radius = 4, margin = 0 }\n";
    let path = write_config(tmp.path(), "asym.toml", asym);
    assert_eq!(ncpsi(&["run", path.to_str().unwrap()]).status.code(), Some(2));

    let missing = "task = \"trace\"\nn = 2\ntruncation = { radius = 4, margin = 0 }\n\
                   [operator]\nkind = \"polynomial\"\nfile = \"nowhere.json\"\n";
    let path = write_config(tmp.path(), "missing.toml", missing);
    assert_eq!(ncpsi(&["run", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn element_parse_error_exits_with_code_two() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("a.txt"), "0 0 1.0 0.0\n1 x 0.5 0.0\n").unwrap();
    let body = "task = \"duality\"\nn = 2\ntruncation = { radius = 4, margin = 0 }\n\
                [output]\nstem = \"d\"\n[params]\ns = 1.0\nelement = \"a.txt\"\n";
    let path = write_config(tmp.path(), "d.toml", body);
    let out = ncpsi(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn tolerance_breach_under_check_exits_with_code_four() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "task = \"weyl\"\nn = 2\n{THETA}\ntruncation = {{ radius = 12, margin = 0 }}\n\
         [output]\nstem = \"w\"\n[operator]\nkind = \"laplacian\"\n[params]\nlambda_cut = 100.0\ntol = 1e-9\n"
    );
    let path = write_config(tmp.path(), "w.toml", &body);
    assert_eq!(ncpsi(&["run", path.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(ncpsi(&["run", path.to_str().unwrap(), "--check"]).status.code(), Some(4));
}

#[test]
fn selftest_passes_and_catches_phase_fault() {
    let out = ncpsi(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let tmp = TempDir::new().unwrap();
    let report = tmp.path().join("report.json");
    let out = ncpsi(&["selftest", "--inject-phase-fault", "--json", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let entries: Vec<Value> = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    let assoc = entries.iter().find(|e| e["name"] == "associativity (n=2)").unwrap();
    assert_eq!(assoc["passed"], Value::Bool(false));
}

#[test]
fn exported_defaults_round_trip_into_a_config() {
    let tmp = TempDir::new().unwrap();
    let out = ncpsi(&["export-defaults"]);
    assert!(out.status.success());
    let defaults = String::from_utf8(out.stdout).unwrap();
    let body = format!(
        "task = \"algebra-check\"\nn = 2\ntruncation = {{ radius = 4, margin = 1 }}\n\
         [output]\nstem = \"x\"\n[params]\ntrials = 2\n[defaults]\n{defaults}"
    );
    let (out, _) = run_config(tmp.path(), "x.toml", &body, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
