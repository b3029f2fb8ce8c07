use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn wavekin(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavekin"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn algorithm_on_the_ladder_gives_the_reference_tree() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["algorithm", "--molecule", &data("ladder2.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = read_json(dir.path().join("operation_tree.json"));
    assert_eq!(t["counts"], json!({"m0": 2, "m1": 3, "m2": 6, "m3": 3, "m4": 0}));
    assert_eq!(t["treeLabels"]["1"], json!(["3_1", "0_2", "6_3", "3_4", "5_5", "1_6"]));
    assert_eq!(t["treeLabels"]["3"], json!(["1_0", "0_1", "6_2", "3_3", "5_4", "1_5"]));
    for n in ["2", "6", "7"] {
        assert_eq!(t["treeLabels"][n], json!(["1_0", "9_1"]));
    }
    assert_eq!(t["phi"]["missed"].as_array().unwrap().len(), 3);
    assert_eq!(t["identities"]["saturated"], json!(true));
    assert_eq!(t["schemaVersion"], json!(1));
    let m = read_json(dir.path().join("manifest.json"));
    assert_eq!(m["command"], json!("algorithm"));
    assert_eq!(m["outputs"], json!(["operation_tree.json", "trace.csv"]));
    assert_eq!(m["toolVersion"], json!(env!("CARGO_PKG_VERSION")));
}

#[test]
fn unspliced_double_bond_chain_is_a_violation() {
    let dir = TempDir::new().unwrap();
    // four atoms joined by three double bonds and closed by one bond
    let bonds: Vec<Value> = [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (0, 3)]
        .iter()
        .enumerate()
        .map(|(i, (a, b))| json!({"id": i, "from": a, "to": b, "label": "LP"}))
        .collect();
    let atoms: Vec<Value> = (1..=4).map(|i| json!({"id": i})).collect();
    let path = dir.path().join("chain.json");
    std::fs::write(&path, json!({"atoms": atoms, "bonds": bonds}).to_string()).unwrap();
    let o = wavekin(dir.path(), &["algorithm", "--molecule", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("trace.csv"), "{}", stderr(&o));
    let m = read_json(dir.path().join("manifest.json"));
    assert!(m["status"].as_str().unwrap().starts_with("violation"));
}

#[test]
fn strict_assumptions_and_bad_flags_are_not_violations() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["algorithm", "--fixture", "ladder:2", "--tie-break", "sideways"]);
    assert_eq!(code(&o), 1);
    let o = wavekin(dir.path(), &["verify", "--suite", "identities", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    let o = wavekin(dir.path(), &["algorithm", "--molecule", "/nonexistent/m.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn identity_suite_writes_one_row_per_check() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["verify", "--suite", "identities", "--max-order", "4", "--policies", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("identities.csv")).unwrap();
    assert!(csv.starts_with("molecule,n,m3,m2,m0,m1,m4,check,lhs,rhs,holds\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(csv.lines().count() > 20);
    let j = read_json(dir.path().join("identities.json"));
    assert_eq!(j["sweep"]["pass"], json!(true));
}

#[test]
fn enumerate_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["enumerate", "--order", "3", "--list"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("enumerate.csv")).unwrap();
    assert_eq!(csv, "order,couples,expected\n0,1,1\n1,4,4\n2,42,42\n3,720,720\n");
    let lines = std::fs::read_to_string(dir.path().join("couples.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 720);
}

fn sim_config(dir: &Path, l: i64, members: usize) -> PathBuf {
    let p = dir.join(format!("sim{l}.toml"));
    let body = format!(
        "L = {l}\nalpha = 0.2\nT = 2.0\nsigma = 2.0\ncutoff = 1.5\nmembers = {members}\nseedBase = 7\ntimes = [0.5, 1.0]\n"
    );
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn simulate_rejects_an_empty_ensemble() {
    let dir = TempDir::new().unwrap();
    let cfg = sim_config(dir.path(), 4, 0);
    let o = wavekin(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("members"), "{}", stderr(&o));
    std::fs::write(dir.path().join("bad.toml"), "L = 4\nbogus = 1\n").unwrap();
    let o = wavekin(dir.path(), &["simulate", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulation_artifacts_are_reproducible_and_aggregate() {
    let root = TempDir::new().unwrap();
    let mut residuals = Vec::new();
    for l in [4, 8] {
        let cfg = sim_config(root.path(), l, 40);
        let a = root.path().join(format!("a{l}"));
        let b = root.path().join(format!("b{l}"));
        for d in [&a, &b] {
            let o = wavekin(d, &["--jobs", "1", "simulate", "--config", cfg.to_str().unwrap()]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
        }
        for f in ["stats.csv", "residuals.csv"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
        let m = read_json(a.join("manifest.json"));
        assert_eq!(m["seeds"].as_array().unwrap().len(), 40);
        assert_eq!(m["seeds"][0], json!(7));
        assert_eq!(m["config"]["epsilon"], json!(0.05));
        residuals.push(a.join("residuals.csv"));
    }
    let out = root.path().join("report");
    let args: Vec<&str> = ["report"].into_iter().chain(residuals.iter().map(|p| p.to_str().unwrap())).collect();
    let o = wavekin(&out, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = read_json(out.join("summary.json"));
    let trend = s["tables"]["residualTrend"].as_object().unwrap();
    assert!(trend.keys().any(|k| k.ends_with("L=4")) && trend.keys().any(|k| k.ends_with("L=8")));
    assert!(s["checks"].as_array().unwrap().iter().any(|c| c["name"].as_str().unwrap().contains("decreasing")));
}

#[test]
fn empty_report_is_an_empty_summary() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["report"]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("summary.csv")).unwrap(), "table,key,metric,value\n");
}

#[test]
fn schema_mismatch_names_the_column() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("k.csv");
    std::fs::write(&p, "xi,valu\n0,1\n").unwrap();
    let o = wavekin(dir.path(), &["report", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("`value`"), "{}", stderr(&o));
    std::fs::write(&p, "xi,value\n0,abc\n").unwrap();
    let o = wavekin(dir.path(), &["report", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("column `value`"), "{}", stderr(&o));
}

#[test]
fn kernel_and_k2_tables() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["kernel", "--sigma", "1.5", "--xi-grid", "-1:1:0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")), "{csv}");
    let o = wavekin(dir.path(), &["k2", "--L", "8", "--sigma", "2", "--gamma", "0.6", "--k-grid", "0:1:0.125"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = wavekin(dir.path(), &["k2", "--L", "8", "--sigma", "2", "--gamma", "0.6", "--k-grid", "0:1:0.1"]);
    assert_eq!(code(&o), 1);
    let o = wavekin(dir.path(), &["report", dir.path().join("kernel.csv").to_str().unwrap(), dir.path().join("k2.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn count_and_twist_checks() {
    let dir = TempDir::new().unwrap();
    let o = wavekin(dir.path(), &["count", "--tuple", "1+,2-", "--L", "16", "--T", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(dir.path().join("count.json"))["count"], json!(33));
    let o = wavekin(dir.path(), &["splice", "--twist-sum-samples", "20", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = wavekin(dir.path(), &["splice", "--fixture", "irregular:3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(dir.path().join("spliced.json"))["outputOrder"], json!(2));
}
