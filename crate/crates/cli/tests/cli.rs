use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcheeger"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const K2: &str = "V a\nV b\nE a b 1\n";
const TWO_TRIANGLES: &str = "\
V a\nV b\nV c\nV d\nV e\nV f
E a b 1\nE b c 1\nE a c 1
E d e 1\nE e f 1\nE d f 1
E c d 1
";

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "k2.txt", K2);
    let bad = write(dir.path(), "neg.txt", "V a\nV b\nE a b -1\n");
    assert_eq!(run(&["validate", &good]).status.code(), Some(0));
    let out = run(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = dir.path().join("absent.txt");
    assert_eq!(run(&["validate", missing.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn report_envelope() {
    let v = json(&["validate", "gen:complete:4"]);
    assert_eq!(v["schema"], 1);
    let m = &v["manifest"];
    assert_eq!(m["command"], "validate");
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["seed"], 0);
    assert_eq!(m["inputs"][0], "gen:complete:4");
    assert_eq!(v["result"]["edges"], 6);
}

#[test]
fn k2_bounds_report() {
    let dir = tempfile::tempdir().unwrap();
    let k2 = write(dir.path(), "k2.txt", K2);
    let v = json(&["bounds", &k2, "--p", "2"]);
    let rep = &v["result"][0]["report"];
    assert_eq!(rep["lambda_gap"]["lambda_estimate"], 2.0);
    assert_eq!(rep["all_pass"], true);
    let row = &rep["rows"][0];
    assert_eq!(row["metric"], "degree");
    assert_eq!(row["h1"], 1.0);
    assert_eq!(row["cheeger_lower_gap"], 0.5);
    assert_eq!(row["buser_upper_gap"], 2.0);
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["bounds", "gen:er:8:0.5:2", "--p", "1.5,2"];
    let v = json(&args);
    let out = run(&[&args[..], &["--format", "csv"]].concat());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        let rep = &v["result"][k / 2]["report"];
        let json_lambda = rep["lambda_gap"]["lambda_estimate"].as_f64().unwrap();
        assert_eq!(row[col("lambda_gap")].parse::<f64>().unwrap(), json_lambda);
        let json_h1 = rep["rows"][k % 2]["h1"].as_f64().unwrap();
        assert_eq!(row[col("h1")].parse::<f64>().unwrap(), json_h1);
    }
}

#[test]
fn empty_p_list_is_a_usage_error() {
    assert_eq!(run(&["bounds", "gen:complete:3"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "gen:complete:3", "--p", ""]).status.code(), Some(2));
}

#[test]
fn strict_reports_nonconvergence() {
    let args = ["eigen", "gen:er:10:0.5:4", "--p", "1.5", "--max-iters", "1", "--restarts", "1"];
    let lax = run(&args);
    assert_eq!(lax.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&lax.stdout).unwrap();
    assert_eq!(v["result"]["converged"], false);
    assert_eq!(run(&[&args[..], &["--strict"]].concat()).status.code(), Some(4));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = run(&["metric", "gen:cycle:5", "--output", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["result"]["membership"]["is_member"], true);
}

#[test]
fn partition_two_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tri.txt", TWO_TRIANGLES);
    let v = json(&["partition", &g]);
    let mut parts: Vec<Vec<String>> = v["result"]["parts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect())
        .collect();
    parts.sort();
    assert_eq!(parts, vec![vec!["a", "b", "c"], vec!["d", "e", "f"]]);
}

#[test]
fn partition_k2_and_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let k2 = write(dir.path(), "k2.txt", K2);
    let v = json(&["partition", &k2]);
    assert_eq!(v["result"]["parts"][0].as_array().unwrap().len(), 1);
    let c4 = json(&["partition", "gen:cycle:4"]);
    assert_eq!(c4["result"]["parts"][0].as_array().unwrap().len(), 2);
    assert_eq!(c4["result"]["sweep"]["constant"], 1.0);
}

#[test]
fn partition_of_disconnected_graph_uses_components() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "two.txt", "V a\nV b\nV c\nV d\nE a b 1\nE c d 1\n");
    let v = json(&["partition", &g]);
    assert_eq!(v["result"]["disconnected"], true);
    assert_eq!(v["result"]["parts"][0], serde_json::json!(["a", "b"]));
}

#[test]
fn cheeger_dirichlet_needs_an_interior() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "p4.txt", "V a\nV b\nV c\nV d\nE a b 1\nE b c 1\nE c d 1\n");
    assert_eq!(run(&["cheeger", &g, "--variant", "h0"]).status.code(), Some(2));
    let interior = write(dir.path(), "int.txt", "# inner vertices\nb c\n");
    let v = json(&[
        "cheeger",
        &g,
        "--variant",
        "h0",
        "--interior",
        &format!("file:{interior}"),
        "--metric",
        "const:1",
    ]);
    // {b, c} has two boundary edges and measure 2
    assert_eq!(v["result"]["constant"], 1.0);
    assert_eq!(v["result"]["witness"], serde_json::json!(["b", "c"]));
}

#[test]
fn cheeger_modes() {
    let exact = json(&["cheeger", "gen:cycle:6", "--metric", "const:1", "--mode", "exact"]);
    assert_eq!(exact["result"]["constant"].as_f64().unwrap(), 2.0 / 3.0);
    let sweep = json(&["cheeger", "gen:cycle:6", "--metric", "const:1", "--mode", "sweep"]);
    assert_eq!(sweep["result"]["upper_bound_only"], true);
    assert!(sweep["result"]["constant"].as_f64().unwrap() >= 2.0 / 3.0 - 1e-12);
    let over = run(&["cheeger", "gen:cycle:6", "--mode", "exact", "--max-exact-n", "4"]);
    assert_eq!(over.status.code(), Some(2));
}

#[test]
fn cheeger_sweep_with_a_function_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "F 0 0\nF 1 1\nF 2 2\nF 3 3\n");
    let v = json(&[
        "cheeger",
        "gen:path:4",
        "--metric",
        "const:1",
        "--mode",
        "sweep",
        "--function",
        &format!("file:{f}"),
    ]);
    assert_eq!(v["result"]["constant"], 0.5);
}

#[test]
fn eigen_reports_bracket_and_oracle() {
    let v = json(&["eigen", "gen:cycle:5", "--p", "2"]);
    let r = &v["result"];
    let lam = r["lambda_estimate"].as_f64().unwrap();
    assert!((lam - r["linear_oracle"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(r["bracket"]["contains"], true);
    assert_eq!(r["label"], "upper bound");
    assert_eq!(r["minimizer"].as_array().unwrap().len(), 5);
}

#[test]
fn eigen_ground_on_generated_tree_uses_its_interior() {
    let v = json(&["eigen", "gen:tree:2:3", "--variant", "ground", "--measure", "normalizing"]);
    let r = &v["result"];
    assert!((r["lambda_estimate"].as_f64().unwrap() - r["linear_oracle"].as_f64().unwrap()).abs() < 1e-9);
    assert!(r["minimizer"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x["value"].as_f64().unwrap() >= 0.0));
}

#[test]
fn metric_file_and_closure() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "tri.txt", "V a\nV b\nV c\nE a b 1\nE b c 1\nE a c 1\n");
    let d = write(dir.path(), "d.txt", "D a b 0.1\nD b c 0.1\nD a c 0.5\n");
    let v = json(&["metric", &g, "--metric", &format!("file:{d}"), "--path-closure"]);
    let lengths = v["result"]["lengths"].as_array().unwrap();
    let ac = lengths.iter().find(|l| l["u"] == "a" && l["v"] == "c").unwrap();
    assert_eq!(ac["length"], 0.2);
}

#[test]
fn sweep_rows_follow_the_grid() {
    let v = json(&["sweep", "gen:complete:4", "--p-grid", "2,1.5"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["contained"] == true));
    assert_eq!(run(&["sweep", "gen:complete:4", "--p-grid", "1.5,2"]).status.code(), Some(2));
}

#[test]
fn brooks_tree_csv() {
    let out = run(&["brooks", "--family", "tree:3", "--radii", "4,6", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("radius,interior_size,lambda_ground"));
}

#[test]
fn unknown_metric_and_generator_are_invalid() {
    assert_eq!(run(&["metric", "gen:complete:3", "--metric", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "gen:nothing:3"]).status.code(), Some(2));
}
