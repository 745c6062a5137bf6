use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kgbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgbench")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = kgbench(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, nodes: usize, seed: u64) -> PathBuf {
    let bundle = dir.join(format!("bundle-{nodes}-{seed}"));
    ok(&["gen", "--nodes", &nodes.to_string(), "--seed", &seed.to_string(), "--out", s(&bundle)]);
    bundle
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn faers_bundle_metrics_round_to_published_values() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 14_000, 7);
    let json: Value = serde_json::from_str(&ok(&["metrics", s(&bundle), "--json"])).unwrap();
    let row = &json[0];
    assert_eq!(row["node_count"], 14_000);
    assert_eq!(row["edge_count"], 11_000);
    assert_eq!(format!("{:.2}", row["semantic_richness"].as_f64().unwrap()), "7.91");
    assert_eq!(format!("{:.2}", row["connectivity_density"].as_f64().unwrap()), "0.79");
    let table = ok(&["metrics", s(&bundle), "--scales", "1,8"]);
    assert!(table.lines().next().unwrap().starts_with("Scale"));
    assert!(table.contains("112,000") && table.contains("7.91"));
}

#[test]
fn scale_zero_is_identity_and_scale_three_multiplies() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 300, 1);
    let same = dir.path().join("same");
    ok(&["scale", s(&bundle), "--n", "0", "--out", s(&same)]);
    assert_eq!(tree(&bundle), tree(&same));
    let big = dir.path().join("big");
    ok(&["scale", s(&bundle), "--n", "3", "--out", s(&big)]);
    let json: Value = serde_json::from_str(&ok(&["metrics", s(&big), "--json"])).unwrap();
    assert_eq!(json[0]["node_count"], 2_400);
}

#[test]
fn convert_writes_both_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 200, 2);
    let out = dir.path().join("conv");
    ok(&["convert", s(&bundle), "--out", s(&out)]);
    assert!(out.join("document/nodes/Case.jsonl").is_file());
    assert!(out.join("document/relationships/REGISTERED.jsonl").is_file());
    assert!(out.join("multimodel/vertices/Case.jsonl").is_file());
    assert!(out.join("multimodel/lookup.json").is_file());
}

#[test]
fn bench_manifest_lists_executed_cells_and_existing_files() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 300, 3);
    let out = dir.path().join("bench");
    ok(&[
        "bench", s(&bundle), "--scales", "1", "--runs", "3", "--backends", "oracle,graph", "--out", s(&out),
    ]);
    let manifest = read_json(&out.join("manifest.json"));
    let cells = manifest["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2 * 4 * 2);
    for f in manifest["files"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).is_file(), "{f}");
    }
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + cells.len() * 3);
    let agg = std::fs::read_to_string(out.join("aggregated.csv")).unwrap();
    assert_eq!(agg.lines().count(), 1 + cells.len());
    assert_eq!(manifest["config"]["runs"], 3);
}

#[test]
fn bench_verify_passes_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 500, 4);
    let out = dir.path().join("bench");
    let o = kgbench(&["bench", s(&bundle), "--scales", "1", "--runs", "2", "--verify", "--out", s(&out), "-v"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("match the oracle"));
}

#[test]
fn default_scales_keep_shape_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 100, 5);
    let out = dir.path().join("bench");
    ok(&["bench", s(&bundle), "--runs", "2", "--backends", "graph", "--modes", "hot", "--out", s(&out)]);
    let m = read_json(&out.join("metrics.json"));
    let rows = m.as_array().unwrap();
    assert_eq!(rows.iter().map(|r| r["factor"].as_u64().unwrap()).collect::<Vec<_>>(), vec![1, 8, 128]);
    let base = rows[0]["scale"].as_u64().unwrap();
    for r in rows {
        assert_eq!(r["scale"].as_u64().unwrap(), base * r["factor"].as_u64().unwrap());
        assert_eq!(r["semantic_richness"], rows[0]["semantic_richness"]);
        assert_eq!(r["connectivity_density"], rows[0]["connectivity_density"]);
    }
}

fn strip_columns(csv: &str, drop: &[usize]) -> Vec<String> {
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, c)| c)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[test]
fn same_config_and_seed_reproduce_everything_but_timings() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 200, 6);
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        format!(r#"{{"dataset": {:?}, "scales": [1, 2], "runs": 2, "seed": 11}}"#, s(&bundle)),
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["bench", "--config", s(&config), "--out", s(&a)]);
    ok(&["bench", "--config", s(&config), "--out", s(&b)]);
    let read = |d: &Path, f: &str| std::fs::read_to_string(d.join(f)).unwrap();
    assert_eq!(strip_columns(&read(&a, "runs.csv"), &[5]), strip_columns(&read(&b, "runs.csv"), &[5]));
    assert_eq!(
        strip_columns(&read(&a, "aggregated.csv"), &[5, 6, 7, 8]),
        strip_columns(&read(&b, "aggregated.csv"), &[5, 6, 7, 8])
    );
    assert_eq!(read(&a, "metrics.json"), read(&b, "metrics.json"));
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["cells"], mb["cells"]);
    assert_eq!(ma["files"], mb["files"]);
}

#[test]
fn report_reemission_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 200, 8);
    let out = dir.path().join("bench");
    ok(&["bench", s(&bundle), "--scales", "1", "--runs", "2", "--backends", "graph", "--out", s(&out)]);
    let again = dir.path().join("again");
    ok(&["report", s(&out.join("runs.csv")), "--out", s(&again)]);
    for f in ["aggregated.csv", "environment.json"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
    assert_eq!(tree(&out.join("charts")), tree(&again.join("charts")));
}

#[test]
fn advise_reads_metrics_json() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path(), 14_000, 7);
    let metrics = dir.path().join("metrics.json");
    ok(&["metrics", s(&bundle), "--out", s(&metrics)]);
    let text = ok(&["advise", s(&metrics), "--tier-weights", "0,0,0,1"]);
    assert!(text.contains("1. graph"), "{text}");
    let rec: Value = serde_json::from_str(&ok(&["advise", s(&metrics), "--tier-weights", "1,0,0,0", "--json"])).unwrap();
    assert_eq!(rec["ranking"][0], "document");
    let rec: Value = serde_json::from_str(&ok(&["advise", s(&metrics), "--tier-weights", "0.1,0.6,0.2,0.1", "--json"])).unwrap();
    assert_eq!(rec["ranking"][0], "multimodel");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    assert_eq!(kgbench(&["bench", s(&missing), "--out", s(dir.path())]).status.code(), Some(1));
    assert_eq!(kgbench(&["bench", "--out", s(dir.path())]).status.code(), Some(1));
    assert_eq!(kgbench(&["frobnicate"]).status.code(), Some(1));
    let bundle = gen(dir.path(), 100, 9);
    let out = s(dir.path()).to_owned() + "/o";
    assert_eq!(kgbench(&["bench", s(&bundle), "--scales", "3", "--out", &out]).status.code(), Some(1));
    assert_eq!(kgbench(&["bench", s(&bundle), "--runs", "1", "--out", &out]).status.code(), Some(1));
    assert_eq!(
        kgbench(&["bench", s(&bundle), "--workload", s(&missing), "--out", &out]).status.code(),
        Some(1)
    );
    assert_eq!(kgbench(&["advise", s(&missing), "--tier-weights", "1,1,1,1"]).status.code(), Some(1));

    let broken = dir.path().join("broken");
    std::fs::create_dir_all(broken.join("nodes")).unwrap();
    std::fs::write(broken.join("nodes/Case.csv"), "not,a,header\n").unwrap();
    assert_eq!(kgbench(&["metrics", s(&broken)]).status.code(), Some(2));
    let bad_metrics = dir.path().join("bad.json");
    std::fs::write(&bad_metrics, "{").unwrap();
    assert_eq!(kgbench(&["advise", s(&bad_metrics), "--tier-weights", "1,0,0,0"]).status.code(), Some(2));
}
