use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tetun_ir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tetun-ir"))
        .args(args)
        .env_remove("TETUN_IR_DATA_DIR")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = tetun_ir(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn stem_prints_the_stem() {
    let out = ok(&["stem", "komunikasaun"]);
    assert!(out.contains("komunik"), "{out}");
    let out = ok(&["stem", "--variant", "heavy", "hadame"]);
    assert!(out.contains("dame"), "{out}");
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(tetun_ir(&["stem", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(tetun_ir(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        tetun_ir(&["eval", "--run", "/nonexistent/run.txt", "--qrels", p(&fixture("qrels.txt"))])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bundled_stopwords_are_listed() {
    let out = ok(&["stopwords", "--bundled"]);
    assert!(out.lines().count() > 50);
    assert!(out.lines().any(|l| l.trim() == "no"));
}

#[test]
fn ideal_run_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let qrels = std::fs::read_to_string(fixture("qrels.txt")).unwrap();
    let mut by_topic: BTreeMap<u32, Vec<(u8, String)>> = BTreeMap::new();
    for line in qrels.lines().filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split_whitespace().collect();
        by_topic
            .entry(f[0].parse().unwrap())
            .or_default()
            .push((f[3].parse().unwrap(), f[2].to_string()));
    }
    let mut run = String::new();
    for (topic, mut docs) in by_topic {
        docs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (i, (_, d)) in docs.iter().enumerate() {
            run.push_str(&format!("{topic} Q0 {d} {} {} ideal\n", i + 1, 100 - i));
        }
    }
    let run_path = dir.path().join("ideal.run");
    std::fs::write(&run_path, run).unwrap();
    let out = ok(&["eval", "--run", p(&run_path), "--qrels", p(&fixture("qrels.txt")), "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let metrics: Vec<&str> = v["metrics"].as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
    let means = v["means"].as_array().unwrap();
    for name in ["MAP", "NDCG", "NDCG@5", "NDCG@10"] {
        let i = metrics.iter().position(|m| *m == name).unwrap();
        assert!((means[i].as_f64().unwrap() - 1.0).abs() < 1e-12, "{name}");
    }
}

#[test]
fn index_search_eval_pool_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let idx = dir.path().join("idx");
    let run = dir.path().join("bm25.run");
    let pools = dir.path().join("pools.json");
    ok(&["index", "--documents", p(&fixture("docs.xml")), "--out", p(&idx), "--stem", "light"]);
    assert!(idx.join("manifest.json").exists());
    ok(&["search", "--index", p(&idx), "--topics", p(&fixture("topics.xml")), "-k", "10", "--out", p(&run)]);
    let lines = std::fs::read_to_string(&run).unwrap();
    assert!(lines.lines().count() > 3);
    assert!(lines.lines().all(|l| l.split_whitespace().count() == 6));

    let report = ok(&["eval", "--run", p(&run), "--qrels", p(&fixture("qrels.txt")), "--format", "csv"]);
    assert!(report.lines().next().unwrap().contains("MAP"));

    let single = ok(&["search", "--index", p(&idx), "--query", "kafé Ermera", "--model", "dirichlet_lm", "--mu", "50", "-k", "3"]);
    assert!(single.lines().count() <= 3 && single.contains("tet-"));

    ok(&["pool", "--index", p(&idx), "--topics", p(&fixture("topics.xml")), "--depth", "6", "--out", p(&pools)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&pools).unwrap()).unwrap();
    assert_eq!(v["pools"].as_array().unwrap().len(), 3);
    assert!(v["pools"][0]["docnos"].as_array().unwrap().len() <= 6);
}

#[test]
fn grid_subcommand_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    ok(&["grid", "--config", p(&fixture("grid.toml")), "--out", p(&out), "--workers", "2"]);
    for f in ["grid.csv", "grid.md", "grid.log"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
