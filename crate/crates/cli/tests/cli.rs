mod common;

use common::*;
use serde_json::{json, Value};
use std::path::Path;
use tempfile::tempdir;

fn small_run(dir: &Path, extra: Value) -> std::path::PathBuf {
    let mut cfg = json!({
        "master_seed": 11,
        "data": {"synthetic": {"users": 150, "drugs": 20, "user_clusters": 3, "preferred_per_cluster": 3}},
        "pipeline": {"training": {"epochs": 300}},
    });
    if let (Some(base), Some(more)) = (cfg.as_object_mut(), extra.as_object()) {
        for (k, v) in more {
            base.insert(k.clone(), v.clone());
        }
    }
    let path = dir.join("run.json");
    write_json(&path, &cfg);
    path
}

fn patient(dir: &Path, value: Value) -> String {
    let p = dir.join(format!("patient{}.json", value.to_string().len()));
    write_json(&p, &value);
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_ingest_reports_no_errors() {
    let t = tempdir().unwrap();
    let data = t.path().join("data");
    let o = pharmarec(&["synth", "--out", s(&data), "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg = t.path().join("run.json");
    write_json(&cfg, &json!({"data": {"files": {"dir": "data"}}}));
    let o = pharmarec(&["ingest", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["ok"], json!(true));
    assert_eq!(report["errors"], json!([]));
    assert_eq!(report["row_counts"]["ratings.csv"], json!(2000));
}

#[test]
fn ingest_names_unknown_drugs_and_missing_files() {
    let t = tempdir().unwrap();
    let data = t.path().join("data");
    assert_eq!(pharmarec(&["synth", "--out", s(&data)]).status.code(), Some(0));
    let ratings = data.join("ratings.csv");
    let text = std::fs::read_to_string(&ratings).unwrap().replacen("Drug0", "Mystery0", 1);
    std::fs::write(&ratings, text).unwrap();
    let cfg = t.path().join("run.json");
    write_json(&cfg, &json!({"data": {"files": {"dir": "data"}}}));
    let report_path = t.path().join("report.json");
    let o = pharmarec(&["ingest", "--config", s(&cfg), "--report", s(&report_path)]);
    assert_eq!(o.status.code(), Some(1));
    let report = std::fs::read_to_string(&report_path).unwrap();
    assert!(report.contains("Mystery0"), "{report}");

    std::fs::remove_file(data.join("drugs.csv")).unwrap();
    let o = pharmarec(&["ingest", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("drugs.csv"), "{}", stderr(&o));
}

#[test]
fn train_is_reproducible_and_manifest_covers_every_file() {
    let t = tempdir().unwrap();
    let cfg = small_run(t.path(), json!({}));
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    for out in [&a, &b] {
        let o = pharmarec(&["train", "--config", s(&cfg), "--out", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = pharmarec(&["evaluate", "--artifacts", s(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (ca, cb) = (dir_contents(&a), dir_contents(&b));
    assert_eq!(ca, cb);
    let manifest: Value = serde_json::from_slice(&ca["manifest.json"]).unwrap();
    let listed: Vec<&String> = manifest["files"].as_object().unwrap().keys().collect();
    let present: Vec<&String> = ca.keys().filter(|k| *k != "manifest.json").collect();
    assert_eq!(listed, present);
    for name in ["vocabulary.json", "user_clusters.json", "drug_clusters.json", "factorization.json", "rules.json", "loss_trace.csv", "metrics.json", "metrics.csv", "roc.csv"] {
        assert!(ca.contains_key(name), "{name}");
    }
    assert_eq!(manifest["master_seed"], json!(11));
    assert_eq!(manifest["seeds"].as_object().unwrap().len(), 8);

    // Retraining into the same directory drops the old evaluation outputs.
    let o = pharmarec(&["train", "--config", s(&cfg), "--out", s(&a), "--seed", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!a.join("metrics.json").exists());
}

#[test]
fn zero_learning_rate_gives_a_flat_loss_trace() {
    let t = tempdir().unwrap();
    let cfg = small_run(t.path(), json!({"pipeline": {"training": {"learning_rate": 0.0, "epochs": 20}}}));
    let out = t.path().join("a");
    let o = pharmarec(&["train", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = std::fs::read_to_string(out.join("loss_trace.csv")).unwrap();
    let losses: Vec<&str> = trace.lines().skip(1).map(|l| l.split_once(',').unwrap().1).collect();
    assert_eq!(losses.len(), 21);
    assert!(losses.iter().all(|l| *l == losses[0]));
}

#[test]
fn evaluate_report_matches_the_schema() {
    let t = tempdir().unwrap();
    let cfg = small_run(t.path(), json!({}));
    let out = t.path().join("a");
    assert_eq!(pharmarec(&["train", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let o = pharmarec(&["evaluate", "--artifacts", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap();
    let schema: Value =
        serde_json::from_str(include_str!("../schemas/metrics.schema.json")).unwrap();
    assert_eq!(schema_errors(&schema, &report), Vec::<String>::new());
    assert!(report["adverse"]["with_kb"].is_object());
    assert!(report["adverse"]["without_kb"].is_object());
    assert_eq!(report["baseline"]["name"], json!("baseline_mf"));

    let mut broken = report.clone();
    broken["proposed"]["accuracy"] = json!(1.5);
    broken["baseline"].as_object_mut().unwrap().remove("mcc");
    assert_eq!(schema_errors(&schema, &broken).len(), 2);

    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(csv.contains("proposed,accuracy,") && csv.contains("baseline_mf,accuracy,"));

    std::fs::remove_file(out.join("factorization.json")).unwrap();
    let o = pharmarec(&["evaluate", "--artifacts", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("factorization.json"));
}

#[test]
fn recommend_filters_explain_and_validates_input() {
    let t = tempdir().unwrap();
    let cfg = small_run(t.path(), json!({}));
    let out = t.path().join("a");
    assert_eq!(pharmarec(&["train", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(0));
    let p = patient(t.path(), json!({"age": 40, "gender": "male", "condition_text": "high blood pressure", "current_drugs": ["Drug002"]}));
    let run = |n: &str, extra: &[&str]| -> Value {
        let mut args = vec!["recommend", "--artifacts", s(&out), "--patient", &p, "--format", "json", "-n", n];
        args.extend_from_slice(extra);
        let o = pharmarec(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        serde_json::from_str(&stdout(&o)).unwrap()
    };
    let names = |v: &Value| -> Vec<String> {
        v["recommendations"].as_array().unwrap().iter().map(|r| r["drug_name"].as_str().unwrap().to_string()).collect()
    };
    let filtered = names(&run("50", &[]));
    let unfiltered = names(&run("50", &["--no-kb"]));
    assert_eq!(unfiltered.len(), 19);
    assert!(!unfiltered.contains(&"Drug002".to_string()));
    let mut rest = unfiltered.iter();
    for f in &filtered {
        assert!(rest.any(|u| u == f), "filtered list is not a subsequence");
    }

    let one = run("1", &[]);
    assert_eq!(names(&one), filtered[..1].to_vec());

    let bad = patient(t.path(), json!({"age": "old", "gender": "male"}));
    let o = pharmarec(&["recommend", "--artifacts", s(&out), "--patient", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let neg = patient(t.path(), json!({"age": -3, "gender": "female"}));
    let o = pharmarec(&["recommend", "--artifacts", s(&out), "--patient", &neg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn planted_gender_rule_removes_the_top_drug_with_explanation() {
    let t = tempdir().unwrap();
    let no_age = json!({"rules": {"age_rules": false}, "training": {"epochs": 300}});
    let base = small_run(t.path(), json!({"pipeline": no_age.clone()}));
    let a = t.path().join("a");
    assert_eq!(pharmarec(&["train", "--config", s(&base), "--out", s(&a)]).status.code(), Some(0));
    let p = patient(t.path(), json!({"age": 30, "gender": "female", "condition_text": "migraine"}));
    let o = pharmarec(&["recommend", "--artifacts", s(&a), "--patient", &p, "--format", "json", "--no-kb", "-n", "1"]);
    let top: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let top = top["recommendations"][0]["drug_name"].as_str().unwrap().to_string();

    let planted = t.path().join("planted");
    std::fs::create_dir(&planted).unwrap();
    let cfg = small_run(
        &planted,
        json!({
            "pipeline": no_age,
            "data": {"synthetic": {"users": 150, "drugs": 20, "user_clusters": 3, "preferred_per_cluster": 3,
                "adverse_rates": [{"drug": top, "gender": "female", "rate": 3.0}]}}
        }),
    );
    let b = t.path().join("b");
    assert_eq!(pharmarec(&["train", "--config", s(&cfg), "--out", s(&b)]).status.code(), Some(0));
    let o = pharmarec(&["recommend", "--artifacts", s(&b), "--patient", &p, "--explain", "-n", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    let (listed, removed) = table.split_once("removed by the knowledge base:").expect("explain section");
    assert!(!listed.contains(&format!(" {top} ")), "{table}");
    let line = removed.lines().find(|l| l.contains(&top)).expect("removed entry");
    assert!(line.contains("adverse-event risk") && line.contains("female"), "{line}");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(pharmarec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pharmarec(&["--help"]).status.code(), Some(0));
}
