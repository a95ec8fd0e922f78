use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hdcssf"));
    c.env_remove("HDCSSF_DATA_DIR");
    c
}

fn data_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/masking4.tsv")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn trees_reports_both_counts() {
    let v = json_out(&["trees", "--classes", "6"]);
    assert_eq!(v["distinct_trees"], 945);
    assert_eq!(v["diagnostics"]["single_factor_recurrence"], 885);
}

#[test]
fn bench_figures() {
    let chain = json_out(&["bench", "--tree", "chain", "--classes", "4", "--instances", "96"]);
    assert_eq!(chain["exactDatapointsProcessed"], 950);
    assert_eq!(chain["estimate"]["exact_mean_depth"], 2.25);
    let balanced = json_out(&["bench", "--tree", "balanced", "--classes", "4", "--instances", "96"]);
    assert_eq!(balanced["exactDatapointsProcessed"], 576);
    assert_eq!(balanced["instrumented"]["measured_datapoints"], 576);
    assert_eq!(balanced["instrumented"]["consistent"], true);
}

#[test]
fn cv_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = data_file();
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = tmp.path().join(name);
        let status = run(&[
            "--threads",
            threads,
            "cv",
            "--data",
            data.to_str().unwrap(),
            "--mode",
            "both",
            "--splitter",
            "potr",
            "--iters",
            "10",
            "--seed",
            "0",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        outputs.push(read_dir_bytes(&out));
    }
    assert_eq!(outputs[0].len(), 4);
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let report: Value = serde_json::from_slice(&outputs[0][1].1).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);
}

#[test]
fn fit_then_predict() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.json");
    let preds = tmp.path().join("preds.csv");
    let data = data_file();
    json_out(&["fit", "--data", data.to_str().unwrap(), "--splitter", "lsoo", "--out", model.to_str().unwrap()]);
    let v = json_out(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert_eq!(v["instances"], 120);
    assert!(v["f1_macro"].as_f64().unwrap() > 0.8);
    assert_eq!(fs::read_to_string(preds).unwrap().lines().count(), 121);
}

#[test]
fn analyze_writes_plot_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let reports = tmp.path().join("reports");
    let data = data_file();
    for splitter in ["potr", "lsoo"] {
        json_out(&[
            "cv",
            "--data",
            data.to_str().unwrap(),
            "--splitter",
            splitter,
            "--iters",
            "3,5",
            "--out",
            reports.to_str().unwrap(),
        ]);
    }
    let out = tmp.path().join("analysis");
    let v = json_out(&["analyze", reports.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(v["rows"], 20);
    let table = fs::read_to_string(out.join("table1.csv")).unwrap();
    assert!(table.starts_with("feature,linear/lsoo r,linear/lsoo p,linear/potr r,linear/potr p"));
    let by_iter = fs::read_to_string(out.join("improvements_by_iterations.csv")).unwrap();
    assert_eq!(by_iter.lines().count(), 5);
    let features = fs::read_to_string(out.join("features.csv")).unwrap();
    let lsoo_bfc: Vec<&str> = features
        .lines()
        .filter(|l| l.contains(",lsoo,"))
        .map(|l| l.split(',').nth(8).unwrap())
        .collect();
    assert!(!lsoo_bfc.is_empty() && lsoo_bfc.iter().all(|b| *b == "1.0"));
}

#[test]
fn data_dir_env_resolves_relative_paths() {
    let dir = data_file().parent().unwrap().to_path_buf();
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .env("HDCSSF_DATA_DIR", &dir)
        .args(["filter", "masking4.tsv", "--classifiers", "linear", "--out"])
        .arg(tmp.path().join("f.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&fs::read(tmp.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(v["kept"][0]["dataset"], "masking4");
}

#[test]
fn exit_codes_and_error_records() {
    let data = data_file();
    let out = run(&["cv", "--data", data.to_str().unwrap(), "--iters", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");

    assert_eq!(run(&["cv", "--data", "x", "--splitter", "nope"]).status.code(), Some(2));

    let out = run(&["cv", "--data", "/definitely/missing.tsv"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.tsv"));

    let tmp = tempfile::tempdir().unwrap();
    let ragged = tmp.path().join("r.tsv");
    fs::write(&ragged, "a\t1\t2\nb\t1\n").unwrap();
    let out = run(&["cv", "--data", ragged.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
