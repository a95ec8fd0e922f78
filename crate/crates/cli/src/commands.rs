use std::fs;
use std::path::{Path, PathBuf};

use hdcssf::analysis::{
    balanced_tree, chain_tree, correlation_table, cost_model_from_counts, extract_features,
    improvements_by_class_bins, improvements_by_iterations, rows_from_report, verify_cost_model,
    write_correlation_csv, write_rows_csv, FeatureRow, DEFAULT_CLASS_BINS,
};
use hdcssf::eval::cv::{generate_candidates, run_cv};
use hdcssf::eval::f1_macro;
use hdcssf::io::{filter_datasets, load_dataset, write_atomic};
use hdcssf::synthetic::gaussian_levels;
use hdcssf::tree::{format_nested, parse_nested};
use hdcssf::treegen::{count_distinct_trees, count_distinct_trees_single_factor, tree_limit};
use hdcssf::{
    fit_lcpn, predict_lcpn, ClassifierKind, ClassifierSpec, CvConfig, CvReport, Dataset, Error, LcpnModel, Result,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{AnalyzeArgs, BenchArgs, Cli, Command, CvArgs, FilterArgs, FitArgs, PredictArgs, TreeShape, TreesArgs};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Cv(a) => cv(cli, a),
        Command::Fit(a) => fit(cli, a),
        Command::Predict(a) => predict(cli, a),
        Command::Analyze(a) => analyze(cli, a),
        Command::Trees(a) => trees(a),
        Command::Bench(a) => bench(a),
        Command::Filter(a) => filter(cli, a),
    }
}

fn resolve(cli: &Cli, path: &Path) -> PathBuf {
    match &cli.data_dir {
        Some(dir) if !path.exists() && path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Dataset> {
    load_dataset(&resolve(cli, path))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let bytes = json_bytes(value)?;
    match out {
        Some(p) => write_atomic(p, &bytes),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

fn cv(cli: &Cli, a: &CvArgs) -> Result<()> {
    if a.iters.contains(&0) {
        return Err(Error::InvalidConfig("--iters values must be at least 1".into()));
    }
    let data = load(cli, &a.data)?;
    let spec = a.classifier.spec(a.seed);
    spec.validate()?;
    let dataset_id = a.dataset_id.clone().unwrap_or_else(|| stem(&a.data));
    let mut summary = Vec::new();
    for &splitter in &a.splitter {
        for &n_iter in &a.iters {
            for mode in a.mode.modes() {
                let cfg = CvConfig {
                    dataset_id: dataset_id.clone(),
                    classifier: spec.kind.to_string(),
                    splitter,
                    n_iter,
                    n_outer: a.outer,
                    n_inner: a.inner,
                    seed: a.seed,
                };
                let report = run_cv(&data, &spec, &cfg, mode)?;
                let base = format!("{dataset_id}_{mode}_{}_{splitter}_n{n_iter}_s{}", spec.kind, a.seed);
                let json_path = a.out.join(format!("{base}.json"));
                write_atomic(&json_path, &json_bytes(&report)?)?;
                let mut csv = Vec::new();
                report.write_csv(&mut csv)?;
                write_atomic(&a.out.join(format!("{base}.csv")), &csv)?;
                summary.push(json!({
                    "report": json_path.display().to_string(),
                    "mode": mode,
                    "splitter": splitter,
                    "n_iter": n_iter,
                    "score": report.score(),
                    "mean_inner_score": report.mean_inner_score,
                    "mean_fc_score": report.mean_fc_score,
                    "mean_delta_g": report.mean_delta_g,
                }));
            }
        }
    }
    emit(&summary, None)
}

const FIT_FORMAT: &str = "hdcssf-fit";

#[derive(Serialize, Deserialize)]
struct FitArtifact {
    format: String,
    version: u32,
    label_names: Vec<String>,
    series_len: usize,
    classifier: ClassifierSpec,
    tree: String,
    model: Value,
}

fn fit(cli: &Cli, a: &FitArgs) -> Result<()> {
    let data = load(cli, &a.data)?;
    let spec = a.classifier.spec(a.seed);
    spec.validate()?;
    let tree = match &a.tree {
        Some(text) => parse_nested(text)?,
        None => {
            let cfg = CvConfig {
                splitter: a.splitter,
                n_iter: 1,
                n_inner: a.inner,
                seed: a.seed,
                ..CvConfig::default()
            };
            let mut cands = generate_candidates(&data, &spec, &cfg, 0)?;
            cands.trees.remove(0).1
        }
    };
    let (model, counters) = fit_lcpn(&tree, &data, &spec)?;
    let artifact = FitArtifact {
        format: FIT_FORMAT.into(),
        version: 1,
        label_names: data.label_names().to_vec(),
        series_len: data.series_len(),
        classifier: spec,
        tree: format_nested(&tree),
        model: serde_json::from_str(&model.to_json()?)?,
    };
    write_atomic(&a.out, &json_bytes(&artifact)?)?;
    emit(
        &json!({
            "model": a.out.display().to_string(),
            "tree": artifact.tree,
            "datapoint_class_units": counters.datapoint_class_units(),
        }),
        None,
    )
}

fn predict(cli: &Cli, a: &PredictArgs) -> Result<()> {
    let artifact: FitArtifact = serde_json::from_str(&fs::read_to_string(&a.model)?)?;
    if artifact.format != FIT_FORMAT || artifact.version != 1 {
        return Err(Error::InvalidConfig(format!("{} is not a fit artifact", a.model.display())));
    }
    let model = LcpnModel::from_json(&artifact.model.to_string())?;
    let data = load(cli, &a.data)?;
    let pred = predict_lcpn(&model, data.values())?;
    let truth: Option<Vec<usize>> = data
        .labels()
        .iter()
        .map(|&l| artifact.label_names.iter().position(|n| n == &data.label_names()[l]))
        .collect();
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "truth", "predicted", "depth"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        for (i, (&p, &d)) in pred.labels.iter().zip(&pred.depths).enumerate() {
            let t = &data.label_names()[data.labels()[i]];
            w.write_record([i.to_string(), t.clone(), artifact.label_names[p].clone(), d.to_string()])
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        write_atomic(out, &bytes)?;
    }
    let f1 = match &truth {
        Some(t) => Some(f1_macro(t, &pred.labels)?),
        None => None,
    };
    emit(
        &json!({"instances": pred.labels.len(), "f1_macro": f1, "mean_depth": pred.mean_depth()}),
        None,
    )
}

fn collect_reports(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn find_dataset(cli: &Cli, id: &str) -> Result<Dataset> {
    let dir = cli
        .data_dir
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--recompute needs --data-dir or HDCSSF_DATA_DIR".into()))?;
    for name in [id.to_string(), format!("{id}.tsv"), format!("{id}.ts"), format!("{id}.csv"), format!("{id}.txt")] {
        let p = dir.join(name);
        if p.exists() {
            return load_dataset(&p);
        }
    }
    Err(Error::InvalidDataset(format!("no dataset '{id}' under {}", dir.display())))
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<()> {
    let mut rows: Vec<FeatureRow> = Vec::new();
    for path in collect_reports(&a.reports)? {
        let text = fs::read_to_string(&path)?;
        let report = match CvReport::from_json(&text) {
            Ok(r) => r,
            Err(_) if a.reports.iter().all(|r| r != &path) => continue,
            Err(e) => return Err(e),
        };
        if a.recompute {
            rows.extend(extract_features(&report, &find_dataset(cli, &report.dataset_id)?)?);
        } else {
            rows.extend(rows_from_report(&report));
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("no cv reports found".into()));
    }
    let nested: Vec<FeatureRow> = rows.iter().filter(|r| r.mode == "nested").cloned().collect();
    let table_rows = if nested.is_empty() { &rows } else { &nested };
    let cells = correlation_table(table_rows);

    let csv_of = |f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        Ok(buf)
    };
    write_atomic(&a.out.join("features.csv"), &csv_of(&|b| write_rows_csv(&rows, b))?)?;
    write_atomic(&a.out.join("table1.csv"), &csv_of(&|b| write_correlation_csv(&cells, b))?)?;
    write_atomic(&a.out.join("correlations.json"), &json_bytes(&cells)?)?;
    let by_iter = improvements_by_iterations(&rows);
    write_atomic(&a.out.join("improvements_by_iterations.csv"), &csv_of(&|b| write_rows_csv(&by_iter, b))?)?;
    let by_class = improvements_by_class_bins(table_rows, &DEFAULT_CLASS_BINS);
    write_atomic(&a.out.join("improvements_by_classes.csv"), &csv_of(&|b| write_rows_csv(&by_class, b))?)?;
    emit(
        &json!({
            "rows": rows.len(),
            "improvements": rows.iter().filter(|r| r.improved).count(),
            "out": a.out.display().to_string(),
        }),
        None,
    )
}

#[derive(Serialize)]
struct TreeCounts {
    classes: usize,
    distinct_trees: u128,
    iteration_limit: u128,
    diagnostics: CountDiagnostics,
}

#[derive(Serialize)]
struct CountDiagnostics {
    single_factor_recurrence: u128,
    agrees: bool,
}

fn trees(a: &TreesArgs) -> Result<()> {
    let n = a.classes;
    let count = count_distinct_trees(n)?;
    let printed = count_distinct_trees_single_factor(n)?;
    emit(
        &TreeCounts {
            classes: n,
            distinct_trees: count,
            iteration_limit: tree_limit(n),
            diagnostics: CountDiagnostics {
                single_factor_recurrence: printed,
                agrees: printed == count,
            },
        },
        None,
    )
}

fn bench(a: &BenchArgs) -> Result<()> {
    let c = a.classes;
    if c < 2 || a.instances < c {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 classes and one instance per class, got {c} classes and {} instances",
            a.instances
        )));
    }
    let tree = match a.tree {
        TreeShape::Chain => chain_tree(c)?,
        TreeShape::Balanced => balanced_tree(c)?,
    };
    let per_class = a.instances / c;
    let counts: Vec<usize> = (0..c).map(|k| per_class + (k < a.instances % c) as usize).collect();
    let estimate = cost_model_from_counts(&tree, &counts, a.iters)?;

    let means: Vec<f64> = (0..c).map(|k| 10.0 * k as f64).collect();
    let data: Dataset = gaussian_levels(&means, per_class.max(1), 1, 0.1, 0)?;
    let uniform = cost_model_from_counts(&tree, &data.class_counts(), a.iters)?;
    let (model, counters) = fit_lcpn(&tree, &data, &ClassifierSpec::linear())?;
    let pred = predict_lcpn(&model, data.values())?;
    let verification = verify_cost_model(&uniform, &counters, pred.mean_depth());

    let regime_sum = match a.tree {
        TreeShape::Chain => json!(estimate.chain_summation),
        TreeShape::Balanced if estimate.balanced_summation.fract() == 0.0 => json!(estimate.balanced_summation as u64),
        TreeShape::Balanced => json!(estimate.balanced_summation),
    };
    emit(
        &json!({
            "tree": format_nested(&tree),
            "classes": c,
            "instances": a.instances,
            "exactDatapointsProcessed": regime_sum,
            "parentSum": estimate.exact_datapoints_processed,
            "estimate": estimate,
            "instrumented": verification,
        }),
        a.out.as_deref(),
    )
}

fn filter(cli: &Cli, a: &FilterArgs) -> Result<()> {
    let paths: Vec<PathBuf> = if a.datasets.is_empty() {
        let dir = cli
            .data_dir
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no datasets given and no --data-dir".into()))?;
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
        entries.sort();
        entries
    } else {
        a.datasets.iter().map(|p| resolve(cli, p)).collect()
    };
    let specs: Vec<ClassifierSpec> = a
        .classifiers
        .iter()
        .map(|k| match k {
            ClassifierKind::Linear => ClassifierSpec::linear(),
            ClassifierKind::KernelRidge => ClassifierSpec::kernel_ridge(a.kernels),
        })
        .collect();
    let outcome = filter_datasets::<f64>(&paths, &specs);
    emit(&outcome, a.out.as_deref())
}
