//! Dataset features against hierarchical gain, Pearson tests, improvement
//! counts and the datapoint/depth cost model.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::TimeSeriesDataset;
use crate::error::{Error, Result};
use crate::eval::cv::CvReport;
use crate::eval::folds::split_data;
use crate::lcpn::FitCounters;
use crate::scalar::Scalar;
use crate::tree::{bfc, bfd_from_counts, parse_nested, HierarchyTree};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub n: usize,
    pub r: f64,
    /// Two-sided.
    pub p: f64,
}

/// Sample correlation with a two-sided t-test on `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("{} x values against {} y values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 pairs, got {n}")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("an input is constant".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation { n, r, p: p_value(r, n) })
}

/// Two-sided p of a correlation `r` over `n` pairs.
pub fn p_value(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r.abs() * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t)).min(1.0)
}

/// One outer fold seen as an observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub dataset_id: String,
    pub classifier: String,
    pub splitter: String,
    pub mode: String,
    pub n_iter: usize,
    pub fold_id: usize,
    pub num_classes: usize,
    pub fc_score: f64,
    pub bfc: f64,
    pub bfd: f64,
    pub delta_g: f64,
    pub improved: bool,
}

/// Rows for every fold of `report`, with balance recomputed from the
/// selected tree and the fold's training distribution in `data`.
pub fn extract_features<T: Scalar>(report: &CvReport, data: &TimeSeriesDataset<T>) -> Result<Vec<FeatureRow>> {
    if data.num_classes() != report.num_classes {
        return Err(Error::LabelSpaceMismatch(format!(
            "report over {} classes, dataset with {}",
            report.num_classes,
            data.num_classes()
        )));
    }
    let plan = split_data(data, report.n_outer, false, report.seed)?;
    report
        .folds
        .iter()
        .map(|f| {
            let tree = parse_nested(&f.selected_tree)?;
            let train = plan.train_indices(f.fold);
            let mut counts = vec![0; data.num_classes()];
            for &i in &train {
                counts[data.labels()[i]] += 1;
            }
            let delta_g = f.outer_test_score - f.fc_score;
            Ok(FeatureRow {
                dataset_id: report.dataset_id.clone(),
                classifier: report.classifier.clone(),
                splitter: report.splitter.to_string(),
                mode: report.mode.to_string(),
                n_iter: report.n_iter,
                fold_id: f.fold,
                num_classes: report.num_classes,
                fc_score: f.fc_score,
                bfc: bfc(&tree),
                bfd: bfd_from_counts(&tree, &counts)?,
                delta_g,
                improved: delta_g > 0.0,
            })
        })
        .collect()
}

/// Rows straight from the balance figures stored in `report`.
pub fn rows_from_report(report: &CvReport) -> Vec<FeatureRow> {
    report
        .folds
        .iter()
        .map(|f| FeatureRow {
            dataset_id: report.dataset_id.clone(),
            classifier: report.classifier.clone(),
            splitter: report.splitter.to_string(),
            mode: report.mode.to_string(),
            n_iter: report.n_iter,
            fold_id: f.fold,
            num_classes: report.num_classes,
            fc_score: f.fc_score,
            bfc: f.bfc,
            bfd: f.bfd,
            delta_g: f.delta_g,
            improved: f.delta_g > 0.0,
        })
        .collect()
}

pub fn improvement_count(rows: &[FeatureRow]) -> usize {
    rows.iter().filter(|r| r.improved).count()
}

pub const FEATURES: [&str; 4] = ["num_classes", "fc_score", "bfc", "bfd"];

fn feature(row: &FeatureRow, name: &str) -> f64 {
    match name {
        "num_classes" => row.num_classes as f64,
        "fc_score" => row.fc_score,
        "bfc" => row.bfc,
        _ => row.bfd,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub classifier: String,
    pub splitter: String,
    pub feature: String,
    pub n: usize,
    /// `None` when the feature is constant in the group.
    pub r: Option<f64>,
    pub p: Option<f64>,
}

/// Each feature against `delta_g`, per classifier and splitter.
pub fn correlation_table(rows: &[FeatureRow]) -> Vec<CorrelationCell> {
    let mut groups: BTreeMap<(String, String), Vec<&FeatureRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.classifier.clone(), r.splitter.clone())).or_default().push(r);
    }
    let mut cells = Vec::new();
    for ((classifier, splitter), group) in groups {
        let dg: Vec<f64> = group.iter().map(|r| r.delta_g).collect();
        for name in FEATURES {
            let xs: Vec<f64> = group.iter().map(|r| feature(r, name)).collect();
            let c = pearson(&xs, &dg).ok();
            cells.push(CorrelationCell {
                classifier: classifier.clone(),
                splitter: splitter.clone(),
                feature: name.into(),
                n: group.len(),
                r: c.map(|c| c.r),
                p: c.map(|c| c.p),
            });
        }
    }
    cells
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Feature per row, an `r` and a `p` column per classifier/splitter pair,
/// three decimals; blank where undefined.
pub fn write_correlation_csv<W: Write>(cells: &[CorrelationCell], out: W) -> Result<()> {
    let mut groups: Vec<(String, String)> = Vec::new();
    for c in cells {
        let g = (c.classifier.clone(), c.splitter.clone());
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["feature".to_string()];
    for (c, s) in &groups {
        header.push(format!("{c}/{s} r"));
        header.push(format!("{c}/{s} p"));
    }
    w.write_record(&header).map_err(csv_err)?;
    let fmt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.3}"));
    for name in FEATURES {
        let mut record = vec![name.to_string()];
        for (c, s) in &groups {
            let cell = cells
                .iter()
                .find(|x| &x.classifier == c && &x.splitter == s && x.feature == name);
            record.push(fmt(cell.and_then(|x| x.r)));
            record.push(fmt(cell.and_then(|x| x.p)));
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub classifier: String,
    pub splitter: String,
    pub mode: String,
    /// Iteration count, or the class-count bin label.
    pub key: String,
    pub improvements: usize,
    pub observations: usize,
}

type TallyKey = (String, String, String, usize, String);

fn tally(rows: &[FeatureRow], key: impl Fn(&FeatureRow) -> (usize, String)) -> Vec<ImprovementRow> {
    let mut acc: BTreeMap<TallyKey, (usize, usize)> = BTreeMap::new();
    for r in rows {
        let (order, label) = key(r);
        let e = acc
            .entry((r.classifier.clone(), r.splitter.clone(), r.mode.clone(), order, label))
            .or_default();
        e.0 += r.improved as usize;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|((classifier, splitter, mode, _, key), (improvements, observations))| ImprovementRow {
            classifier,
            splitter,
            mode,
            key,
            improvements,
            observations,
        })
        .collect()
}

/// Improvements per iteration count.
pub fn improvements_by_iterations(rows: &[FeatureRow]) -> Vec<ImprovementRow> {
    tally(rows, |r| (r.n_iter, r.n_iter.to_string()))
}

/// Default class-count bin starts: 3, 4, 5, 6-7, 8-10, 11+.
pub const DEFAULT_CLASS_BINS: [usize; 6] = [3, 4, 5, 6, 8, 11];

/// Improvements per class-count bin; `starts` are ascending lower edges.
pub fn improvements_by_class_bins(rows: &[FeatureRow], starts: &[usize]) -> Vec<ImprovementRow> {
    tally(rows, |r| {
        let i = starts.iter().rposition(|&s| r.num_classes >= s).unwrap_or(0);
        let lo = starts.get(i).copied().unwrap_or(0);
        let label = match starts.get(i + 1) {
            Some(&next) if next - 1 == lo => lo.to_string(),
            Some(&next) => format!("{lo}-{}", next - 1),
            None => format!("{lo}+"),
        };
        (i, label)
    })
}

pub fn write_rows_csv<W: Write, S: Serialize>(rows: &[S], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Analytic and exact datapoint and depth figures for one tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub num_classes: usize,
    pub num_instances: usize,
    pub n_iter: usize,
    /// Σ over parents of instances × classes under the parent.
    pub exact_datapoints_processed: u64,
    pub per_parent: Vec<u64>,
    /// `|X||C| Σ_k 2^-k` over the levels of a perfectly balanced tree.
    pub balanced_summation: f64,
    /// `Σ_k (|X|-k)(|C|-k)`: a chain dropping one point per split.
    pub chain_summation: u64,
    /// The chain sum's printed closed form, kept for comparison.
    pub chain_closed_form_printed: f64,
    /// `2|X||C|`.
    pub lower_bound_balanced: f64,
    /// `|X||C|²/2`.
    pub upper_bound_chain: f64,
    pub preprocessing_lower: f64,
    pub preprocessing_upper: f64,
    /// Class-weighted mean number of decisions to reach a leaf.
    pub exact_mean_depth: f64,
    /// `log2|C|`.
    pub depth_lower_log: f64,
    /// `|C|/2`.
    pub depth_upper_half_c: f64,
    /// `|C|/2 + 1/2 - 1/|C|`, a uniform chain.
    pub chain_mean_depth: f64,
    /// `|C|/2 - 1/|C| - 5/2` as printed.
    pub chain_mean_depth_printed: f64,
}

fn classes_under(tree: &HierarchyTree, counts: &[usize]) -> Vec<u64> {
    tree.parents()
        .iter()
        .map(|p| {
            let n: usize = p.classes().iter().map(|c| counts[c]).sum();
            (n * p.num_classes()) as u64
        })
        .collect()
}

pub fn cost_model_from_counts(tree: &HierarchyTree, counts: &[usize], n_iter: usize) -> Result<CostEstimate> {
    if counts.len() != tree.num_classes() {
        return Err(Error::LabelSpaceMismatch(format!(
            "{} class counts for a tree over {} classes",
            counts.len(),
            tree.num_classes()
        )));
    }
    let c = tree.num_classes();
    let x: usize = counts.iter().sum();
    let (cf, xf) = (c as f64, x as f64);
    let per_parent = classes_under(tree, counts);
    let levels = cf.log2().ceil() as i32;
    let depths = tree.leaf_depths();
    let weighted: usize = (0..c).map(|k| counts[k] * depths[&k]).sum();
    let lower = 2.0 * xf * cf;
    let upper = xf * cf * cf / 2.0;
    Ok(CostEstimate {
        num_classes: c,
        num_instances: x,
        n_iter,
        exact_datapoints_processed: per_parent.iter().sum(),
        per_parent,
        balanced_summation: xf * cf * (0..levels).map(|k| 2f64.powi(-k)).sum::<f64>(),
        chain_summation: (0..c).map(|k| (x.saturating_sub(k) * (c - k)) as u64).sum(),
        chain_closed_form_printed: (3.0 * xf * cf * cf - 3.0 * xf * cf - cf.powi(3) + cf) / 6.0,
        lower_bound_balanced: lower,
        upper_bound_chain: upper,
        preprocessing_lower: n_iter as f64 * lower,
        preprocessing_upper: n_iter as f64 * upper,
        exact_mean_depth: weighted as f64 / xf,
        depth_lower_log: cf.log2(),
        depth_upper_half_c: cf / 2.0,
        chain_mean_depth: cf / 2.0 + 0.5 - 1.0 / cf,
        chain_mean_depth_printed: cf / 2.0 - 1.0 / cf - 2.5,
    })
}

pub fn cost_model<T: Scalar>(tree: &HierarchyTree, data: &TimeSeriesDataset<T>, n_iter: usize) -> Result<CostEstimate> {
    cost_model_from_counts(tree, &data.class_counts(), n_iter)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostVerification {
    pub expected_datapoints: u64,
    pub measured_datapoints: u64,
    /// Parents whose measured load differs from the analytic one.
    pub mismatched_parents: Vec<usize>,
    pub expected_mean_depth: f64,
    pub measured_mean_depth: f64,
    pub depth_error: f64,
    /// Measured depth inside `[log2|C|, |C|/2 + 1]`.
    pub depth_within_band: bool,
    pub consistent: bool,
}

/// Compares instrumented counters from a fit and a prediction run against
/// the analytic figures.
pub fn verify_cost_model(estimate: &CostEstimate, counters: &FitCounters, measured_mean_depth: f64) -> CostVerification {
    let mismatched_parents: Vec<usize> = counters
        .nodes
        .iter()
        .filter(|n| estimate.per_parent.get(n.parent) != Some(&((n.instances * n.classes) as u64)))
        .map(|n| n.parent)
        .collect();
    let measured = counters.datapoint_class_units();
    let depth_error = (measured_mean_depth - estimate.exact_mean_depth).abs();
    let tol = 1e-9;
    let depth_within_band = measured_mean_depth >= estimate.depth_lower_log - tol
        && measured_mean_depth <= estimate.depth_upper_half_c + 1.0 + tol;
    CostVerification {
        expected_datapoints: estimate.exact_datapoints_processed,
        measured_datapoints: measured,
        consistent: mismatched_parents.is_empty()
            && measured == estimate.exact_datapoints_processed
            && depth_error <= 1e-12,
        mismatched_parents,
        expected_mean_depth: estimate.exact_mean_depth,
        measured_mean_depth,
        depth_error,
        depth_within_band,
    }
}

/// Chain `{c0},{c1..}`, `{c1},{c2..}`, ... over `n` classes.
pub fn chain_tree(n: usize) -> Result<HierarchyTree> {
    use crate::tree::ClassSet;
    if n < 2 {
        return Err(Error::OutOfRange(n));
    }
    let pairs = (0..n - 1)
        .map(|k| Ok((ClassSet::singleton(k), ClassSet::new((k + 1..n).collect())?)))
        .collect::<Result<Vec<_>>>()?;
    HierarchyTree::build(pairs)
}

/// Halving splits of `0..n`; perfectly balanced when `n` is a power of two.
pub fn balanced_tree(n: usize) -> Result<HierarchyTree> {
    use crate::tree::ClassSet;
    if n < 2 {
        return Err(Error::OutOfRange(n));
    }
    let mut pairs = Vec::new();
    let mut stack = vec![(0, n)];
    while let Some((lo, hi)) = stack.pop() {
        if hi - lo < 2 {
            continue;
        }
        let mid = lo + (hi - lo) / 2;
        pairs.push((ClassSet::new((lo..mid).collect())?, ClassSet::new((mid..hi).collect())?));
        stack.push((mid, hi));
        stack.push((lo, mid));
    }
    HierarchyTree::build(pairs)
}
