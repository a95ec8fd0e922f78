//! Nested and flat cross-validation with tree selection.
//!
//! Both modes share one candidate stream per outer fold: iteration `i` of
//! fold `f` draws from its own ChaCha stream keyed by `(seed, f, i)`, so the
//! candidates do not depend on scheduling or on the mode.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::Learner;
use crate::dataset::TimeSeriesDataset;
use crate::error::{Error, Result};
use crate::eval::folds::{flat_fold_score, split_data, FoldPlan};
use crate::eval::metrics::f1_macro;
use crate::lcpn::{fit_lcpn, predict_lcpn};
use crate::scalar::Scalar;
use crate::split::{SplitContext, Splitter};
use crate::tree::{bfc, bfd, format_nested, HierarchyTree};
use crate::treegen::{fit_lcpn_tree, TreeCheck, TreeSearchState};

pub const REPORT_FORMAT: &str = "hdcssf-cv-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    Nested,
    Flat,
}

impl std::fmt::Display for CvMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CvMode::Nested => "nested",
            CvMode::Flat => "flat",
        })
    }
}

impl std::str::FromStr for CvMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nested" => Ok(CvMode::Nested),
            "flat" => Ok(CvMode::Flat),
            other => Err(Error::InvalidConfig(format!("unknown cv mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub dataset_id: String,
    /// Label for the base classifier, copied into the report.
    pub classifier: String,
    pub splitter: Splitter,
    pub n_iter: usize,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            dataset_id: "dataset".into(),
            classifier: "custom".into(),
            splitter: Splitter::Potr,
            n_iter: 10,
            n_outer: 5,
            n_inner: 4,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidConfig("n_iter must be at least 1".into()));
        }
        if self.n_outer < 2 || self.n_inner < 2 {
            return Err(Error::InvalidConfig(format!(
                "fold counts must be at least 2, got outer {} inner {}",
                self.n_outer, self.n_inner
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub iteration: usize,
    pub tree: String,
    /// Inner mean in nested mode, outer-test score in flat mode.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub selected_tree: String,
    pub inner_mean_score: Option<f64>,
    pub outer_test_score: f64,
    pub fc_score: f64,
    pub bfc: f64,
    pub bfd: f64,
    pub delta_g: f64,
    pub distinct_trees_tried: usize,
    pub iterations_run: usize,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub format: String,
    pub version: u32,
    pub mode: CvMode,
    pub dataset_id: String,
    pub classifier: String,
    pub splitter: Splitter,
    pub n_iter: usize,
    pub n_outer: usize,
    pub n_inner: usize,
    pub seed: u64,
    pub num_classes: usize,
    pub folds: Vec<FoldRecord>,
    pub score_nested_cv: Option<f64>,
    pub score_flat_cv: Option<f64>,
    pub mean_inner_score: Option<f64>,
    pub mean_fc_score: f64,
    pub mean_delta_g: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    dataset: &'a str,
    classifier: &'a str,
    splitter: String,
    mode: String,
    n_iter: usize,
    seed: u64,
    fold: usize,
    num_classes: usize,
    inner_mean_score: Option<f64>,
    outer_test_score: f64,
    fc_score: f64,
    bfc: f64,
    bfd: f64,
    delta_g: f64,
    distinct_trees_tried: usize,
    iterations_run: usize,
    selected_tree: &'a str,
}

impl CvReport {
    /// Headline score: nested outer-test mean or flat best mean.
    pub fn score(&self) -> f64 {
        self.score_nested_cv.or(self.score_flat_cv).unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        r.validate()?;
        Ok(r)
    }

    /// Schema and consistency checks on a deserialised report.
    pub fn validate(&self) -> Result<()> {
        if self.format != REPORT_FORMAT || self.version != REPORT_VERSION {
            return Err(Error::InvalidConfig(format!("unsupported report {} v{}", self.format, self.version)));
        }
        if self.folds.len() != self.n_outer {
            return Err(Error::InvalidConfig(format!("{} fold records for {} folds", self.folds.len(), self.n_outer)));
        }
        for f in &self.folds {
            if f.delta_g != f.outer_test_score - f.fc_score {
                return Err(Error::InvalidConfig(format!("fold {} delta_g does not match its scores", f.fold)));
            }
            if (self.mode == CvMode::Nested) != f.inner_mean_score.is_some() {
                return Err(Error::InvalidConfig(format!("fold {} inner score does not fit the mode", f.fold)));
            }
        }
        Ok(())
    }

    /// One row per outer fold.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for f in &self.folds {
            w.serialize(CsvRow {
                dataset: &self.dataset_id,
                classifier: &self.classifier,
                splitter: self.splitter.to_string(),
                mode: self.mode.to_string(),
                n_iter: self.n_iter,
                seed: self.seed,
                fold: f.fold,
                num_classes: self.num_classes,
                inner_mean_score: f.inner_mean_score,
                outer_test_score: f.outer_test_score,
                fc_score: f.fc_score,
                bfc: f.bfc,
                bfd: f.bfd,
                delta_g: f.delta_g,
                distinct_trees_tried: f.distinct_trees_tried,
                iterations_run: f.iterations_run,
                selected_tree: &f.selected_tree,
            })
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Random stream for iteration `iter` of outer fold `fold`.
pub fn stream_rng(seed: u64, fold: usize, iter: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((fold as u64) << 32) | iter as u64);
    rng
}

#[derive(Clone, Debug)]
pub struct Candidates {
    pub trees: Vec<(usize, HierarchyTree)>,
    pub iterations_run: usize,
}

/// Grows up to `n_iter` trees on `train`, dropping duplicates and stopping
/// once every distinct tree has been seen. Each tree is fitted on a fresh
/// shuffled split of `train`, with its first fold as validation.
pub fn generate_candidates<T, L>(train: &TimeSeriesDataset<T>, learner: &L, cfg: &CvConfig, fold: usize) -> Result<Candidates>
where
    T: Scalar,
    L: Learner<T>,
{
    let mut state = TreeSearchState::new(train.num_classes());
    let mut trees = Vec::new();
    let mut iterations_run = 0;
    for it in 0..cfg.n_iter {
        if state.is_exhausted() {
            break;
        }
        iterations_run += 1;
        let mut rng = stream_rng(cfg.seed, fold, it);
        let plan = split_data(train, cfg.n_inner, true, rng.random())?;
        let fit_part = train.subset(&plan.train_indices(0));
        let val_part = train.subset(&plan.test_indices(0));
        let mut ctx = SplitContext::new(&fit_part, &val_part, learner)?;
        let grown = fit_lcpn_tree(&mut ctx, cfg.splitter, &mut rng)?;
        match state.check_duplicates_and_limit(&grown.tree) {
            TreeCheck::Fresh => trees.push((it, grown.tree)),
            TreeCheck::Duplicate => {}
            TreeCheck::LimitReached => break,
        }
    }
    Ok(Candidates { trees, iterations_run })
}

/// Fits the hierarchy on `train` and returns macro-f1 on `test`.
pub fn hc_score<T, L>(tree: &HierarchyTree, train: &TimeSeriesDataset<T>, test: &TimeSeriesDataset<T>, learner: &L) -> Result<f64>
where
    T: Scalar,
    L: Learner<T>,
{
    let (model, _) = fit_lcpn(tree, train, learner)?;
    let pred = predict_lcpn(&model, test.values())?;
    f1_macro(test.labels(), &pred.labels)
}

/// Mean hierarchical score over the folds of `plan` on `data`.
pub fn inner_mean_score<T, L>(tree: &HierarchyTree, data: &TimeSeriesDataset<T>, plan: &FoldPlan, learner: &L) -> Result<f64>
where
    T: Scalar,
    L: Learner<T>,
{
    let scores: Vec<f64> = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            hc_score(
                tree,
                &data.subset(&plan.train_indices(f)),
                &data.subset(&plan.test_indices(f)),
                learner,
            )
        })
        .collect::<Result<_>>()?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

fn select(scored: &[(usize, f64)]) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (pos, &(_, s)) in scored.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((pos, s));
        }
    }
    best.map_or(0, |(pos, _)| pos)
}

fn run_fold<T, L>(data: &TimeSeriesDataset<T>, outer: &FoldPlan, fold: usize, learner: &L, cfg: &CvConfig, mode: CvMode) -> Result<FoldRecord>
where
    T: Scalar,
    L: Learner<T>,
{
    let train_idx = outer.train_indices(fold);
    let test_idx = outer.test_indices(fold);
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let fc_score = flat_fold_score(data, &train_idx, &test_idx, learner)?;

    let cands = generate_candidates(&train, learner, cfg, fold)?;
    let inner_plan = match mode {
        CvMode::Nested => Some(split_data(&train, cfg.n_inner, false, cfg.seed)?),
        CvMode::Flat => None,
    };
    let scores: Vec<f64> = cands
        .trees
        .par_iter()
        .map(|(_, tree)| match &inner_plan {
            Some(plan) => inner_mean_score(tree, &train, plan, learner),
            None => hc_score(tree, &train, &test, learner),
        })
        .collect::<Result<_>>()?;
    let scored: Vec<(usize, f64)> = cands.trees.iter().map(|(it, _)| *it).zip(scores.iter().copied()).collect();
    let pos = select(&scored);
    let tree = &cands.trees[pos].1;
    let (inner_mean_score, outer_test_score) = match mode {
        CvMode::Nested => (Some(scores[pos]), hc_score(tree, &train, &test, learner)?),
        CvMode::Flat => (None, scores[pos]),
    };
    Ok(FoldRecord {
        fold,
        selected_tree: format_nested(tree),
        inner_mean_score,
        outer_test_score,
        fc_score,
        bfc: bfc(tree),
        bfd: bfd(tree, &train)?,
        delta_g: outer_test_score - fc_score,
        distinct_trees_tried: cands.trees.len(),
        iterations_run: cands.iterations_run,
        candidates: cands
            .trees
            .iter()
            .zip(&scores)
            .map(|((it, t), &s)| CandidateRecord {
                iteration: *it,
                tree: format_nested(t),
                score: s,
            })
            .collect(),
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs the chosen protocol over an unshuffled stratified outer plan.
pub fn run_cv<T, L>(data: &TimeSeriesDataset<T>, learner: &L, cfg: &CvConfig, mode: CvMode) -> Result<CvReport>
where
    T: Scalar,
    L: Learner<T>,
{
    cfg.validate()?;
    let outer = split_data(data, cfg.n_outer, false, cfg.seed)?;
    let folds: Vec<FoldRecord> = (0..cfg.n_outer)
        .into_par_iter()
        .map(|f| run_fold(data, &outer, f, learner, cfg, mode))
        .collect::<Result<_>>()?;
    let headline = mean(folds.iter().map(|f| f.outer_test_score));
    Ok(CvReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        mode,
        dataset_id: cfg.dataset_id.clone(),
        classifier: cfg.classifier.clone(),
        splitter: cfg.splitter,
        n_iter: cfg.n_iter,
        n_outer: cfg.n_outer,
        n_inner: cfg.n_inner,
        seed: cfg.seed,
        num_classes: data.num_classes(),
        score_nested_cv: (mode == CvMode::Nested).then_some(headline),
        score_flat_cv: (mode == CvMode::Flat).then_some(headline),
        mean_inner_score: (mode == CvMode::Nested).then(|| mean(folds.iter().filter_map(|f| f.inner_mean_score))),
        mean_fc_score: mean(folds.iter().map(|f| f.fc_score)),
        mean_delta_g: mean(folds.iter().map(|f| f.delta_g)),
        folds,
    })
}

pub fn nested_cv<T: Scalar, L: Learner<T>>(data: &TimeSeriesDataset<T>, learner: &L, cfg: &CvConfig) -> Result<CvReport> {
    run_cv(data, learner, cfg, CvMode::Nested)
}

pub fn flat_cv<T: Scalar, L: Learner<T>>(data: &TimeSeriesDataset<T>, learner: &L, cfg: &CvConfig) -> Result<CvReport> {
    run_cv(data, learner, cfg, CvMode::Flat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Classifier;
    use crate::dataset::{ClassId, SeriesMatrix};

    /// Nearest class mean with ties to the smaller id.
    struct Centroid;
    struct CentroidModel(Vec<Vec<f64>>);

    impl Classifier<f64> for CentroidModel {
        fn predict(&self, x: &SeriesMatrix<f64>) -> Result<Vec<ClassId>> {
            Ok(x.iter_rows()
                .map(|r| {
                    let d = |c: &Vec<f64>| c.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                    (0..self.0.len()).fold(0, |best, c| if d(&self.0[c]) < d(&self.0[best]) { c } else { best })
                })
                .collect())
        }
    }

    impl Learner<f64> for Centroid {
        type Model = CentroidModel;
        fn fit(&self, x: &SeriesMatrix<f64>, y: &[ClassId], k: usize) -> Result<CentroidModel> {
            let mut sums = vec![vec![0.0; x.cols()]; k];
            let mut n = vec![0.0f64; k];
            for (r, &l) in x.iter_rows().zip(y) {
                n[l] += 1.0;
                for (s, v) in sums[l].iter_mut().zip(r) {
                    *s += v;
                }
            }
            for (s, n) in sums.iter_mut().zip(&n) {
                s.iter_mut().for_each(|v| *v /= n.max(1.0));
            }
            Ok(CentroidModel(sums))
        }
    }

    /// Reads the class from the first value and memorises its meta-label.
    struct Perfect;
    struct PerfectModel(Vec<ClassId>);

    impl Classifier<f64> for PerfectModel {
        fn predict(&self, x: &SeriesMatrix<f64>) -> Result<Vec<ClassId>> {
            Ok(x.iter_rows().map(|r| self.0[r[0] as usize]).collect())
        }
    }

    impl Learner<f64> for Perfect {
        type Model = PerfectModel;
        fn fit(&self, x: &SeriesMatrix<f64>, y: &[ClassId], _: usize) -> Result<PerfectModel> {
            let mut map = vec![0; 32];
            for (r, &l) in x.iter_rows().zip(y) {
                map[r[0] as usize] = l;
            }
            Ok(PerfectModel(map))
        }
    }

    fn data(classes: usize, per_class: usize) -> TimeSeriesDataset<f64> {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..classes * per_class {
            let c = i % classes;
            let wobble = ((i * 7919) % 13) as f64 / 4.0;
            rows.push(vec![c as f64, c as f64 + wobble, (c / 2) as f64 * 3.0 - wobble]);
            labels.push(c);
        }
        TimeSeriesDataset::new(SeriesMatrix::from_rows(&rows).unwrap(), labels, TimeSeriesDataset::<f64>::default_names(classes)).unwrap()
    }

    #[test]
    fn perfect_classifier_scores_one() {
        let d = data(4, 20);
        let cfg = CvConfig::default();
        let r = nested_cv(&d, &Perfect, &cfg).unwrap();
        for f in &r.folds {
            assert_eq!(f.inner_mean_score, Some(1.0));
            assert_eq!(f.outer_test_score, 1.0);
            assert_eq!(f.selected_tree, f.candidates[0].tree);
        }
        assert_eq!(r.score(), 1.0);
        assert_eq!(flat_cv(&d, &Perfect, &cfg).unwrap().score(), 1.0);
    }

    #[test]
    fn three_classes_stop_after_three_trees() {
        let d = data(3, 20);
        let cfg = CvConfig {
            n_iter: 50,
            ..CvConfig::default()
        };
        let r = nested_cv(&d, &Centroid, &cfg).unwrap();
        for f in &r.folds {
            assert!(f.distinct_trees_tried <= 3);
            if f.distinct_trees_tried == 3 {
                assert!(f.iterations_run < 50);
            }
        }
    }

    #[test]
    fn reproducible_and_flat_dominates() {
        let d = data(5, 16);
        let cfg = CvConfig {
            n_iter: 6,
            splitter: Splitter::Srtr,
            ..CvConfig::default()
        };
        let a = nested_cv(&d, &Centroid, &cfg).unwrap();
        let b = nested_cv(&d, &Centroid, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let flat = flat_cv(&d, &Centroid, &cfg).unwrap();
        for (n, f) in a.folds.iter().zip(&flat.folds) {
            assert!(f.outer_test_score >= n.outer_test_score);
            let trees_n: Vec<_> = n.candidates.iter().map(|c| &c.tree).collect();
            let trees_f: Vec<_> = f.candidates.iter().map(|c| &c.tree).collect();
            assert_eq!(trees_n, trees_f);
        }
        assert_eq!(CvReport::from_json(&a.to_json().unwrap()).unwrap(), a);
    }

    #[test]
    fn single_iteration_agrees() {
        let d = data(4, 15);
        let cfg = CvConfig {
            n_iter: 1,
            ..CvConfig::default()
        };
        let n = nested_cv(&d, &Centroid, &cfg).unwrap();
        let f = flat_cv(&d, &Centroid, &cfg).unwrap();
        for (a, b) in n.folds.iter().zip(&f.folds) {
            assert_eq!(a.selected_tree, b.selected_tree);
            assert_eq!(a.outer_test_score, b.outer_test_score);
        }
    }

    #[test]
    fn csv_has_one_row_per_fold() {
        let d = data(3, 10);
        let r = flat_cv(&d, &Centroid, &CvConfig::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    }

    #[test]
    fn infeasible_outer_plan() {
        let d = data(3, 4);
        assert!(matches!(nested_cv(&d, &Centroid, &CvConfig::default()), Err(Error::FoldFeasibility { .. })));
    }
}
