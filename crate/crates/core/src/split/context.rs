use super::BipartitionScorer;
use crate::classify::{Classifier, Learner};
use crate::dataset::{ClassId, SeriesMatrix, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::eval::metrics::f1_macro;
use crate::scalar::Scalar;
use crate::tree::ClassSet;

/// Train/validation pair a splitter scores candidate bipartitions on.
pub struct SplitContext<'a, T: Scalar, L> {
    pub train: &'a TimeSeriesDataset<T>,
    pub val: &'a TimeSeriesDataset<T>,
    pub learner: &'a L,
}

impl<'a, T: Scalar, L> SplitContext<'a, T, L> {
    pub fn new(train: &'a TimeSeriesDataset<T>, val: &'a TimeSeriesDataset<T>, learner: &'a L) -> Result<Self> {
        if train.num_classes() != val.num_classes() || train.series_len() != val.series_len() {
            return Err(Error::LabelSpaceMismatch(
                "train and validation parts differ in label space or series length".into(),
            ));
        }
        Ok(Self { train, val, learner })
    }
}

/// Rows under `c0 ∪ c1`, relabelled 0 for `c0` and 1 for `c1`.
fn meta_part<T: Scalar>(
    data: &TimeSeriesDataset<T>,
    c0: &ClassSet,
    c1: &ClassSet,
    part: &str,
) -> Result<(SeriesMatrix<T>, Vec<ClassId>)> {
    let idx = data.indices_where(|c| c0.contains(c) || c1.contains(c));
    let y: Vec<ClassId> = idx.iter().map(|&i| c1.contains(data.labels()[i]) as ClassId).collect();
    for (group, name) in [(0, "first"), (1, "second")] {
        if !y.contains(&group) {
            return Err(Error::Scoring(format!(
                "{part} part has no instances of the {name} group {}",
                if group == 0 { c0 } else { c1 }
            )));
        }
    }
    Ok((data.values().select_rows(&idx), y))
}

/// Fits the base classifier on the two meta-groups of the training part and
/// returns the macro-f1 of the groups on the validation part.
pub fn score_bipartition<T: Scalar, L: Learner<T>>(
    ctx: &SplitContext<'_, T, L>,
    c0: &ClassSet,
    c1: &ClassSet,
) -> Result<f64> {
    if !c0.is_disjoint(c1) {
        return Err(Error::Scoring(format!("{c0} and {c1} overlap")));
    }
    let (x_train, y_train) = meta_part(ctx.train, c0, c1, "training")?;
    let (x_val, y_val) = meta_part(ctx.val, c0, c1, "validation")?;
    let model = ctx.learner.fit(&x_train, &y_train, 2)?;
    let pred = model.predict(&x_val)?;
    f1_macro(&y_val, &pred)
}

impl<T: Scalar, L: Learner<T>> BipartitionScorer for SplitContext<'_, T, L> {
    fn score(&mut self, c0: &ClassSet, c1: &ClassSet) -> Result<f64> {
        score_bipartition(self, c0, c1)
    }
}
