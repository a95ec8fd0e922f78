use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{Classifier, Learner};
use crate::dataset::{ClassId, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::eval::metrics::f1_macro;
use crate::scalar::Scalar;

/// Stratified k-fold assignment of instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub shuffled: bool,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    /// `counts[class][fold]`.
    pub fn class_fold_counts(&self, labels: &[ClassId], num_classes: usize) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; self.k]; num_classes];
        for (&l, &f) in labels.iter().zip(&self.assignments) {
            counts[l][f] += 1;
        }
        counts
    }
}

/// Stratified plan over `labels`. Within each class, instances are dealt
/// round-robin in index order (or a seeded permutation of it); each class
/// starts where the previous one stopped so fold totals stay level too.
pub fn split_labels(
    labels: &[ClassId],
    label_names: &[String],
    k: usize,
    shuffle: bool,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let mut by_class = vec![Vec::new(); label_names.len()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    for (c, members) in by_class.iter().enumerate() {
        if members.len() < k {
            return Err(Error::FoldFeasibility {
                class: label_names[c].clone(),
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut offset = 0;
    for members in &mut by_class {
        if shuffle {
            members.shuffle(&mut rng);
        }
        for (j, &i) in members.iter().enumerate() {
            assignments[i] = (offset + j) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok(FoldPlan {
        k,
        assignments,
        shuffled: shuffle,
        seed,
    })
}

pub fn split_data<T: Scalar>(data: &TimeSeriesDataset<T>, k: usize, shuffle: bool, seed: u64) -> Result<FoldPlan> {
    split_labels(data.labels(), data.label_names(), k, shuffle, seed)
}

/// Macro-f1 of the flat classifier on each test fold.
pub fn flat_baseline<T, L>(data: &TimeSeriesDataset<T>, plan: &FoldPlan, learner: &L) -> Result<Vec<f64>>
where
    T: Scalar,
    L: Learner<T>,
{
    (0..plan.k)
        .map(|f| flat_fold_score(data, &plan.train_indices(f), &plan.test_indices(f), learner))
        .collect()
}

pub(crate) fn flat_fold_score<T, L>(data: &TimeSeriesDataset<T>, train: &[usize], test: &[usize], learner: &L) -> Result<f64>
where
    T: Scalar,
    L: Learner<T>,
{
    let y: Vec<ClassId> = train.iter().map(|&i| data.labels()[i]).collect();
    let model = learner.fit(&data.values().select_rows(train), &y, data.num_classes())?;
    let truth: Vec<ClassId> = test.iter().map(|&i| data.labels()[i]).collect();
    f1_macro(&truth, &model.predict(&data.values().select_rows(test))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SeriesMatrix;

    fn names(n: usize) -> Vec<String> {
        TimeSeriesDataset::<f64>::default_names(n)
    }

    #[test]
    fn exact_divisibility() {
        let labels: Vec<usize> = [vec![0; 10], vec![1; 5]].concat();
        let plan = split_labels(&labels, &names(2), 5, false, 0).unwrap();
        for row in plan.class_fold_counts(&labels, 2)[0].iter() {
            assert_eq!(*row, 2);
        }
        assert!(plan.class_fold_counts(&labels, 2)[1].iter().all(|&c| c == 1));
    }

    #[test]
    fn unshuffled_is_stable_and_shuffled_varies() {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        let a = split_labels(&labels, &names(3), 4, false, 0).unwrap();
        let b = split_labels(&labels, &names(3), 4, false, 9).unwrap();
        assert_eq!(a.assignments, b.assignments);
        let s0 = split_labels(&labels, &names(3), 4, true, 0).unwrap();
        let s1 = split_labels(&labels, &names(3), 4, true, 1).unwrap();
        assert_ne!(s0.assignments, s1.assignments);
        for plan in [&s0, &s1] {
            for counts in plan.class_fold_counts(&labels, 3) {
                assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn infeasible_class_is_named() {
        let labels = vec![0, 0, 0, 1, 1];
        let err = split_labels(&labels, &["a".into(), "b".into()], 3, false, 0).unwrap_err();
        assert!(matches!(err, Error::FoldFeasibility { ref class, count: 2, folds: 3 } if class == "b"));
    }

    struct ConstantLearner;
    struct ConstantModel;

    impl Classifier<f64> for ConstantModel {
        fn predict(&self, x: &SeriesMatrix<f64>) -> Result<Vec<ClassId>> {
            Ok(vec![0; x.rows()])
        }
    }

    impl Learner<f64> for ConstantLearner {
        type Model = ConstantModel;
        fn fit(&self, _: &SeriesMatrix<f64>, _: &[ClassId], _: usize) -> Result<ConstantModel> {
            Ok(ConstantModel)
        }
    }

    #[test]
    fn constant_baseline_on_balanced_three_classes() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let data = TimeSeriesDataset::new(SeriesMatrix::from_rows(&rows).unwrap(), labels, names(3)).unwrap();
        let plan = split_data(&data, 5, false, 0).unwrap();
        for s in flat_baseline(&data, &plan, &ConstantLearner).unwrap() {
            assert!((s - 1.0 / 6.0).abs() < 1e-12);
        }
    }
}
