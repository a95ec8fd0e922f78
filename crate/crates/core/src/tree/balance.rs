//! Signed, parent-weighted balance factors over class counts (BFC) and
//! datapoint counts (BFD).
//!
//! Both are `Σ(|right| - |left|) / Σ(|right| + |left| - 2)` over all
//! parents, with sizes measured in classes or in instances. A zero
//! denominator (every parent splits two singletons) yields 0.

use num_rational::Ratio;

use super::HierarchyTree;
use crate::dataset::TimeSeriesDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn ratio(num: i64, den: i64) -> Ratio<i64> {
    if den == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(num, den)
    }
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact class balance factor.
pub fn bfc_ratio(tree: &HierarchyTree) -> Ratio<i64> {
    let (num, den) = tree.parents().iter().fold((0i64, 0i64), |(n, d), p| {
        let (l, r) = (p.left.len() as i64, p.right.len() as i64);
        (n + r - l, d + r + l - 2)
    });
    ratio(num, den)
}

pub fn bfc(tree: &HierarchyTree) -> f64 {
    to_f64(bfc_ratio(tree))
}

/// Exact datapoint balance factor from per-class instance counts.
pub fn bfd_ratio(tree: &HierarchyTree, class_counts: &[usize]) -> Result<Ratio<i64>> {
    if let Some(c) = tree.label_space().iter().find(|&c| c >= class_counts.len()) {
        return Err(Error::LabelSpaceMismatch(format!(
            "tree class {c} has no count among {} classes",
            class_counts.len()
        )));
    }
    let size = |s: &super::ClassSet| s.iter().map(|c| class_counts[c] as i64).sum::<i64>();
    let (num, den) = tree.parents().iter().fold((0i64, 0i64), |(n, d), p| {
        let (l, r) = (size(&p.left), size(&p.right));
        (n + r - l, d + r + l - 2)
    });
    Ok(ratio(num, den))
}

pub fn bfd_from_counts(tree: &HierarchyTree, class_counts: &[usize]) -> Result<f64> {
    bfd_ratio(tree, class_counts).map(to_f64)
}

/// Datapoint balance factor of `tree` under the class distribution of `data`.
pub fn bfd<T: Scalar>(tree: &HierarchyTree, data: &TimeSeriesDataset<T>) -> Result<f64> {
    if tree.num_classes() != data.num_classes() {
        return Err(Error::LabelSpaceMismatch(format!(
            "tree has {} classes, dataset has {}",
            tree.num_classes(),
            data.num_classes()
        )));
    }
    bfd_from_counts(tree, &data.class_counts())
}
