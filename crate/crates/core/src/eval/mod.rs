//! Metrics, fold plans and the cross-validation procedures.

pub mod cv;
pub mod folds;
pub mod metrics;

pub use cv::{flat_cv, nested_cv, CvConfig, CvMode, CvReport, FoldRecord};
pub use folds::{flat_baseline, split_data, split_labels, FoldPlan};
pub use metrics::{accuracy, f1_macro};
