//! Hierarchy induction for flat multi-class time-series labels.
//!
//! A binary class hierarchy is grown top-down by repeatedly bipartitioning
//! class-sets with stochastic splitting functions that maximise how well a
//! base classifier separates the two groups. The resulting tree drives a
//! local-classifier-per-parent-node (LCPN) model that is compared against a
//! flat classifier under nested and flat cross-validation.

pub mod analysis;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod lcpn;
pub mod eval;
pub mod io;
pub mod scalar;
pub mod split;
pub mod synthetic;
pub mod tree;
pub mod treegen;

pub use classify::{Classifier, ClassifierKind, ClassifierSpec, Learner, TrainedClassifier};
pub use dataset::{ClassId, SeriesMatrix, TimeSeriesDataset};
pub use error::{Error, Result};
pub use eval::{CvConfig, CvMode, CvReport};
pub use lcpn::{fit_lcpn, predict_lcpn, TrainedLcpnModel};
pub use scalar::Scalar;
pub use split::Splitter;
pub use tree::{ClassSet, HierarchyTree, ParentNode};

pub type Dataset = TimeSeriesDataset<f64>;
pub type Dataset32 = TimeSeriesDataset<f32>;
pub type Matrix = SeriesMatrix<f64>;
pub type Matrix32 = SeriesMatrix<f32>;
pub type Model = TrainedClassifier<f64>;
pub type Model32 = TrainedClassifier<f32>;
pub type LcpnModel = TrainedLcpnModel<TrainedClassifier<f64>>;
pub type LcpnModel32 = TrainedLcpnModel<TrainedClassifier<f32>>;
