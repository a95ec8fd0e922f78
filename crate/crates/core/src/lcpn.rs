//! Local classifier per parent node: one binary model at every parent,
//! routing each instance from the root down to a leaf class.

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::{Classifier, Learner};
use crate::dataset::{ClassId, SeriesMatrix, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{format_nested, parse_nested, HierarchyTree};

/// Binary node models indexed by parent id. Meta-label 0 routes left,
/// 1 routes right.
#[derive(Clone, Debug)]
pub struct TrainedLcpnModel<M> {
    pub tree: HierarchyTree,
    pub node_models: Vec<M>,
}

/// Training load of one parent node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLoad {
    pub parent: usize,
    pub instances: usize,
    pub classes: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitCounters {
    pub nodes: Vec<NodeLoad>,
}

impl FitCounters {
    /// Σ instances × classes over all parents.
    pub fn datapoint_class_units(&self) -> u64 {
        self.nodes.iter().map(|n| (n.instances * n.classes) as u64).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcpnPrediction {
    pub labels: Vec<ClassId>,
    /// Parent decisions taken per instance; the root decision counts 1.
    pub depths: Vec<usize>,
}

impl LcpnPrediction {
    pub fn mean_depth(&self) -> f64 {
        self.depths.iter().sum::<usize>() as f64 / self.depths.len().max(1) as f64
    }
}

/// Trains every parent on exactly the instances of the classes under it.
pub fn fit_lcpn<T, L>(
    tree: &HierarchyTree,
    data: &TimeSeriesDataset<T>,
    learner: &L,
) -> Result<(TrainedLcpnModel<L::Model>, FitCounters)>
where
    T: Scalar,
    L: Learner<T>,
{
    if tree.label_space().iter().any(|c| c >= data.num_classes()) || tree.num_classes() != data.num_classes() {
        return Err(Error::LabelSpaceMismatch(format!(
            "tree over {} classes, dataset with {}",
            tree.num_classes(),
            data.num_classes()
        )));
    }
    let fitted: Vec<(L::Model, NodeLoad)> = tree
        .parents()
        .par_iter()
        .map(|p| {
            let idx = data.indices_where(|c| p.left.contains(c) || p.right.contains(c));
            let y: Vec<ClassId> = idx.iter().map(|&i| p.right.contains(data.labels()[i]) as ClassId).collect();
            for (group, side) in [(0, "left"), (1, "right")] {
                if !y.contains(&group) {
                    return Err(Error::EmptyNode { parent: p.id, side });
                }
            }
            let model = learner.fit(&data.values().select_rows(&idx), &y, 2)?;
            Ok((
                model,
                NodeLoad {
                    parent: p.id,
                    instances: idx.len(),
                    classes: p.num_classes(),
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (node_models, nodes) = fitted.into_iter().unzip();
    Ok((
        TrainedLcpnModel {
            tree: tree.clone(),
            node_models,
        },
        FitCounters { nodes },
    ))
}

/// Routes every row root to leaf; each parent classifies its batch once.
pub fn predict_lcpn<T, M>(model: &TrainedLcpnModel<M>, x: &SeriesMatrix<T>) -> Result<LcpnPrediction>
where
    T: Scalar,
    M: Classifier<T>,
{
    let n = x.rows();
    let mut labels = vec![usize::MAX; n];
    let mut depths = vec![0; n];
    let tree = &model.tree;
    let mut work = vec![(tree.root_id(), (0..n).collect::<Vec<_>>())];
    while let Some((parent, rows)) = work.pop() {
        if rows.is_empty() {
            continue;
        }
        let decisions = model.node_models[parent].predict(&x.select_rows(&rows))?;
        let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (&r, &d) in rows.iter().zip(&decisions) {
            depths[r] += 1;
            sides[(d != 0) as usize].push(r);
        }
        for (right, batch) in sides.into_iter().enumerate() {
            let right = right == 1;
            match tree.child(parent, right) {
                Some(child) => work.push((child, batch)),
                None => {
                    let leaf = tree.parents()[parent].side(right).min();
                    for r in batch {
                        labels[r] = leaf;
                    }
                }
            }
        }
    }
    Ok(LcpnPrediction { labels, depths })
}

const BUNDLE_FORMAT: &str = "hdcssf-lcpn";
const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Bundle<M> {
    format: String,
    version: u32,
    tree: String,
    nodes: Vec<M>,
}

impl<M: Serialize + DeserializeOwned + Clone> TrainedLcpnModel<M> {
    /// Tree in nested-set text plus one blob per node.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Bundle {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            tree: format_nested(&self.tree),
            nodes: self.node_models.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let b: Bundle<M> = serde_json::from_str(s)?;
        if b.format != BUNDLE_FORMAT || b.version != BUNDLE_VERSION {
            return Err(Error::InvalidConfig(format!("unsupported bundle {} v{}", b.format, b.version)));
        }
        let tree = parse_nested(&b.tree)?;
        if b.nodes.len() != tree.parents().len() {
            return Err(Error::InvalidConfig(format!(
                "{} node models for {} parents",
                b.nodes.len(),
                tree.parents().len()
            )));
        }
        Ok(Self {
            tree,
            node_models: b.nodes,
        })
    }
}
