//! Binary class hierarchies represented as a set of parent nodes.
//!
//! Each parent holds the two disjoint class-sets of its children. Parent to
//! child links are implicit: a parent whose class union equals a child set of
//! another parent sits below it.

mod balance;
mod canonical;
mod classset;
mod text;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::ClassId;
use crate::error::{Error, Result};

pub use balance::{bfc, bfc_ratio, bfd, bfd_from_counts, bfd_ratio};
pub use canonical::{canonicalize, trees_similar, CanonicalForm};
pub use classset::ClassSet;
pub use text::{format_nested, format_nested_with, parse_nested, parse_nested_with};

/// An internal node: a bipartition of the classes under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParentNode {
    pub id: usize,
    pub left: ClassSet,
    pub right: ClassSet,
}

impl ParentNode {
    pub fn classes(&self) -> ClassSet {
        self.left.union(&self.right)
    }

    pub fn num_classes(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn side(&self, right: bool) -> &ClassSet {
        if right {
            &self.right
        } else {
            &self.left
        }
    }
}

/// Rooted binary tree over a label space, with `|C| - 1` parent nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct HierarchyTree {
    parents: Vec<ParentNode>,
    root: usize,
    label_space: ClassSet,
    /// Index of the parent splitting each child set, `[left, right]`.
    children: Vec<[Option<usize>; 2]>,
    parent_of: Vec<Option<usize>>,
}

impl HierarchyTree {
    /// Validates `pairs` as a rooted binary tree and derives its links.
    ///
    /// Parent order is preserved; ids are positions in `pairs`.
    pub fn build(pairs: Vec<(ClassSet, ClassSet)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidTree("no parent nodes".into()));
        }
        for (i, (l, r)) in pairs.iter().enumerate() {
            if !l.is_disjoint(r) {
                return Err(Error::InvalidTree(format!(
                    "parent {i} has overlapping children {l} and {r}"
                )));
            }
        }
        let parents: Vec<ParentNode> = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (left, right))| ParentNode { id, left, right })
            .collect();

        let mut by_union: HashMap<Vec<ClassId>, usize> = HashMap::new();
        for p in &parents {
            if let Some(prev) = by_union.insert(p.classes().sorted(), p.id) {
                return Err(Error::InvalidTree(format!(
                    "parents {prev} and {} split the same class set {}",
                    p.id,
                    p.classes()
                )));
            }
        }

        let mut all: Vec<ClassId> = parents.iter().flat_map(|p| p.classes().sorted()).collect();
        all.sort_unstable();
        all.dedup();
        let roots: Vec<usize> = parents
            .iter()
            .filter(|p| p.num_classes() == all.len())
            .map(|p| p.id)
            .collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::InvalidTree("no parent covers the whole label space".into())),
            _ => return Err(Error::InvalidTree(format!("multiple roots: {roots:?}"))),
        };

        let mut children = vec![[None, None]; parents.len()];
        let mut parent_of = vec![None; parents.len()];
        for p in &parents {
            for (side, set) in [&p.left, &p.right].into_iter().enumerate() {
                if set.len() < 2 {
                    continue;
                }
                let Some(&child) = by_union.get(&set.sorted()) else {
                    return Err(Error::InvalidTree(format!(
                        "class set {set} under parent {} is never split",
                        p.id
                    )));
                };
                if let Some(other) = parent_of[child] {
                    return Err(Error::InvalidTree(format!(
                        "parent {child} hangs under both {other} and {}",
                        p.id
                    )));
                }
                parent_of[child] = Some(p.id);
                children[p.id][side] = Some(child);
            }
        }
        if let Some(orphan) = (0..parents.len()).find(|&i| i != root && parent_of[i].is_none()) {
            return Err(Error::InvalidTree(format!(
                "parent {orphan} ({}) is not a child of any other parent",
                parents[orphan].classes()
            )));
        }
        if parents.len() + 1 != all.len() {
            return Err(Error::InvalidTree(format!(
                "{} parents for {} classes",
                parents.len(),
                all.len()
            )));
        }
        let label_space = parents[root].classes();
        Ok(Self {
            parents,
            root,
            label_space,
            children,
            parent_of,
        })
    }

    /// The only tree over two classes.
    pub fn pair(a: ClassId, b: ClassId) -> Self {
        Self::build(vec![(ClassSet::singleton(a), ClassSet::singleton(b))])
            .expect("two distinct singletons form a valid tree")
    }

    pub fn parents(&self) -> &[ParentNode] {
        &self.parents
    }

    pub fn root(&self) -> &ParentNode {
        &self.parents[self.root]
    }

    pub fn root_id(&self) -> usize {
        self.root
    }

    pub fn label_space(&self) -> &ClassSet {
        &self.label_space
    }

    pub fn num_classes(&self) -> usize {
        self.label_space.len()
    }

    /// Total node count, leaves included.
    pub fn node_count(&self) -> usize {
        2 * self.parents.len() + 1
    }

    /// Parent id splitting the given side of `parent`, or `None` for a leaf.
    pub fn child(&self, parent: usize, right: bool) -> Option<usize> {
        self.children[parent][right as usize]
    }

    pub fn parent_of(&self, parent: usize) -> Option<usize> {
        self.parent_of[parent]
    }

    /// Parent ids in pre-order (root, left subtree, right subtree).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.parents.len());
        let mut stack = vec![self.root];
        while let Some(p) = stack.pop() {
            out.push(p);
            if let Some(r) = self.children[p][1] {
                stack.push(r);
            }
            if let Some(l) = self.children[p][0] {
                stack.push(l);
            }
        }
        out
    }

    /// Number of parent decisions on the path from the root to each class.
    pub fn leaf_depths(&self) -> HashMap<ClassId, usize> {
        let mut depths = HashMap::with_capacity(self.num_classes());
        let mut stack = vec![(self.root, 1usize)];
        while let Some((p, d)) = stack.pop() {
            for right in [false, true] {
                match self.child(p, right) {
                    Some(c) => stack.push((c, d + 1)),
                    None => {
                        depths.insert(self.parents[p].side(right).min(), d);
                    }
                }
            }
        }
        depths
    }

    pub fn flatten(&self) -> Vec<(ClassSet, ClassSet)> {
        self.parents
            .iter()
            .map(|p| (p.left.clone(), p.right.clone()))
            .collect()
    }

    /// The same tree with every left/right pair swapped.
    pub fn reflect(&self) -> Self {
        let pairs = self
            .parents
            .iter()
            .map(|p| (p.right.clone(), p.left.clone()))
            .collect();
        Self::build(pairs).expect("reflection preserves validity")
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    parents: Vec<PairJson>,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    left: Vec<ClassId>,
    right: Vec<ClassId>,
}

impl TryFrom<TreeJson> for HierarchyTree {
    type Error = Error;

    fn try_from(json: TreeJson) -> Result<Self> {
        let pairs = json
            .parents
            .into_iter()
            .map(|p| Ok((ClassSet::new(p.left)?, ClassSet::new(p.right)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::build(pairs)
    }
}

impl From<HierarchyTree> for TreeJson {
    fn from(tree: HierarchyTree) -> Self {
        TreeJson {
            parents: tree
                .parents
                .into_iter()
                .map(|p| PairJson {
                    left: p.left.members().to_vec(),
                    right: p.right.members().to_vec(),
                })
                .collect(),
        }
    }
}
