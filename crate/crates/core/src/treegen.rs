//! Top-down tree growth, distinct-tree counting and duplicate tracking.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::Learner;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::split::{BipartitionScorer, SplitContext, Splitter};
use crate::tree::{canonicalize, CanonicalForm, ClassSet, HierarchyTree};

/// Largest class count with an exact distinct-tree count.
pub const MAX_COUNTED_CLASSES: usize = 20;

/// Ceiling on the number of distinct trees a search will visit.
pub const TREE_LIMIT_CAP: u128 = 1_000_000;

/// What happened while growing one tree.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    /// Size of each class-set in the order it was popped.
    pub pop_sizes: Vec<usize>,
    pub splitter_calls: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct GrownTree {
    pub tree: HierarchyTree,
    pub trace: GrowthTrace,
}

/// Grows a tree over `label_space` by splitting the largest pending
/// class-set first. Sets of two classes become parents without a splitter
/// call; equal sizes pop in insertion order.
pub fn grow_tree<S, R>(label_space: &ClassSet, splitter: Splitter, scorer: &mut S, rng: &mut R) -> Result<GrownTree>
where
    S: BipartitionScorer + ?Sized,
    R: Rng + ?Sized,
{
    if label_space.len() < 2 {
        return Err(Error::InvalidTree(format!(
            "a hierarchy needs at least two classes, got {}",
            label_space.len()
        )));
    }
    let mut pending = BinaryHeap::new();
    let mut sets = vec![label_space.clone()];
    pending.push((label_space.len(), Reverse(0usize)));
    let mut pairs = Vec::with_capacity(label_space.len() - 1);
    let mut trace = GrowthTrace::default();

    while let Some((size, Reverse(idx))) = pending.pop() {
        trace.pop_sizes.push(size);
        let set = &sets[idx];
        let (c0, c1) = if size == 2 {
            let m = set.members();
            (ClassSet::singleton(m[0]), ClassSet::singleton(m[1]))
        } else {
            let outcome = splitter.split(scorer, set, rng)?;
            trace.splitter_calls += 1;
            trace.evaluations += outcome.evaluations;
            (outcome.c0, outcome.c1)
        };
        for child in [&c0, &c1] {
            if child.len() >= 2 {
                pending.push((child.len(), Reverse(sets.len())));
                sets.push(child.clone());
            }
        }
        pairs.push((c0, c1));
    }
    Ok(GrownTree {
        tree: HierarchyTree::build(pairs)?,
        trace,
    })
}

/// Grows a tree over the full label space of `ctx`, scoring candidate
/// splits with its base classifier.
pub fn fit_lcpn_tree<T, L, R>(ctx: &mut SplitContext<'_, T, L>, splitter: Splitter, rng: &mut R) -> Result<GrownTree>
where
    T: Scalar,
    L: Learner<T>,
    R: Rng + ?Sized,
{
    let space = ClassSet::range(ctx.train.num_classes());
    grow_tree(&space, splitter, ctx, rng)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn table() -> &'static [u128; MAX_COUNTED_CLASSES + 1] {
    static TABLE: OnceLock<[u128; MAX_COUNTED_CLASSES + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u128; MAX_COUNTED_CLASSES + 1];
        t[1] = 1;
        for n in 2..=MAX_COUNTED_CLASSES {
            let mut total = 0u128;
            for a in (n / 2 + 1)..n {
                total += binomial(n, a) * t[a] * t[n - a];
            }
            if n % 2 == 0 {
                total += binomial(n, n / 2) * t[n / 2] * t[n / 2] / 2;
            }
            t[n] = total;
        }
        t
    })
}

/// Number of similarity-distinct binary hierarchies over `n` classes.
///
/// Sums over the size `a > n - a` of the larger root child, with
/// `C(n, a) · T(a) · T(n - a)` per term, plus half of the balanced term for
/// even `n`. Equals `(2n - 3)!!`.
pub fn count_distinct_trees(n: usize) -> Result<u128> {
    if !(2..=MAX_COUNTED_CLASSES).contains(&n) {
        return Err(Error::OutOfRange(n));
    }
    Ok(table()[n])
}

/// The single-factor recurrence `Σ C(n, k) · T(k)` over `k` from `n - 1`
/// down to `⌈n/2⌉`, halving the last term for even `n`. It agrees with
/// [`count_distinct_trees`] up to `n = 5` and undercounts from `n = 6`.
pub fn count_distinct_trees_single_factor(n: usize) -> Result<u128> {
    if !(2..=MAX_COUNTED_CLASSES).contains(&n) {
        return Err(Error::OutOfRange(n));
    }
    let mut t = vec![0u128; n + 1];
    t[1] = 1;
    for m in 2..=n {
        let lo = m.div_ceil(2);
        let mut total = 0u128;
        for (k, &tk) in t.iter().enumerate().take(m).skip(lo) {
            let term = binomial(m, k) * tk;
            total += if k == lo && m % 2 == 0 { term / 2 } else { term };
        }
        t[m] = total;
    }
    Ok(t[n])
}

/// Distinct-tree limit used to stop iterating: the exact count, capped.
pub fn tree_limit(num_classes: usize) -> u128 {
    count_distinct_trees(num_classes).map_or(TREE_LIMIT_CAP, |c| c.min(TREE_LIMIT_CAP))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeCheck {
    Fresh,
    Duplicate,
    LimitReached,
}

/// Signatures of every distinct tree seen so far.
#[derive(Clone, Debug)]
pub struct TreeSearchState {
    seen: HashSet<CanonicalForm>,
    limit: u128,
}

impl TreeSearchState {
    pub fn new(num_classes: usize) -> Self {
        Self::with_limit(tree_limit(num_classes))
    }

    pub fn with_limit(limit: u128) -> Self {
        Self {
            seen: HashSet::new(),
            limit,
        }
    }

    pub fn distinct_count(&self) -> usize {
        self.seen.len()
    }

    pub fn limit(&self) -> u128 {
        self.limit
    }

    /// True once every distinct tree has been seen.
    pub fn is_exhausted(&self) -> bool {
        self.seen.len() as u128 >= self.limit
    }

    /// Records `tree` unless it is similar to one already seen.
    pub fn check_duplicates_and_limit(&mut self, tree: &HierarchyTree) -> TreeCheck {
        let sig = canonicalize(tree);
        if self.seen.contains(&sig) {
            TreeCheck::Duplicate
        } else if self.is_exhausted() {
            TreeCheck::LimitReached
        } else {
            self.seen.insert(sig);
            TreeCheck::Fresh
        }
    }
}
