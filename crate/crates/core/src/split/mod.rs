//! Bipartitioning a class-set so that a base classifier separates the two
//! groups as well as possible.
//!
//! Three stochastic splitting functions trade search effort for quality:
//! pick-one-then-regroup ([`potr`]), split-randomly-then-regroup
//! ([`srtr`]) and leave-salient-one-out ([`lsoo`]). [`exhaustive`] scores
//! every bipartition and serves as the reference optimum.

mod context;
mod ssf;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tree::ClassSet;

pub use context::{score_bipartition, SplitContext};
pub use ssf::{exhaustive, lsoo, potr, srtr, DEFAULT_EXHAUSTIVE_CAP};

/// Score at which a search stops early.
pub const PERFECT_SCORE: f64 = 1.0;

/// Scores a candidate bipartition in `[0, 1]`.
pub trait BipartitionScorer {
    fn score(&mut self, c0: &ClassSet, c1: &ClassSet) -> Result<f64>;
}

impl<F> BipartitionScorer for F
where
    F: FnMut(&ClassSet, &ClassSet) -> Result<f64>,
{
    fn score(&mut self, c0: &ClassSet, c1: &ClassSet) -> Result<f64> {
        self(c0, c1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitOutcome {
    pub c0: ClassSet,
    pub c1: ClassSet,
    pub score: f64,
    /// Number of scorer calls made.
    pub evaluations: usize,
    pub early_stopped: bool,
}

/// Best bipartition found so far.
#[derive(Clone, Debug, PartialEq)]
pub struct BestSplit {
    pub c0: ClassSet,
    pub c1: ClassSet,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub replaced: bool,
    pub stop: bool,
}

/// Replaces `best` on strict improvement; asks to stop once a replacement
/// reaches [`PERFECT_SCORE`]. An empty `best` accepts any candidate.
pub fn update_score_and_groups(best: &mut Option<BestSplit>, candidate: BestSplit) -> Update {
    let improves = best.as_ref().is_none_or(|b| candidate.score > b.score);
    if !improves {
        return Update {
            replaced: false,
            stop: false,
        };
    }
    let stop = candidate.score >= PERFECT_SCORE;
    *best = Some(candidate);
    Update { replaced: true, stop }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitter {
    Potr,
    Srtr,
    Lsoo,
    Exhaustive,
}

impl Splitter {
    pub const STOCHASTIC: [Splitter; 3] = [Splitter::Potr, Splitter::Srtr, Splitter::Lsoo];

    pub fn split<S, R>(self, scorer: &mut S, classes: &ClassSet, rng: &mut R) -> Result<SplitOutcome>
    where
        S: BipartitionScorer + ?Sized,
        R: rand::Rng + ?Sized,
    {
        match self {
            Splitter::Potr => potr(scorer, classes, rng),
            Splitter::Srtr => srtr(scorer, classes, rng),
            Splitter::Lsoo => lsoo(scorer, classes, rng),
            Splitter::Exhaustive => exhaustive(scorer, classes, DEFAULT_EXHAUSTIVE_CAP),
        }
    }
}

impl std::fmt::Display for Splitter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Splitter::Potr => "potr",
            Splitter::Srtr => "srtr",
            Splitter::Lsoo => "lsoo",
            Splitter::Exhaustive => "exhaustive",
        })
    }
}

impl std::str::FromStr for Splitter {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potr" => Ok(Splitter::Potr),
            "srtr" => Ok(Splitter::Srtr),
            "lsoo" => Ok(Splitter::Lsoo),
            "exhaustive" => Ok(Splitter::Exhaustive),
            other => Err(crate::Error::InvalidConfig(format!("unknown splitter '{other}'"))),
        }
    }
}
