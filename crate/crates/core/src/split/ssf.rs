use rand::seq::SliceRandom;
use rand::Rng;

use super::{update_score_and_groups, BestSplit, BipartitionScorer, SplitOutcome};
use crate::error::{Error, Result};
use crate::tree::ClassSet;

/// Largest class-set the exhaustive search accepts by default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 12;

fn require_splittable(classes: &ClassSet) -> Result<()> {
    if classes.len() < 2 {
        return Err(Error::Scoring(format!("cannot bipartition {classes}")));
    }
    Ok(())
}

/// Tracks the best split and the number of scorer calls.
struct Search<'a, S: ?Sized> {
    scorer: &'a mut S,
    best: Option<BestSplit>,
    evaluations: usize,
    stopped: bool,
}

impl<'a, S: BipartitionScorer + ?Sized> Search<'a, S> {
    fn new(scorer: &'a mut S) -> Self {
        Self {
            scorer,
            best: None,
            evaluations: 0,
            stopped: false,
        }
    }

    fn try_candidate(&mut self, c0: ClassSet, c1: ClassSet) -> Result<()> {
        let score = self.scorer.score(&c0, &c1)?;
        self.evaluations += 1;
        let u = update_score_and_groups(&mut self.best, BestSplit { c0, c1, score });
        self.stopped = u.stop;
        Ok(())
    }

    fn best(&self) -> &BestSplit {
        self.best.as_ref().expect("at least one candidate scored")
    }

    fn finish(self) -> SplitOutcome {
        let best = self.best.expect("at least one candidate scored");
        SplitOutcome {
            c0: best.c0,
            c1: best.c1,
            score: best.score,
            evaluations: self.evaluations,
            early_stopped: self.stopped,
        }
    }
}

/// Pick-one-then-regroup.
///
/// Starts from one random member against the rest, then offers each other
/// member a move into the first group, keeping moves that strictly improve
/// the score. A move that would empty the second group is not attempted.
pub fn potr<S, R>(scorer: &mut S, classes: &ClassSet, rng: &mut R) -> Result<SplitOutcome>
where
    S: BipartitionScorer + ?Sized,
    R: Rng + ?Sized,
{
    require_splittable(classes)?;
    let members = classes.members();
    let pick = members[rng.random_range(0..members.len())];
    let rest = classes.without(pick).expect("at least two members");
    let mut search = Search::new(scorer);
    search.try_candidate(ClassSet::singleton(pick), rest.clone())?;
    for c in rest.iter() {
        if search.stopped {
            break;
        }
        let best = search.best();
        let Some(c1) = best.c1.without(c) else {
            continue;
        };
        let c0 = best.c0.with(c);
        search.try_candidate(c0, c1)?;
    }
    Ok(search.finish())
}

/// Split-randomly-then-regroup.
///
/// Shuffles the members, cuts at a random point, then visits every member
/// once and tries moving it to the other group, as long as its current
/// group keeps at least one member.
pub fn srtr<S, R>(scorer: &mut S, classes: &ClassSet, rng: &mut R) -> Result<SplitOutcome>
where
    S: BipartitionScorer + ?Sized,
    R: Rng + ?Sized,
{
    require_splittable(classes)?;
    let mut order = classes.members().to_vec();
    order.shuffle(rng);
    let cut = rng.random_range(1..order.len());
    let mut search = Search::new(scorer);
    search.try_candidate(
        ClassSet::new(order[..cut].to_vec())?,
        ClassSet::new(order[cut..].to_vec())?,
    )?;
    for &c in &order {
        if search.stopped {
            break;
        }
        let best = search.best();
        let candidate = if best.c0.contains(c) {
            best.c0.without(c).map(|c0| (c0, best.c1.with(c)))
        } else {
            best.c1.without(c).map(|c1| (best.c0.with(c), c1))
        };
        if let Some((c0, c1)) = candidate {
            search.try_candidate(c0, c1)?;
        }
    }
    Ok(search.finish())
}

/// Leave-salient-one-out.
///
/// Scores every `({member}, rest)` split in shuffled order and keeps the
/// best; the singleton is always the first group.
pub fn lsoo<S, R>(scorer: &mut S, classes: &ClassSet, rng: &mut R) -> Result<SplitOutcome>
where
    S: BipartitionScorer + ?Sized,
    R: Rng + ?Sized,
{
    require_splittable(classes)?;
    let mut order = classes.members().to_vec();
    order.shuffle(rng);
    let mut search = Search::new(scorer);
    for &c in &order {
        let rest = classes.without(c).expect("at least two members");
        search.try_candidate(ClassSet::singleton(c), rest)?;
        if search.stopped {
            break;
        }
    }
    Ok(search.finish())
}

/// Scores all `2^(n-1) - 1` unordered bipartitions and returns the best.
///
/// The first group always holds the smallest member. Ties go to the first
/// group whose sorted members compare smallest.
pub fn exhaustive<S>(scorer: &mut S, classes: &ClassSet, cap: usize) -> Result<SplitOutcome>
where
    S: BipartitionScorer + ?Sized,
{
    require_splittable(classes)?;
    let n = classes.len();
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let sorted = classes.sorted();
    let (anchor, others) = sorted.split_first().expect("non-empty");
    let full = (1u64 << (n - 1)) - 1;
    let mut best: Option<BestSplit> = None;
    let mut evaluations = 0;
    for mask in 0..full {
        let mut c0 = vec![*anchor];
        let mut c1 = Vec::new();
        for (i, &c) in others.iter().enumerate() {
            if mask >> i & 1 == 1 {
                c0.push(c);
            } else {
                c1.push(c);
            }
        }
        let (c0, c1) = (ClassSet::new(c0)?, ClassSet::new(c1)?);
        let score = scorer.score(&c0, &c1)?;
        evaluations += 1;
        let better = match &best {
            None => true,
            Some(b) => score > b.score || (score == b.score && c0.sorted() < b.c0.sorted()),
        };
        if better {
            best = Some(BestSplit { c0, c1, score });
        }
    }
    let best = best.expect("n >= 2 yields at least one bipartition");
    Ok(SplitOutcome {
        c0: best.c0,
        c1: best.c1,
        score: best.score,
        evaluations,
        early_stopped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Scores 1.0 for {a,b}/{c,d} in either orientation, otherwise by how
    /// many pairs are grouped consistently with it.
    fn latent_pairs(c0: &ClassSet, c1: &ClassSet) -> Result<f64> {
        let group = |c: usize| c / 2;
        let pure = |s: &ClassSet| s.iter().all(|c| group(c) == group(s.min()));
        if pure(c0) && pure(c1) && c0.len() == 2 && c1.len() == 2 {
            return Ok(1.0);
        }
        let together = [(0, 1), (2, 3)]
            .iter()
            .filter(|(a, b)| c0.contains(*a) == c0.contains(*b))
            .count();
        Ok(0.2 + 0.2 * together as f64 + 0.01 * c0.len() as f64)
    }

    fn set(v: &[usize]) -> ClassSet {
        ClassSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_members_single_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut calls = 0;
        let mut scorer = |_: &ClassSet, _: &ClassSet| {
            calls += 1;
            Ok(0.5)
        };
        let pair = set(&[3, 7]);
        for f in [potr::<_, ChaCha8Rng>, srtr] {
            let o = f(&mut scorer, &pair, &mut rng).unwrap();
            assert_eq!(o.evaluations, 1);
            assert_eq!(o.c0.len() + o.c1.len(), 2);
        }
        let o = lsoo(&mut scorer, &pair, &mut rng).unwrap();
        assert!(o.evaluations <= 2);
        assert_eq!(exhaustive(&mut scorer, &pair, 12).unwrap().evaluations, 1);
    }

    #[test]
    fn potr_moves_partner_then_stops() {
        // Seed whose first pick is class 0.
        let seed = (0..1000u64)
            .find(|&s| ChaCha8Rng::seed_from_u64(s).random_range(0..4usize) == 0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = potr(&mut latent_pairs, &set(&[0, 1, 2, 3]), &mut rng).unwrap();
        assert_eq!(o.c0, set(&[0, 1]));
        assert_eq!(o.c1, set(&[2, 3]));
        assert_eq!(o.score, 1.0);
        assert_eq!(o.evaluations, 2);
        assert!(o.early_stopped);
    }

    #[test]
    fn lsoo_returns_singleton_first() {
        let salient = |c0: &ClassSet, _: &ClassSet| Ok(if c0 == &set(&[2]) { 1.0 } else { 0.4 });
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = salient;
            let o = lsoo(&mut s, &set(&[0, 1, 2, 3]), &mut rng).unwrap();
            assert_eq!(o.c0, set(&[2]));
            assert_eq!(o.score, 1.0);
            assert!(o.evaluations <= 4);
        }
    }

    #[test]
    fn exhaustive_counts_and_optimum() {
        let o = exhaustive(&mut latent_pairs, &set(&[0, 1, 2, 3]), 12).unwrap();
        assert_eq!(o.evaluations, 7);
        assert_eq!((o.c0, o.c1, o.score), (set(&[0, 1]), set(&[2, 3]), 1.0));
        assert!(matches!(
            exhaustive(&mut latent_pairs, &ClassSet::range(13), 12),
            Err(Error::CapExceeded { size: 13, cap: 12 })
        ));
    }

    #[test]
    fn exhaustive_tie_break_prefers_smallest_first_group() {
        let flat = |_: &ClassSet, _: &ClassSet| Ok(0.5);
        let mut s = flat;
        let o = exhaustive(&mut s, &set(&[4, 1, 9]), 12).unwrap();
        assert_eq!(o.c0.sorted(), vec![1]);
    }

    #[test]
    fn scorer_errors_propagate() {
        let mut failing = |_: &ClassSet, _: &ClassSet| Err(Error::Scoring("boom".into()));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(potr(&mut failing, &set(&[0, 1, 2]), &mut rng).is_err());
        assert!(srtr(&mut failing, &set(&[0, 1, 2]), &mut rng).is_err());
        assert!(lsoo(&mut failing, &set(&[0, 1, 2]), &mut rng).is_err());
        assert!(exhaustive(&mut failing, &set(&[0, 1, 2]), 12).is_err());
        assert!(potr(&mut failing, &set(&[0]), &mut rng).is_err());
    }
}
