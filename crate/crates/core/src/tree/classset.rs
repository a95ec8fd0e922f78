use std::fmt;
use std::hash::{Hash, Hasher};

use crate::dataset::ClassId;
use crate::error::{Error, Result};

/// Non-empty set of class ids.
///
/// Members keep the order they were given in so that the nested-set text
/// form round-trips; equality and hashing ignore order.
#[derive(Clone, Debug)]
pub struct ClassSet {
    members: Vec<ClassId>,
}

impl ClassSet {
    pub fn new(members: Vec<ClassId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidTree("empty class set".into()));
        }
        let mut sorted = members.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTree(format!("duplicate class in set {members:?}")));
        }
        Ok(Self { members })
    }

    pub fn singleton(c: ClassId) -> Self {
        Self { members: vec![c] }
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ClassId] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, c: ClassId) -> bool {
        self.members.contains(&c)
    }

    pub fn sorted(&self) -> Vec<ClassId> {
        let mut v = self.members.clone();
        v.sort_unstable();
        v
    }

    pub fn min(&self) -> ClassId {
        *self.members.iter().min().expect("class sets are non-empty")
    }

    pub fn is_disjoint(&self, other: &ClassSet) -> bool {
        self.members.iter().all(|c| !other.contains(*c))
    }

    /// Order-preserving union of two disjoint sets.
    pub fn union(&self, other: &ClassSet) -> ClassSet {
        let mut members = self.members.clone();
        members.extend(other.iter().filter(|c| !self.contains(*c)));
        ClassSet { members }
    }

    /// `self` without `c`; `None` if that would leave the set empty.
    pub fn without(&self, c: ClassId) -> Option<ClassSet> {
        let members: Vec<_> = self.iter().filter(|&m| m != c).collect();
        (!members.is_empty()).then_some(ClassSet { members })
    }

    pub fn with(&self, c: ClassId) -> ClassSet {
        let mut members = self.members.clone();
        if !members.contains(&c) {
            members.push(c);
        }
        ClassSet { members }
    }
}

impl PartialEq for ClassSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.sorted() == other.sorted()
    }
}

impl Eq for ClassSet {}

impl Hash for ClassSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.sorted().hash(state);
    }
}

impl fmt::Display for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "c{c}")?;
        }
        write!(f, "}}")
    }
}
