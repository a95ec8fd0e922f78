//! Tree similarity: equality up to sibling order and member order.

use serde::{Deserialize, Serialize};

use super::{ClassSet, HierarchyTree};
use crate::error::{Error, Result};

/// Order-insensitive signature of a tree; equal for similar trees only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// Children ordered by smallest member, then size.
fn ordered<'a>(a: &'a ClassSet, b: &'a ClassSet) -> (&'a ClassSet, &'a ClassSet, bool) {
    if (a.min(), a.len()) <= (b.min(), b.len()) {
        (a, b, false)
    } else {
        (b, a, true)
    }
}

fn push_set(out: &mut Vec<u8>, set: &ClassSet) {
    for (i, c) in set.sorted().into_iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        out.extend_from_slice(c.to_string().as_bytes());
    }
}

pub fn canonicalize(tree: &HierarchyTree) -> CanonicalForm {
    let mut out = Vec::new();
    let mut stack = vec![tree.root_id()];
    while let Some(p) = stack.pop() {
        let node = &tree.parents()[p];
        let (first, second, swapped) = ordered(&node.left, &node.right);
        push_set(&mut out, first);
        out.push(b'|');
        push_set(&mut out, second);
        out.push(b';');
        let (first_child, second_child) = if swapped {
            (tree.child(p, true), tree.child(p, false))
        } else {
            (tree.child(p, false), tree.child(p, true))
        };
        stack.extend(second_child);
        stack.extend(first_child);
    }
    CanonicalForm(out)
}

/// Pre-order walk of both trees comparing each pair of corresponding
/// parents as unordered pairs of unordered class-sets.
pub fn trees_similar(a: &HierarchyTree, b: &HierarchyTree) -> Result<bool> {
    if a.label_space() != b.label_space() {
        return Err(Error::LabelSpaceMismatch(format!(
            "{} vs {}",
            a.label_space(),
            b.label_space()
        )));
    }
    let mut stack = vec![(a.root_id(), b.root_id())];
    while let Some((pa, pb)) = stack.pop() {
        let (na, nb) = (&a.parents()[pa], &b.parents()[pb]);
        let (a0, a1, a_swapped) = ordered(&na.left, &na.right);
        let (b0, b1, b_swapped) = ordered(&nb.left, &nb.right);
        if a0 != b0 || a1 != b1 {
            return Ok(false);
        }
        for first in [true, false] {
            let ca = a.child(pa, a_swapped == first);
            let cb = b.child(pb, b_swapped == first);
            match (ca, cb) {
                (Some(x), Some(y)) => stack.push((x, y)),
                (None, None) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}
