//! Nested-set text form, e.g. `{{{c0,c1},{c2}},{{c0},{c1}}}`.
//!
//! The outer braces hold the parents; each parent is a brace pair of two
//! class-sets. Whitespace is ignored on input and never emitted.

use super::{ClassSet, HierarchyTree};
use crate::dataset::ClassId;
use crate::error::{Error, Result};

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<ClassId>,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::InvalidTree(format!("nested-set text, offset {}: {}", self.pos, msg.into()))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            other => Err(self.err(format!("expected '{c}', found {other:?}"))),
        }
    }

    fn token(&mut self) -> Result<ClassId> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c != ',' && c != '{' && c != '}') {
            self.pos += 1;
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        if tok.is_empty() {
            return Err(self.err("empty class name"));
        }
        (self.resolve)(&tok).ok_or_else(|| self.err(format!("unknown class '{tok}'")))
    }

    fn set(&mut self) -> Result<ClassSet> {
        self.expect('{')?;
        let mut members = vec![self.token()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            members.push(self.token()?);
        }
        self.expect('}')?;
        ClassSet::new(members)
    }

    fn pair(&mut self) -> Result<(ClassSet, ClassSet)> {
        self.expect('{')?;
        let left = self.set()?;
        self.expect(',')?;
        let right = self.set()?;
        self.expect('}')?;
        Ok((left, right))
    }

    fn tree(&mut self) -> Result<Vec<(ClassSet, ClassSet)>> {
        self.expect('{')?;
        let mut pairs = vec![self.pair()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            pairs.push(self.pair()?);
        }
        self.expect('}')?;
        if self.pos != self.chars.len() {
            return Err(self.err("trailing characters"));
        }
        Ok(pairs)
    }
}

/// Parses class names through `resolve`.
pub fn parse_nested_with(text: &str, resolve: &dyn Fn(&str) -> Option<ClassId>) -> Result<HierarchyTree> {
    let mut cur = Cursor {
        chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
        resolve,
    };
    HierarchyTree::build(cur.tree()?)
}

/// Parses names of the form `c<id>` or a bare `<id>`.
pub fn parse_nested(text: &str) -> Result<HierarchyTree> {
    parse_nested_with(text, &|tok| tok.strip_prefix('c').unwrap_or(tok).parse().ok())
}

pub fn format_nested_with(tree: &HierarchyTree, name: &dyn Fn(ClassId) -> String) -> String {
    let set = |s: &ClassSet| {
        let names: Vec<String> = s.iter().map(name).collect();
        format!("{{{}}}", names.join(","))
    };
    let pairs: Vec<String> = tree
        .parents()
        .iter()
        .map(|p| format!("{{{},{}}}", set(&p.left), set(&p.right)))
        .collect();
    format!("{{{}}}", pairs.join(","))
}

/// Emits names as `c<id>`.
pub fn format_nested(tree: &HierarchyTree) -> String {
    format_nested_with(tree, &|c| format!("c{c}"))
}
