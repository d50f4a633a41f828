//! Streaming enumeration of trimmed coalitions.
//!
//! Sets are produced in lexicographic order of their sorted member lists by
//! extending a sorted prefix one node at a time. A prefix is kept only while
//! every ancestor it still lacks has a larger id than the prefix's last
//! element, so each explored prefix completes to at least one trimmed set and
//! the 2^n candidate space is never touched.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::tree::{NodeId, RootedTree, TrimmedSet};

struct Added {
    node: usize,
    was_required: bool,
    newly_required: Vec<usize>,
}

struct Frame {
    next: usize,
    emitted: bool,
    child: Option<Added>,
}

/// Iterator over trimmed sets; see [`RootedTree::trimmed_sets`].
pub struct TrimmedSets<'t> {
    tree: &'t RootedTree,
    prefix: Vec<usize>,
    in_prefix: Vec<bool>,
    // ancestors of prefix members (and forced nodes) not yet in the prefix
    required: BTreeSet<usize>,
    stack: Vec<Frame>,
}

impl<'t> TrimmedSets<'t> {
    fn new(tree: &'t RootedTree, forced: impl IntoIterator<Item = usize>) -> Self {
        TrimmedSets {
            tree,
            prefix: Vec::new(),
            in_prefix: vec![false; tree.len()],
            required: forced.into_iter().collect(),
            stack: vec![Frame { next: 0, emitted: false, child: None }],
        }
    }

    fn try_add(&mut self, x: usize) -> Option<Added> {
        let was_required = self.required.remove(&x);
        let mut newly_required = Vec::new();
        let mut u = self.tree.parent_index(x);
        while let Some(p) = u {
            if self.in_prefix[p] || self.required.contains(&p) {
                break;
            }
            if p < x {
                for r in newly_required {
                    self.required.remove(&r);
                }
                if was_required {
                    self.required.insert(x);
                }
                return None;
            }
            self.required.insert(p);
            newly_required.push(p);
            u = self.tree.parent_index(p);
        }
        self.in_prefix[x] = true;
        self.prefix.push(x);
        Some(Added { node: x, was_required, newly_required })
    }

    fn undo(&mut self, a: Added) {
        self.prefix.pop();
        self.in_prefix[a.node] = false;
        for r in a.newly_required {
            self.required.remove(&r);
        }
        if a.was_required {
            self.required.insert(a.node);
        }
    }
}

impl Iterator for TrimmedSets<'_> {
    type Item = TrimmedSet;

    fn next(&mut self) -> Option<TrimmedSet> {
        let n = self.tree.len();
        loop {
            let top = self.stack.len().checked_sub(1)?;
            if !self.stack[top].emitted {
                self.stack[top].emitted = true;
                if self.required.is_empty() {
                    return Some(TrimmedSet::from_sorted(self.prefix.clone()));
                }
            }
            if let Some(a) = self.stack[top].child.take() {
                self.undo(a);
            }
            let hi = self.required.first().copied().unwrap_or(n.saturating_sub(1));
            let mut pushed = false;
            while self.stack[top].next <= hi && self.stack[top].next < n {
                let x = self.stack[top].next;
                self.stack[top].next += 1;
                if let Some(a) = self.try_add(x) {
                    self.stack[top].child = Some(a);
                    self.stack.push(Frame { next: x + 1, emitted: false, child: None });
                    pushed = true;
                    break;
                }
            }
            if !pushed {
                self.stack.pop();
            }
        }
    }
}

impl RootedTree {
    /// Every trimmed set, the empty set first, in lexicographic order.
    pub fn trimmed_sets(&self) -> TrimmedSets<'_> {
        TrimmedSets::new(self, [])
    }

    /// Every trimmed set containing `id` (hence all of its ancestors).
    pub fn trimmed_sets_containing(&self, id: NodeId) -> Result<TrimmedSets<'_>> {
        let v = self.index_of(id)?;
        Ok(self.trimmed_sets_containing_index(v))
    }

    pub(crate) fn trimmed_sets_containing_index(&self, v: usize) -> TrimmedSets<'_> {
        let mut forced = vec![v];
        let mut u = v;
        while let Some(p) = self.parent_index(u) {
            forced.push(p);
            u = p;
        }
        TrimmedSets::new(self, forced)
    }
}
