//! Tree generators: standard shapes, seeded random trees and every
//! unlabelled rooted tree of a given size.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::tree::{NodeId, RootedTree};

fn from_parents(parents: &[usize]) -> RootedTree {
    // parents[k] is the parent of node k + 2, nodes numbered from 1
    let edges: Vec<(NodeId, NodeId)> =
        parents.iter().enumerate().map(|(k, &p)| (NodeId(k as u64 + 2), NodeId(p as u64))).collect();
    RootedTree::build(&edges, NodeId(1)).expect("generated trees are valid")
}

/// `1 -> 2 -> ... -> n`.
pub fn chain(n: usize) -> RootedTree {
    from_parents(&(1..n).collect::<Vec<_>>())
}

/// Root 1 with leaves `2..=n`.
pub fn star(n: usize) -> RootedTree {
    from_parents(&vec![1; n.saturating_sub(1)])
}

/// Complete binary tree of height `h` in heap numbering (children of `k` are
/// `2k` and `2k + 1`).
pub fn complete_binary(h: usize) -> RootedTree {
    let n = (1usize << (h + 1)) - 1;
    from_parents(&(2..=n).map(|k| k / 2).collect::<Vec<_>>())
}

/// Random recursive tree on ids `1..=n` rooted at 1: each node picks a uniform
/// parent among the earlier ones.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RootedTree {
    let parents: Vec<usize> = (2..=n).map(|k| rng.gen_range(1..k)).collect();
    from_parents(&parents)
}

/// Random tree whose ids are shuffled, so the root need not be the smallest.
pub fn random_tree_shuffled<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RootedTree {
    let mut labels: Vec<u64> = (1..=n as u64).collect();
    labels.shuffle(rng);
    let parents: Vec<usize> = (1..n).map(|k| rng.gen_range(0..k)).collect();
    let edges: Vec<(NodeId, NodeId)> =
        parents.iter().enumerate().map(|(k, &p)| (NodeId(labels[k + 1]), NodeId(labels[p]))).collect();
    RootedTree::build(&edges, NodeId(labels[0])).expect("generated trees are valid")
}

/// Random tree with depth at most `max_depth`.
pub fn random_tree_bounded<R: Rng + ?Sized>(rng: &mut R, n: usize, max_depth: usize) -> RootedTree {
    let mut depth = vec![0usize; n + 1];
    let mut parents = Vec::with_capacity(n.saturating_sub(1));
    for k in 2..=n {
        let p = loop {
            let p = rng.gen_range(1..k);
            if depth[p] < max_depth {
                break p;
            }
        };
        depth[k] = depth[p] + 1;
        parents.push(p);
    }
    from_parents(&parents)
}

fn canonical(children: &[Vec<usize>], v: usize) -> String {
    let mut parts: Vec<String> = children[v].iter().map(|&c| canonical(children, c)).collect();
    parts.sort();
    format!("({})", parts.concat())
}

/// One representative per isomorphism class of rooted trees with `n` nodes.
pub fn all_shapes(n: usize) -> Vec<RootedTree> {
    assert!(n >= 1);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut parents = vec![1usize; n - 1];
    loop {
        let mut children = vec![Vec::new(); n + 1];
        for (k, &p) in parents.iter().enumerate() {
            children[p].push(k + 2);
        }
        if seen.insert(canonical(&children, 1)) {
            out.push(from_parents(&parents));
        }
        // next parent vector with parents[k] in 1..=k+1
        let mut k = 0;
        loop {
            if k == parents.len() {
                return out;
            }
            if parents[k] < k + 1 {
                parents[k] += 1;
                break;
            }
            parents[k] = 1;
            k += 1;
        }
    }
}
