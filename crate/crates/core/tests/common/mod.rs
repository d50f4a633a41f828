#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tree_shapley::generate::{all_shapes, random_tree, random_tree_shuffled};
use tree_shapley::{Coalition, NodeId, Rational, RootedTree, TreeGame, ValueFunction};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn tree(e: &[(u64, u64)], root: u64) -> RootedTree {
    let e: Vec<_> = e.iter().map(|&(c, p)| (NodeId(c), NodeId(p))).collect();
    RootedTree::build(&e, NodeId(root)).unwrap()
}

pub fn f9() -> RootedTree {
    tree(&[(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4), (9, 4)], 1)
}

/// Every shape up to `max_n` plus `random` seeded random trees of size `random_n`.
pub fn corpus(max_n: usize, random: usize, random_n: usize, seed: u64) -> Vec<RootedTree> {
    let mut out: Vec<RootedTree> = (1..=max_n).flat_map(all_shapes).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    for k in 0..random {
        if k % 2 == 0 {
            out.push(random_tree(&mut rng, random_n));
        } else {
            out.push(random_tree_shuffled(&mut rng, random_n));
        }
    }
    out
}

/// Coalition from the bits of `mask` over the tree's ascending ids.
pub fn coalition(t: &RootedTree, mask: u64) -> Coalition {
    (0..t.len()).filter(|&v| mask >> v & 1 == 1).map(|v| t.id(v)).collect()
}

/// Parent-closed and root-containing (or empty), checked via explicit
/// ancestor sets rather than the trimming routine.
pub fn is_trimmed_oracle(t: &RootedTree, c: &Coalition) -> bool {
    if c.is_empty() {
        return true;
    }
    c.iter().all(|i| t.ancestors(i).unwrap().iter().all(|a| c.contains(a)))
}

/// Largest parent-closed root-containing subset, by definition.
pub fn trim_oracle(t: &RootedTree, c: &Coalition) -> Coalition {
    c.iter().filter(|&i| t.ancestors(i).unwrap().iter().all(|a| c.contains(a))).collect()
}

/// All trimmed sets by exhaustive scan, sorted lexicographically.
pub fn trimmed_oracle(t: &RootedTree) -> Vec<Coalition> {
    let mut out: Vec<Coalition> =
        (0..1u64 << t.len()).map(|m| coalition(t, m)).filter(|c| is_trimmed_oracle(t, c)).collect();
    out.sort();
    out
}

const VALUE_POOL: [(i64, i64); 8] = [(0, 1), (1, 1), (2, 1), (1, 2), (-1, 1), (3, 4), (5, 1), (7, 3)];

/// An explicit value function covering every trimmed set, values drawn from a
/// fixed pool.
pub fn random_explicit<R: Rng>(rng: &mut R, t: &RootedTree) -> ValueFunction<Rational> {
    let table: BTreeMap<Coalition, Rational> = t
        .trimmed_sets()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (n, d) = VALUE_POOL[rng.gen_range(0..VALUE_POOL.len())];
            (s.to_coalition(t), q(n, d))
        })
        .collect();
    ValueFunction::Explicit(table)
}

pub fn random_explicit_game<R: Rng>(rng: &mut R, t: &RootedTree) -> TreeGame {
    let f = random_explicit(rng, t);
    TreeGame::new(t.clone(), f).unwrap()
}
