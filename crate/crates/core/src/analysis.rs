//! Core membership, convexity and coalition-count instrumentation.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::game::TreeGame;
use crate::scalar::Scalar;
use crate::shapley::Allocation;
use crate::tree::{Coalition, NodeId, RootedTree};

pub const DEFAULT_CORE_LIMIT: usize = 16;
pub const DEFAULT_CONVEX_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoreViolation<S> {
    pub coalition: Coalition,
    /// `v(C) - sum of x_i over C`, strictly positive.
    pub deficit: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreCheck<S> {
    pub violation: Option<CoreViolation<S>>,
}

impl<S> CoreCheck<S> {
    pub fn in_core(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityWitness<S> {
    pub agent: NodeId,
    pub smaller: Coalition,
    pub larger: Coalition,
    pub mc_smaller: S,
    pub mc_larger: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityCheck<S> {
    pub witness: Option<ConvexityWitness<S>>,
}

impl<S> ConvexityCheck<S> {
    pub fn is_convex(&self) -> bool {
        self.witness.is_none()
    }
}

fn bits_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

fn bits_to_coalition(tree: &RootedTree, mask: u64) -> Coalition {
    bits_to_indices(mask, tree.len()).into_iter().map(|v| tree.id(v)).collect()
}

fn check_limit(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit || n > 63 {
        return Err(Error::LimitExceeded { what, n, limit: limit.min(63) });
    }
    Ok(())
}

/// Checks `sum over C of x_i >= v(C)` for every coalition. The reported
/// violator is the lexicographically smallest one.
pub fn is_in_core<S: Scalar>(game: &TreeGame<S>, allocation: &Allocation<S>, limit: usize) -> Result<CoreCheck<S>> {
    let tree = game.tree();
    let n = tree.len();
    check_limit(n, limit, "core check")?;
    let x = allocation.dense_for(tree)?;
    let grand = game.grand_value()?;
    if *allocation.total() != grand {
        return Err(Error::AllocationMismatch(format!(
            "allocation total {:?} differs from the grand coalition value {:?}",
            allocation.total(),
            grand
        )));
    }

    let mut best: Option<(Vec<usize>, S)> = None;
    for mask in 1..1u64 << n {
        let v = game.value_bits(mask)?;
        let paid: S = bits_to_indices(mask, n).into_iter().map(|i| x[i].clone()).sum();
        if v > paid {
            let members = bits_to_indices(mask, n);
            if best.as_ref().is_none_or(|(b, _)| members < *b) {
                best = Some((members, v - paid));
            }
        }
    }
    Ok(CoreCheck {
        violation: best.map(|(members, deficit)| CoreViolation {
            coalition: members.into_iter().map(|v| tree.id(v)).collect(),
            deficit,
        }),
    })
}

/// Checks `mc(i, C) <= mc(i, C')` for all `C ⊂ C'` and `i ∉ C'`. The witness
/// is the smallest by `(C, C', i)` in lexicographic order.
pub fn is_convex<S: Scalar>(game: &TreeGame<S>, limit: usize) -> Result<ConvexityCheck<S>> {
    let tree = game.tree();
    let n = tree.len();
    check_limit(n, limit, "convexity check")?;
    let values = game.value_table()?;
    let full = (1u64 << n) - 1;
    let mc = |i: usize, m: u64| values[(m | 1 << i) as usize].clone() - values[m as usize].clone();

    let mut best: Option<(Vec<usize>, Vec<usize>, usize)> = None;
    for larger in 0..=full {
        let outside = full & !larger;
        for i in bits_to_indices(outside, n) {
            let mc_large = mc(i, larger);
            // proper submasks of `larger`
            let mut smaller = larger;
            while smaller != 0 {
                smaller = (smaller - 1) & larger;
                if mc(i, smaller) > mc_large {
                    let key = (bits_to_indices(smaller, n), bits_to_indices(larger, n), i);
                    if best.as_ref().is_none_or(|b| key < *b) {
                        best = Some(key);
                    }
                }
            }
        }
    }

    Ok(ConvexityCheck {
        witness: best.map(|(s, l, i)| {
            let sm: u64 = s.iter().map(|&v| 1u64 << v).sum();
            let lg: u64 = l.iter().map(|&v| 1u64 << v).sum();
            ConvexityWitness {
                agent: tree.id(i),
                smaller: bits_to_coalition(tree, sm),
                larger: bits_to_coalition(tree, lg),
                mc_smaller: mc(i, sm),
                mc_larger: mc(i, lg),
            }
        }),
    })
}

/// Number of parent-closed sets in `T_v` that contain `v`:
/// `t(v) = product over children c of (1 + t(c))`.
fn rooted_closed_counts(tree: &RootedTree) -> Vec<BigUint> {
    let mut t = vec![BigUint::one(); tree.len()];
    for &v in tree.bfs_order().iter().rev() {
        let mut acc = BigUint::one();
        for &c in tree.children_indices(v) {
            acc *= &t[c] + 1u32;
        }
        t[v] = acc;
    }
    t
}

fn count_containing(tree: &RootedTree, t: &[BigUint], v: usize) -> BigUint {
    let mut acc = t[v].clone();
    let mut forced = v;
    while let Some(p) = tree.parent_index(forced) {
        for &c in tree.children_indices(p) {
            if c != forced {
                acc *= &t[c] + 1u32;
            }
        }
        forced = p;
    }
    acc
}

/// `|{C ∈ Trimmed(T) : id ∈ C}|` by dynamic programming.
pub fn count_trimmed_containing(tree: &RootedTree, id: NodeId) -> Result<BigUint> {
    let v = tree.index_of(id)?;
    Ok(count_containing(tree, &rooted_closed_counts(tree), v))
}

/// `|Trimmed(T)|`, the empty set included.
pub fn count_trimmed(tree: &RootedTree) -> BigUint {
    rooted_closed_counts(tree)[tree.root_index()].clone() + 1u32
}

/// `y_0 = 0`, `y_j = (y_{j-1} + 1)^2`.
fn binary_y(j: usize) -> BigUint {
    let mut y = BigUint::from(0u32);
    for _ in 0..j {
        let s = y + 1u32;
        y = &s * &s;
    }
    y
}

/// Trimmed sets containing a node of depth `d` in a complete binary tree of
/// height `h`: `(y_{h-d} + 1)^2 · prod_{j=h-d+1}^{h} (y_j + 1)`.
pub fn binary_tree_count(h: usize, d: usize) -> Result<BigUint> {
    if d > h {
        return Err(Error::InvalidArgument(format!("depth {d} exceeds height {h}")));
    }
    let base = binary_y(h - d) + 1u32;
    let mut acc = &base * &base;
    for j in h - d + 1..=h {
        acc *= binary_y(j) + 1u32;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityRow {
    pub node: NodeId,
    pub depth: usize,
    /// Coalitions a generic game must visit: `2^(n-1)`.
    pub cfg_count: BigUint,
    /// Trimmed coalitions containing the node.
    pub tree_game_count: BigUint,
    /// Terms of the closed form: `height(T_i) + 1`.
    pub basic_count: usize,
}

pub fn complexity_table(tree: &RootedTree) -> Vec<ComplexityRow> {
    let t = rooted_closed_counts(tree);
    let cfg = BigUint::one() << (tree.len() - 1);
    (0..tree.len())
        .map(|v| ComplexityRow {
            node: tree.id(v),
            depth: tree.depth_of_index(v),
            cfg_count: cfg.clone(),
            tree_game_count: count_containing(tree, &t, v),
            basic_count: tree.subtree_height_of_index(v) + 1,
        })
        .collect()
}

/// True when every internal node has exactly two children and all leaves
/// share the same depth.
pub fn is_complete_binary(tree: &RootedTree) -> bool {
    let h = tree.height();
    (0..tree.len()).all(|v| match tree.children_indices(v).len() {
        0 => tree.depth_of_index(v) == h,
        2 => true,
        _ => false,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use num_rational::BigRational;

    use super::*;
    use crate::game::ValueFunction;
    use crate::shapley::shapley_basic;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn tree(e: &[(u64, u64)]) -> RootedTree {
        let e: Vec<_> = e.iter().map(|&(c, p)| (NodeId(c), NodeId(p))).collect();
        RootedTree::build(&e, NodeId(1)).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn core_examples() {
        let t = tree(&[(3, 1), (6, 3), (7, 3)]);
        let g = TreeGame::<Q>::basic(t.clone());
        assert!(is_in_core(&g, &shapley_basic(&t), 16).unwrap().in_core());

        let chain = tree(&[(2, 1)]);
        let g = TreeGame::basic(chain);
        let x = Allocation::new([(NodeId(1), q(0, 1)), (NodeId(2), q(2, 1))]).unwrap();
        let v = is_in_core(&g, &x, 16).unwrap().violation.unwrap();
        assert_eq!(v.coalition, Coalition::from([1]));
        assert_eq!(v.deficit, q(1, 1));

        let single = RootedTree::single(NodeId(1)).unwrap();
        let g = TreeGame::<Q>::basic(single.clone());
        assert!(is_in_core(&g, &shapley_basic(&single), 16).unwrap().in_core());
    }

    #[test]
    fn core_rejects_wrong_total() {
        let chain = tree(&[(2, 1)]);
        let g = TreeGame::basic(chain);
        let x = Allocation::new([(NodeId(1), q(1, 1)), (NodeId(2), q(2, 1))]).unwrap();
        assert!(matches!(is_in_core(&g, &x, 16), Err(Error::AllocationMismatch(_))));
    }

    #[test]
    fn convexity_examples() {
        let g = TreeGame::<Q>::basic(tree(&[(3, 1), (6, 3), (7, 3), (2, 1)]));
        assert!(is_convex(&g, 12).unwrap().is_convex());

        let table: BTreeMap<_, _> =
            [(Coalition::from([1]), q(2, 1)), (Coalition::from([1, 2]), q(1, 1))].into_iter().collect();
        let g = TreeGame::new(tree(&[(2, 1)]), ValueFunction::Explicit(table)).unwrap();
        let w = is_convex(&g, 12).unwrap().witness.unwrap();
        assert_eq!(w.agent, NodeId(2));
        assert_eq!(w.smaller, Coalition::new());
        assert_eq!(w.larger, Coalition::from([1]));
        assert_eq!(w.mc_smaller, q(0, 1));
        assert_eq!(w.mc_larger, q(-1, 1));

        let null = TreeGame::basic(tree(&[(2, 1), (3, 1)])).scale(&q(0, 1));
        assert!(is_convex(&null, 12).unwrap().is_convex());
    }

    #[test]
    fn counting_examples() {
        let chain5 = tree(&[(2, 1), (3, 2), (4, 3), (5, 4)]);
        assert_eq!(count_trimmed_containing(&chain5, NodeId(3)).unwrap(), big(3));
        let star = tree(&[(2, 1), (3, 1), (4, 1)]);
        assert_eq!(count_trimmed_containing(&star, NodeId(2)).unwrap(), big(4));
        let f9 = tree(&[(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4), (9, 4)]);
        assert_eq!(count_trimmed_containing(&f9, NodeId(8)).unwrap(), big(20));
        assert_eq!(count_trimmed(&star), big(9));
    }

    #[test]
    fn binary_counts() {
        assert_eq!(binary_tree_count(1, 0).unwrap(), big(4));
        assert_eq!(binary_tree_count(2, 1).unwrap(), big(20));
        assert_eq!(binary_tree_count(1, 1).unwrap(), big(2));
        assert!(binary_tree_count(1, 2).is_err());
    }

    #[test]
    fn complexity_rows() {
        let chain = tree(&[(2, 1), (3, 2)]);
        let rows: Vec<_> =
            complexity_table(&chain).into_iter().map(|r| (r.cfg_count, r.tree_game_count, r.basic_count)).collect();
        assert_eq!(rows, vec![(big(4), big(3), 3), (big(4), big(2), 2), (big(4), big(1), 1)]);
        let star = tree(&[(2, 1), (3, 1), (4, 1)]);
        let leaf = &complexity_table(&star)[1];
        assert_eq!((leaf.cfg_count.clone(), leaf.tree_game_count.clone(), leaf.basic_count), (big(8), big(4), 1));
        let single = RootedTree::single(NodeId(1)).unwrap();
        let r = &complexity_table(&single)[0];
        assert_eq!((r.cfg_count.clone(), r.tree_game_count.clone(), r.basic_count), (big(1), big(1), 1));
    }

    #[test]
    fn limits() {
        let e: Vec<(u64, u64)> = (2..=14).map(|k| (k, 1)).collect();
        let g = TreeGame::<Q>::basic(tree(&e));
        assert!(matches!(is_convex(&g, 12), Err(Error::LimitExceeded { .. })));
    }
}
