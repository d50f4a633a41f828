//! Shapley values of tree games.
//!
//! Four routes compute the same numbers:
//! - [`shapley_bruteforce`] averages marginal contributions over all
//!   coalitions (and [`shapley_permutations`] literally over all orders),
//! - [`shapley_general`] sums over trimmed coalitions only,
//! - [`shapley_basic`] is the closed form for `f(C) = |C|`, linear in the
//!   subtree size of each node, and [`shapley_additive`] extends it to
//!   per-node weights.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::game::{TreeGame, ValueFunction};
use crate::scalar::{factorials, ratio_of, Scalar};
use crate::tree::{Coalition, NodeId, RootedTree};

pub const DEFAULT_BRUTEFORCE_LIMIT: usize = 10;

/// Per-node rewards, ascending by node id, with their cached sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation<S> {
    entries: Vec<(NodeId, S)>,
    total: S,
}

impl<S: Scalar> Allocation<S> {
    /// Entries are sorted by id; duplicate ids are rejected.
    pub fn new(entries: impl IntoIterator<Item = (NodeId, S)>) -> Result<Self> {
        let mut entries: Vec<(NodeId, S)> = entries.into_iter().collect();
        entries.sort_by_key(|(id, _)| *id);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateNode(w[0].0));
        }
        let total = S::sum_many(entries.iter().map(|(_, x)| x));
        Ok(Allocation { entries, total })
    }

    /// One entry per tree node, in dense (= ascending id) order.
    pub(crate) fn from_dense(tree: &RootedTree, values: Vec<S>) -> Self {
        let total = S::sum_many(&values);
        let entries = values.into_iter().enumerate().map(|(v, x)| (tree.id(v), x)).collect();
        Allocation { entries, total }
    }

    pub fn zeros(tree: &RootedTree) -> Self {
        Self::from_dense(tree, vec![S::zero(); tree.len()])
    }

    pub fn get(&self, id: NodeId) -> Option<&S> {
        self.entries.binary_search_by_key(&id, |(k, _)| *k).ok().map(|k| &self.entries[k].1)
    }

    pub fn total(&self) -> &S {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &S)> + '_ {
        self.entries.iter().map(|(id, x)| (*id, x))
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|(id, _)| *id)
    }

    pub fn values(&self) -> impl Iterator<Item = &S> + '_ {
        self.entries.iter().map(|(_, x)| x)
    }

    pub fn scaled(&self, k: &S) -> Self {
        let values: Vec<S> = self.values().cloned().collect();
        let entries = self.ids().zip(S::scale_many(&values, k)).collect();
        Allocation { entries, total: self.total.clone() * k.clone() }
    }

    /// Adds `delta` to `id`, which must already be present.
    pub fn add_to(&mut self, id: NodeId, delta: &S) -> Result<()> {
        let k = self.entries.binary_search_by_key(&id, |(k, _)| *k).map_err(|_| Error::UnknownNode(id))?;
        self.entries[k].1 = self.entries[k].1.clone() + delta.clone();
        self.total = self.total.clone() + delta.clone();
        Ok(())
    }

    /// Sum over the members of `c` (missing members count as zero).
    pub fn sum_over(&self, c: &Coalition) -> S {
        c.iter().filter_map(|id| self.get(id).cloned()).sum()
    }

    /// Dense vector aligned with the tree's node order.
    pub(crate) fn dense_for(&self, tree: &RootedTree) -> Result<Vec<S>> {
        if self.len() != tree.len() || self.ids().zip(tree.node_ids()).any(|(a, b)| a != *b) {
            return Err(Error::AllocationMismatch("allocation nodes differ from the tree's nodes".into()));
        }
        Ok(self.values().cloned().collect())
    }
}

/// A join order over all agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<NodeId>,
}

impl Permutation {
    pub fn new(tree: &RootedTree, order: Vec<NodeId>) -> Result<Self> {
        if order.len() != tree.len() {
            return Err(Error::InvalidArgument(format!(
                "permutation has {} entries, tree has {} nodes",
                order.len(),
                tree.len()
            )));
        }
        let mut seen = HashSet::with_capacity(order.len());
        for &id in &order {
            tree.index_of(id)?;
            if !seen.insert(id) {
                return Err(Error::DuplicateNode(id));
            }
        }
        Ok(Permutation { order })
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// Agents preceding `i` in this order.
    pub fn predecessors(&self, i: NodeId) -> Result<Coalition> {
        let pos = self.order.iter().position(|&x| x == i).ok_or(Error::UnknownNode(i))?;
        Ok(self.order[..pos].iter().copied().collect())
    }
}

fn check_limit(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit || n > 63 {
        return Err(Error::LimitExceeded { what, n, limit: limit.min(63) });
    }
    Ok(())
}

/// Exhaustive Shapley values: `Sh_i = sum over C ⊆ N∖{i} of
/// |C|!(n-|C|-1)!/n! · (v(C ∪ {i}) - v(C))`.
pub fn shapley_bruteforce<S: Scalar>(game: &TreeGame<S>, limit: usize) -> Result<Allocation<S>> {
    let tree = game.tree();
    let n = tree.len();
    check_limit(n, limit, "brute-force Shapley")?;
    let values = game.value_table()?;
    let fact = factorials(n);
    let weights: Vec<S> =
        (0..n).map(|s| S::from_big_ratio(&ratio_of(&(&fact[s] * &fact[n - s - 1]), &fact[n]))).collect();

    let mut sh = vec![S::zero(); n];
    for mask in 0..1u64 << n {
        let size = mask.count_ones() as usize;
        for (i, acc) in sh.iter_mut().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            let mc = values[(mask | 1 << i) as usize].clone() - values[mask as usize].clone();
            if !mc.is_zero() {
                *acc = acc.clone() + weights[size].clone() * mc;
            }
        }
    }
    Ok(Allocation::from_dense(tree, sh))
}

/// Shapley values by averaging over every one of the `n!` join orders.
pub fn shapley_permutations<S: Scalar>(game: &TreeGame<S>, limit: usize) -> Result<Allocation<S>> {
    let tree = game.tree();
    let n = tree.len();
    check_limit(n, limit, "permutation Shapley")?;
    let values = game.value_table()?;
    let mut sh = vec![S::zero(); n];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut accumulate = |perm: &[usize]| {
        let mut before = 0u64;
        for &i in perm {
            let after = before | 1 << i;
            sh[i] = sh[i].clone() + values[after as usize].clone() - values[before as usize].clone();
            before = after;
        }
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    accumulate(&perm);
    let mut k = 1;
    while k < n {
        if c[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(c[k], k);
            }
            accumulate(&perm);
            c[k] += 1;
            k = 1;
        } else {
            c[k] = 0;
            k += 1;
        }
    }
    let nfact = S::from_big_ratio(&BigRational::from_integer(factorials(n)[n].clone().into()));
    Ok(Allocation::from_dense(tree, sh.into_iter().map(|x| x / nfact.clone()).collect()))
}

/// Shapley values of a general tree game as a sum over trimmed coalitions
/// containing each agent:
/// `Sh_i = sum |adj(C)|!(|C|-1)!/(|C|+|adj(C)|)! · (f(C) - f(C ∖ N(T_i)))`.
pub fn shapley_general<S: Scalar>(game: &TreeGame<S>) -> Result<Allocation<S>> {
    let tree = game.tree();
    let n = tree.len();
    let fact = factorials(n);
    let mut coefficient_cache: Vec<Vec<Option<S>>> = vec![vec![None; n + 1]; n + 1];
    let mut sh = Vec::with_capacity(n);
    let mut in_set = vec![false; n];
    let mut in_subtree = vec![false; n];

    for i in 0..n {
        for v in tree.subtree_indices(i) {
            in_subtree[v] = true;
        }
        let mut acc = S::zero();
        for c in tree.trimmed_sets_containing_index(i) {
            let members = c.indices();
            for &v in members {
                in_set[v] = true;
            }
            let adj = tree.adjacent_count_trimmed(members, &in_set);
            let size = members.len();
            let coef = coefficient_cache[size][adj]
                .get_or_insert_with(|| {
                    let num: BigUint = &fact[adj] * &fact[size - 1];
                    S::from_big_ratio(&ratio_of(&num, &fact[size + adj]))
                })
                .clone();
            let truncated: Vec<usize> = members.iter().copied().filter(|&v| !in_subtree[v]).collect();
            // removing a whole subtree keeps the set parent-closed
            debug_assert!(truncated.iter().all(|&v| tree.parent_index(v).is_none_or(|p| !in_subtree[p] && in_set[p])));
            let diff = game.eval_trimmed(members)? - game.eval_trimmed(&truncated)?;
            acc = acc + coef * diff;
            for &v in members {
                in_set[v] = false;
            }
        }
        for v in tree.subtree_indices(i) {
            in_subtree[v] = false;
        }
        sh.push(acc);
    }
    Ok(Allocation::from_dense(tree, sh))
}

/// Closed form for the basic game:
/// `Sh_i = sum_j |Level_j(T_i)| / (depth(i) + j + 1)`.
pub fn shapley_basic<S: Scalar>(tree: &RootedTree) -> Allocation<S> {
    let sh = (0..tree.len())
        .map(|v| {
            let base = tree.depth_of_index(v) as u64 + 1;
            let levels = tree.subtree_level_counts(v);
            S::unit_fraction_sum(levels.into_iter().enumerate().map(|(j, c)| (c, base + j as u64)))
        })
        .collect();
    Allocation::from_dense(tree, sh)
}

/// Closed form for `Basic` and `LinearWeights` games: node `j` with weight
/// `w_j` pays `w_j / (depth(j) + 1)` to itself and to each of its ancestors.
pub fn shapley_additive<S: Scalar>(game: &TreeGame<S>) -> Result<Allocation<S>> {
    let tree = game.tree();
    let n = tree.len();
    let weight = |v: usize| -> Result<S> {
        match game.value_function() {
            ValueFunction::Basic => Ok(S::one()),
            ValueFunction::LinearWeights(w) => Ok(w[&tree.id(v)].clone()),
            _ => Err(Error::InvalidArgument("additive route needs a basic or linear-weight game".into())),
        }
    };
    let mut sh = vec![S::zero(); n];
    for v in 0..n {
        let share = weight(v)? / S::from_count(tree.depth_of_index(v) as u64 + 1);
        let mut cur = Some(v);
        while let Some(u) = cur {
            sh[u] = sh[u].clone() + share.clone();
            cur = tree.parent_index(u);
        }
    }
    Ok(Allocation::from_dense(tree, sh))
}

/// Subtracts one referral unit from the root's reward.
pub fn root_adjust<S: Scalar>(allocation: &Allocation<S>, root: NodeId, unit: &S) -> Result<Allocation<S>> {
    let mut out = allocation.clone();
    out.add_to(root, &(-unit.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::game::ValueFunction;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn tree(e: &[(u64, u64)]) -> RootedTree {
        let e: Vec<_> = e.iter().map(|&(c, p)| (NodeId(c), NodeId(p))).collect();
        RootedTree::build(&e, NodeId(1)).unwrap()
    }

    fn values(a: &Allocation<Q>) -> Vec<Q> {
        a.values().cloned().collect()
    }

    fn example1() -> RootedTree {
        tree(&[(3, 1), (6, 3), (7, 3)])
    }

    #[test]
    fn bruteforce_two_chain_explicit() {
        let table: BTreeMap<_, _> =
            [(Coalition::from([1]), q(1, 1)), (Coalition::from([1, 2]), q(2, 1))].into_iter().collect();
        let g = TreeGame::new(tree(&[(2, 1)]), ValueFunction::Explicit(table)).unwrap();
        assert_eq!(values(&shapley_bruteforce(&g, 10).unwrap()), vec![q(3, 2), q(1, 2)]);
        assert_eq!(values(&shapley_general(&g).unwrap()), vec![q(3, 2), q(1, 2)]);
    }

    #[test]
    fn example1_all_routes() {
        let g = TreeGame::<Q>::basic(example1());
        let expect = vec![q(13, 6), q(7, 6), q(1, 3), q(1, 3)];
        assert_eq!(values(&shapley_bruteforce(&g, 10).unwrap()), expect);
        assert_eq!(values(&shapley_permutations(&g, 8).unwrap()), expect);
        assert_eq!(values(&shapley_general(&g).unwrap()), expect);
        assert_eq!(values(&shapley_basic(g.tree())), expect);
    }

    #[test]
    fn single_node() {
        let t = RootedTree::single(NodeId(1)).unwrap();
        let g = TreeGame::<Q>::basic(t.clone());
        assert_eq!(values(&shapley_bruteforce(&g, 10).unwrap()), vec![q(1, 1)]);
        assert_eq!(values(&shapley_general(&g).unwrap()), vec![q(1, 1)]);
        assert_eq!(values(&shapley_basic(&t)), vec![q(1, 1)]);
        let adj = root_adjust(&shapley_basic(&t), NodeId(1), &q(1, 1)).unwrap();
        assert_eq!(values(&adj), vec![q(0, 1)]);
    }

    #[test]
    fn star_and_chain() {
        let star = tree(&[(2, 1), (3, 1), (4, 1)]);
        let expect = vec![q(5, 2), q(1, 2), q(1, 2), q(1, 2)];
        assert_eq!(values(&shapley_general(&TreeGame::basic(star.clone())).unwrap()), expect);
        assert_eq!(values(&shapley_basic(&star)), expect);
        let chain = tree(&[(2, 1), (3, 2)]);
        assert_eq!(values(&shapley_basic(&chain)), vec![q(11, 6), q(5, 6), q(1, 3)]);
    }

    #[test]
    fn root_adjustment() {
        let a = shapley_basic::<Q>(&example1());
        let adj = root_adjust(&a, NodeId(1), &q(1, 1)).unwrap();
        assert_eq!(values(&adj), vec![q(7, 6), q(7, 6), q(1, 3), q(1, 3)]);
        assert_eq!(adj.total(), &q(3, 1));
        let scaled = a.scaled(&q(1000, 1));
        let adj = root_adjust(&scaled, NodeId(1), &q(1000, 1)).unwrap();
        assert_eq!(adj.get(NodeId(1)), Some(&q(7000, 6)));
        assert!(root_adjust(&a, NodeId(99), &q(1, 1)).is_err());
    }

    #[test]
    fn limit_enforced() {
        let e: Vec<(u64, u64)> = (2..=12).map(|k| (k, 1)).collect();
        let g = TreeGame::<Q>::basic(tree(&e));
        assert!(matches!(shapley_bruteforce(&g, 10), Err(Error::LimitExceeded { .. })));
    }

    #[test]
    fn permutation_predecessors() {
        let t = example1();
        let p = Permutation::new(&t, vec![NodeId(6), NodeId(1), NodeId(7), NodeId(3)]).unwrap();
        assert_eq!(p.predecessors(NodeId(7)).unwrap(), Coalition::from([1, 6]));
        assert!(Permutation::new(&t, vec![NodeId(6), NodeId(6), NodeId(7), NodeId(3)]).is_err());
        assert!(Permutation::new(&t, vec![NodeId(6)]).is_err());
    }

    #[test]
    fn allocation_rejects_duplicates() {
        assert!(Allocation::new([(NodeId(1), q(1, 1)), (NodeId(1), q(2, 1))]).is_err());
        let a = Allocation::new([(NodeId(2), q(1, 1)), (NodeId(1), q(2, 1))]).unwrap();
        assert_eq!(a.ids().collect::<Vec<_>>(), vec![NodeId(1), NodeId(2)]);
        assert_eq!(a.total(), &q(3, 1));
    }

    #[test]
    fn float_closed_form() {
        let a = shapley_basic::<f64>(&example1());
        let got: Vec<f64> = a.values().copied().collect();
        let expect = [13.0 / 6.0, 7.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }
}
