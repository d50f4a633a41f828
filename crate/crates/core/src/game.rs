//! Tree games: a rooted tree plus a value function over its trimmed sets.
//!
//! A coalition's worth is the value of its trimmed part, so every agent not
//! connected to the root through the coalition contributes nothing.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tree::{Coalition, NodeId, RootedTree, TrimmedSet};

/// The function `f` over trimmed sets.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueFunction<S> {
    /// `f(C) = |C|`.
    Basic,
    /// `f(C) = weights[|C|]`; needs `n + 1` entries with `weights[0] = 0`.
    SizeBased(Vec<S>),
    /// `f(C) = sum of w_i over C`; every node needs a weight.
    LinearWeights(BTreeMap<NodeId, S>),
    /// Explicit table keyed by trimmed sets. Lookups outside the table fail.
    Explicit(BTreeMap<Coalition, S>),
}

#[derive(Clone, Debug)]
enum Compiled<S> {
    Basic,
    SizeBased(Vec<S>),
    Linear(Vec<S>),
    Explicit(HashMap<Vec<usize>, S>),
}

#[derive(Clone, Debug)]
pub struct TreeGame<S> {
    tree: RootedTree,
    f: ValueFunction<S>,
    compiled: Compiled<S>,
}

impl<S: Scalar> TreeGame<S> {
    pub fn new(tree: RootedTree, f: ValueFunction<S>) -> Result<Self> {
        let n = tree.len();
        let compiled = match &f {
            ValueFunction::Basic => Compiled::Basic,
            ValueFunction::SizeBased(w) => {
                if w.len() != n + 1 {
                    return Err(Error::ValueFunction(format!(
                        "size-based weights need {} entries, got {}",
                        n + 1,
                        w.len()
                    )));
                }
                if !w[0].is_zero() {
                    return Err(Error::ValueFunction("size-based weight for the empty set must be 0".into()));
                }
                Compiled::SizeBased(w.clone())
            }
            ValueFunction::LinearWeights(w) => {
                let mut dense = Vec::with_capacity(n);
                for &id in tree.node_ids() {
                    let x = w.get(&id).ok_or_else(|| Error::ValueFunction(format!("no weight for node {id}")))?;
                    dense.push(x.clone());
                }
                if let Some(id) = w.keys().find(|id| !tree.contains(**id)) {
                    return Err(Error::UnknownNode(*id));
                }
                Compiled::Linear(dense)
            }
            ValueFunction::Explicit(table) => {
                let mut dense = HashMap::with_capacity(table.len());
                for (c, x) in table {
                    let t = tree.certify(c).map_err(|e| match e {
                        Error::NotTrimmed => Error::ValueFunction(format!("{c} is not a trimmed coalition")),
                        e => e,
                    })?;
                    if t.is_empty() && !x.is_zero() {
                        return Err(Error::ValueFunction("the empty coalition must have value 0".into()));
                    }
                    dense.insert(t.indices().to_vec(), x.clone());
                }
                Compiled::Explicit(dense)
            }
        };
        Ok(TreeGame { tree, f, compiled })
    }

    pub fn basic(tree: RootedTree) -> Self {
        TreeGame { tree, f: ValueFunction::Basic, compiled: Compiled::Basic }
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn value_function(&self) -> &ValueFunction<S> {
        &self.f
    }

    pub fn is_basic(&self) -> bool {
        matches!(self.compiled, Compiled::Basic)
    }

    /// `f` on a trimmed set given by ascending dense indices.
    pub(crate) fn eval_trimmed(&self, members: &[usize]) -> Result<S> {
        if members.is_empty() {
            return Ok(S::zero());
        }
        match &self.compiled {
            Compiled::Basic => Ok(S::from_count(members.len() as u64)),
            Compiled::SizeBased(w) => Ok(w[members.len()].clone()),
            Compiled::Linear(w) => Ok(members.iter().map(|&v| w[v].clone()).sum()),
            Compiled::Explicit(table) => table
                .get(members)
                .cloned()
                .ok_or_else(|| Error::UncoveredCoalition(members.iter().map(|&v| self.tree.id(v)).collect())),
        }
    }

    pub fn value_of_trimmed(&self, c: &TrimmedSet) -> Result<S> {
        self.eval_trimmed(c.indices())
    }

    /// `v(C) = f(trim(C))`.
    pub fn coalition_value(&self, c: &Coalition) -> Result<S> {
        let t = self.tree.trim(c)?;
        self.eval_trimmed(t.indices())
    }

    /// `v` on a bitmask of dense indices (`n <= 64`).
    pub(crate) fn value_bits(&self, mask: u64) -> Result<S> {
        let t = self.tree.trim_bits(mask);
        if let Compiled::Basic = self.compiled {
            return Ok(S::from_count(t.count_ones() as u64));
        }
        let members: Vec<usize> = (0..self.tree.len()).filter(|&v| t >> v & 1 == 1).collect();
        self.eval_trimmed(&members)
    }

    /// `v` for all `2^n` coalitions, indexed by bitmask.
    pub(crate) fn value_table(&self) -> Result<Vec<S>> {
        let n = self.tree.len();
        (0..1u64 << n).map(|m| self.value_bits(m)).collect()
    }

    /// `v(C ∪ {i}) - v(C)`.
    pub fn marginal_contribution(&self, i: NodeId, c: &Coalition) -> Result<S> {
        if c.contains(i) {
            return Err(Error::AgentInCoalition(i));
        }
        self.tree.index_of(i)?;
        let mut with = c.clone();
        with.insert(i);
        Ok(self.coalition_value(&with)? - self.coalition_value(c)?)
    }

    /// The game with every coalition value multiplied by `k`.
    pub fn scale(&self, k: &S) -> TreeGame<S> {
        let f = match &self.f {
            ValueFunction::Basic => {
                ValueFunction::LinearWeights(self.tree.node_ids().iter().map(|&id| (id, k.clone())).collect())
            }
            ValueFunction::SizeBased(w) => ValueFunction::SizeBased(w.iter().map(|x| x.clone() * k.clone()).collect()),
            ValueFunction::LinearWeights(w) => {
                ValueFunction::LinearWeights(w.iter().map(|(id, x)| (*id, x.clone() * k.clone())).collect())
            }
            ValueFunction::Explicit(t) => {
                ValueFunction::Explicit(t.iter().map(|(c, x)| (c.clone(), x.clone() * k.clone())).collect())
            }
        };
        TreeGame::new(self.tree.clone(), f).expect("scaling preserves validity")
    }

    /// `v(N(T))`.
    pub fn grand_value(&self) -> Result<S> {
        let all: Vec<usize> = (0..self.tree.len()).collect();
        self.eval_trimmed(&all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    fn tree(e: &[(u64, u64)]) -> RootedTree {
        let e: Vec<_> = e.iter().map(|&(c, p)| (NodeId(c), NodeId(p))).collect();
        RootedTree::build(&e, NodeId(1)).unwrap()
    }

    fn f9() -> RootedTree {
        tree(&[(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4), (9, 4)])
    }

    #[test]
    fn basic_values() {
        let g = TreeGame::<Q>::basic(f9());
        assert_eq!(g.coalition_value(&Coalition::from([1, 3, 4, 6, 7, 8, 9])).unwrap(), q(4, 1));
        assert_eq!(g.coalition_value(&Coalition::from([2, 5])).unwrap(), q(0, 1));
    }

    #[test]
    fn size_based_lookup() {
        let w = vec![q(0, 1), q(10, 1), q(18, 1)];
        let g = TreeGame::new(tree(&[(2, 1)]), ValueFunction::SizeBased(w)).unwrap();
        assert_eq!(g.coalition_value(&Coalition::from([1, 2])).unwrap(), q(18, 1));
        assert_eq!(g.coalition_value(&Coalition::from([2])).unwrap(), q(0, 1));
    }

    #[test]
    fn size_based_validation() {
        let bad_len = ValueFunction::SizeBased(vec![q(0, 1), q(1, 1)]);
        assert!(matches!(TreeGame::new(tree(&[(2, 1)]), bad_len), Err(Error::ValueFunction(_))));
        let bad_zero = ValueFunction::SizeBased(vec![q(1, 1), q(1, 1), q(2, 1)]);
        assert!(matches!(TreeGame::new(tree(&[(2, 1)]), bad_zero), Err(Error::ValueFunction(_))));
    }

    #[test]
    fn explicit_rejects_untrimmed_and_uncovered() {
        let t = tree(&[(2, 1)]);
        let mut table = BTreeMap::new();
        table.insert(Coalition::from([2]), q(1, 1));
        assert!(matches!(TreeGame::new(t.clone(), ValueFunction::Explicit(table)), Err(Error::ValueFunction(_))));

        let mut table = BTreeMap::new();
        table.insert(Coalition::from([1]), q(1, 1));
        let g = TreeGame::new(t, ValueFunction::Explicit(table)).unwrap();
        assert_eq!(
            g.coalition_value(&Coalition::from([1, 2])),
            Err(Error::UncoveredCoalition(vec![NodeId(1), NodeId(2)]))
        );
        assert_eq!(g.coalition_value(&Coalition::from([2])).unwrap(), q(0, 1));
    }

    #[test]
    fn linear_weights_need_every_node() {
        let t = tree(&[(2, 1)]);
        let w: BTreeMap<_, _> = [(NodeId(1), q(3, 1))].into_iter().collect();
        assert!(TreeGame::new(t.clone(), ValueFunction::LinearWeights(w)).is_err());
        let w: BTreeMap<_, _> = [(NodeId(1), q(3, 1)), (NodeId(2), q(1, 2))].into_iter().collect();
        let g = TreeGame::new(t, ValueFunction::LinearWeights(w)).unwrap();
        assert_eq!(g.coalition_value(&Coalition::from([1, 2])).unwrap(), q(7, 2));
    }

    #[test]
    fn marginal_contributions() {
        let t = tree(&[(3, 1), (6, 3), (7, 3)]);
        let g = TreeGame::<Q>::basic(t);
        assert_eq!(g.marginal_contribution(NodeId(3), &Coalition::from([1, 6, 7])).unwrap(), q(3, 1));
        assert_eq!(g.marginal_contribution(NodeId(6), &Coalition::from([1])).unwrap(), q(0, 1));
        assert_eq!(g.marginal_contribution(NodeId(1), &Coalition::new()).unwrap(), q(1, 1));
        assert_eq!(g.marginal_contribution(NodeId(1), &Coalition::from([1])), Err(Error::AgentInCoalition(NodeId(1))));
    }

    #[test]
    fn scaling() {
        let g = TreeGame::<Q>::basic(f9());
        let c = Coalition::from([1, 2, 5, 7]);
        let s88 = g.scale(&q(88, 1));
        assert_eq!(s88.coalition_value(&c).unwrap(), q(88 * 3, 1));
        assert_eq!(g.scale(&q(1, 1)).coalition_value(&c).unwrap(), g.coalition_value(&c).unwrap());
        assert_eq!(g.scale(&q(0, 1)).grand_value().unwrap(), q(0, 1));
        // original untouched
        assert!(g.is_basic());
    }

    #[test]
    fn float_scalar_works() {
        let g = TreeGame::<f64>::basic(f9());
        assert_eq!(g.coalition_value(&Coalition::from([1, 3, 4, 6, 7, 8, 9])).unwrap(), 4.0);
    }
}
