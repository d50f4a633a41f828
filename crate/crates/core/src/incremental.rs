//! Shapley rewards maintained while users join one at a time.
//!
//! A join at depth `d` adds `1/(d+1)` to every node on the path from the root
//! to the newcomer. The state keeps, per node, the level counts of its subtree
//! (exactly the data the closed form sums over), so each join costs O(depth)
//! and the allocation can be materialised at any point.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::shapley::Allocation;
use crate::tree::{NodeId, RootedTree};

/// Reward change caused by one join: `share` to each node of `path`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinDelta {
    /// Root first, newcomer last.
    pub path: Vec<NodeId>,
    /// Depth of the newcomer.
    pub depth: usize,
}

impl JoinDelta {
    /// `1 / (depth + 1)`.
    pub fn share(&self) -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(self.depth + 1))
    }

    pub fn to_allocation<S: Scalar>(&self, unit: &S) -> Allocation<S> {
        let each = S::from_big_ratio(&self.share()) * unit.clone();
        Allocation::new(self.path.iter().map(|&id| (id, each.clone()))).expect("path nodes are distinct")
    }
}

#[derive(Clone, Debug)]
pub struct IncrementalState {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    // levels[v][j] = |Level_j(T_v)|
    levels: Vec<Vec<u64>>,
    root_adjust: bool,
}

impl IncrementalState {
    pub fn new(root: NodeId, root_adjust: bool) -> Result<Self> {
        if root.0 == 0 {
            return Err(Error::ZeroId);
        }
        Ok(IncrementalState {
            ids: vec![root],
            index: HashMap::from([(root, 0)]),
            parent: vec![None],
            depth: vec![0],
            levels: vec![vec![1]],
            root_adjust,
        })
    }

    /// Seeds the state with an existing tree, replaying it parents-first.
    pub fn from_tree(tree: &RootedTree, root_adjust: bool) -> Result<Self> {
        let mut state = Self::new(tree.root(), root_adjust)?;
        for &v in &tree.bfs_order()[1..] {
            let p = tree.parent_index(v).expect("non-root has a parent");
            state.join(tree.id(v), tree.id(p))?;
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> NodeId {
        self.ids[0]
    }

    pub fn root_adjust(&self) -> bool {
        self.root_adjust
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn max_depth(&self) -> usize {
        self.levels[0].len() - 1
    }

    /// Adds `node` as a new leaf under `parent`.
    pub fn join(&mut self, node: NodeId, parent: NodeId) -> Result<JoinDelta> {
        if node.0 == 0 {
            return Err(Error::ZeroId);
        }
        let &p = self.index.get(&parent).ok_or(Error::UnknownNode(parent))?;
        if self.index.contains_key(&node) {
            return Err(Error::DuplicateNode(node));
        }
        let v = self.ids.len();
        let d = self.depth[p] + 1;
        self.ids.push(node);
        self.index.insert(node, v);
        self.parent.push(Some(p));
        self.depth.push(d);
        self.levels.push(vec![1]);

        let mut path = Vec::with_capacity(d + 1);
        path.push(node);
        let mut u = Some(p);
        while let Some(a) = u {
            let rel = d - self.depth[a];
            let lv = &mut self.levels[a];
            if lv.len() <= rel {
                lv.resize(rel + 1, 0);
            }
            lv[rel] += 1;
            path.push(self.ids[a]);
            u = self.parent[a];
        }
        path.reverse();
        Ok(JoinDelta { path, depth: d })
    }

    /// Snapshot of the current tree.
    pub fn tree(&self) -> RootedTree {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| self.ids[v]);
        let mut dense_of = vec![0usize; self.len()];
        for (k, &v) in order.iter().enumerate() {
            dense_of[v] = k;
        }
        let ids: Vec<NodeId> = order.iter().map(|&v| self.ids[v]).collect();
        let index = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let parent = order.iter().map(|&v| self.parent[v].map(|p| dense_of[p])).collect();
        RootedTree::from_parents(ids, index, dense_of[0], parent)
    }

    /// Current Shapley allocation (basic game, one unit per member), with the
    /// root adjustment applied when enabled.
    pub fn allocation<S: Scalar>(&self) -> Allocation<S> {
        let mut entries: Vec<(NodeId, S)> = (0..self.len())
            .map(|v| {
                let base = self.depth[v] as u64 + 1;
                let x = S::unit_fraction_sum(self.levels[v].iter().enumerate().map(|(j, &c)| (c, base + j as u64)));
                (self.ids[v], x)
            })
            .collect();
        if self.root_adjust {
            entries[0].1 = entries[0].1.clone() - S::one();
        }
        Allocation::new(entries).expect("ids are unique")
    }
}
