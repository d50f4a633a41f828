//! Immutable rooted referral trees, coalitions, trimming and adjacency.
//!
//! Node ids are arbitrary positive integers on the outside. Internally nodes
//! are remapped to dense indices `0..n` in ascending id order, so comparing
//! dense indices compares ids and sorted index lists sort like sorted id lists.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

/// A set of agents. Ordered lexicographically by sorted member list.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(BTreeSet<NodeId>);

impl Coalition {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: NodeId) -> bool {
        self.0.insert(id)
    }

    pub fn remove(&mut self, id: NodeId) -> bool {
        self.0.remove(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl FromIterator<NodeId> for Coalition {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        Coalition(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[u64; N]> for Coalition {
    fn from(ids: [u64; N]) -> Self {
        ids.into_iter().map(NodeId).collect()
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, id) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

/// A parent-closed node set that contains the root, or the empty set.
///
/// Only produced by this crate (trimming, enumeration, certification), so the
/// closure property always holds. Members are dense indices in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrimmedSet {
    members: Vec<usize>,
}

impl TrimmedSet {
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        TrimmedSet { members }
    }

    pub fn empty() -> Self {
        TrimmedSet { members: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Dense member indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn to_coalition(&self, tree: &RootedTree) -> Coalition {
        self.members.iter().map(|&v| tree.id(v)).collect()
    }

    pub fn ids(&self, tree: &RootedTree) -> Vec<NodeId> {
        self.members.iter().map(|&v| tree.id(v)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RootedTree {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    // parents precede children
    order: Vec<usize>,
    subtree_height: Vec<usize>,
    height: usize,
}

impl PartialEq for RootedTree {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.root == other.root && self.parent == other.parent
    }
}

impl Eq for RootedTree {}

impl RootedTree {
    /// Builds and validates a tree from `(child, parent)` edges.
    pub fn build(edges: &[(NodeId, NodeId)], root: NodeId) -> Result<Self> {
        if root.0 == 0 {
            return Err(Error::ZeroId);
        }
        let mut parent_of: HashMap<NodeId, NodeId> = HashMap::with_capacity(edges.len());
        let mut nodes: BTreeSet<NodeId> = BTreeSet::new();
        nodes.insert(root);
        for &(child, parent) in edges {
            if child.0 == 0 || parent.0 == 0 {
                return Err(Error::ZeroId);
            }
            if parent_of.insert(child, parent).is_some() {
                return Err(Error::DuplicateParent(child));
            }
            nodes.insert(child);
            nodes.insert(parent);
        }

        let ids: Vec<NodeId> = nodes.into_iter().collect();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let n = ids.len();
        let parent: Vec<Option<usize>> = ids.iter().map(|id| parent_of.get(id).map(|p| index[p])).collect();

        // cycles first: walking parent pointers must terminate
        let mut state = vec![0u8; n]; // 0 unseen, 1 on current walk, 2 done
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            loop {
                match state[v] {
                    2 => break,
                    1 => return Err(Error::Cycle(ids[v])),
                    _ => {}
                }
                state[v] = 1;
                path.push(v);
                match parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
            for u in path {
                state[u] = 2;
            }
        }

        let root_idx = index[&root];
        if parent[root_idx].is_some() {
            return Err(Error::RootHasParent(root));
        }
        if let Some(v) = (0..n).find(|&v| v != root_idx && parent[v].is_none()) {
            return Err(Error::Unreachable(ids[v]));
        }

        Ok(Self::from_parents(ids, index, root_idx, parent))
    }

    /// Builds from already validated dense parents.
    pub(crate) fn from_parents(
        ids: Vec<NodeId>,
        index: HashMap<NodeId, usize>,
        root: usize,
        parent: Vec<Option<usize>>,
    ) -> Self {
        let n = ids.len();
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        let mut depth = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &children[v] {
                depth[c] = depth[v] + 1;
                queue.push_back(c);
            }
        }
        let mut subtree_height = vec![0usize; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                subtree_height[p] = subtree_height[p].max(subtree_height[v] + 1);
            }
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        RootedTree { ids, index, root, parent, children, depth, order, subtree_height, height }
    }

    pub fn single(root: NodeId) -> Result<Self> {
        Self::build(&[], root)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    /// Always false: a tree has at least its root.
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.ids[self.root]
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// All node ids in ascending order.
    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// `(child, parent)` edges in ascending child order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.len()).filter_map(|v| self.parent[v].map(|p| (self.ids[v], self.ids[p]))).collect()
    }

    pub fn grand_coalition(&self) -> Coalition {
        self.ids.iter().copied().collect()
    }

    // --- dense-index accessors -------------------------------------------

    pub fn index_of(&self, id: NodeId) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    pub fn id(&self, v: usize) -> NodeId {
        self.ids[v]
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn parent_index(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children_indices(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth_of_index(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn subtree_height_of_index(&self, v: usize) -> usize {
        self.subtree_height[v]
    }

    /// Dense indices in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    /// `|Level_j(T_v)|` for `j = 0..=height(T_v)`.
    pub fn subtree_level_counts(&self, v: usize) -> Vec<u64> {
        let mut counts = vec![0u64; self.subtree_height[v] + 1];
        let base = self.depth[v];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            counts[self.depth[u] - base] += 1;
            stack.extend_from_slice(&self.children[u]);
        }
        counts
    }

    pub(crate) fn subtree_indices(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn to_mask(&self, c: &Coalition) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.len()];
        for id in c.iter() {
            mask[self.index_of(id)?] = true;
        }
        Ok(mask)
    }

    fn ids_where(&self, mask: &[bool]) -> Coalition {
        (0..self.len()).filter(|&v| mask[v]).map(|v| self.ids[v]).collect()
    }

    // --- id-level queries -------------------------------------------------

    pub fn parent(&self, id: NodeId) -> Result<Option<NodeId>> {
        Ok(self.parent[self.index_of(id)?].map(|p| self.ids[p]))
    }

    pub fn children(&self, id: NodeId) -> Result<Vec<NodeId>> {
        Ok(self.children[self.index_of(id)?].iter().map(|&c| self.ids[c]).collect())
    }

    pub fn depth(&self, id: NodeId) -> Result<usize> {
        Ok(self.depth[self.index_of(id)?])
    }

    /// Height of the subtree rooted at `id`.
    pub fn height_of_subtree(&self, id: NodeId) -> Result<usize> {
        Ok(self.subtree_height[self.index_of(id)?])
    }

    /// Nodes at depth `j` within the whole tree.
    pub fn level(&self, j: usize) -> Result<Coalition> {
        if j > self.height {
            return Err(Error::LevelOutOfRange { level: j, height: self.height });
        }
        Ok((0..self.len()).filter(|&v| self.depth[v] == j).map(|v| self.ids[v]).collect())
    }

    /// Nodes at relative depth `j` within the subtree rooted at `id`.
    pub fn subtree_level(&self, id: NodeId, j: usize) -> Result<Coalition> {
        let v = self.index_of(id)?;
        if j > self.subtree_height[v] {
            return Err(Error::LevelOutOfRange { level: j, height: self.subtree_height[v] });
        }
        let target = self.depth[v] + j;
        Ok(self.subtree_indices(v).into_iter().filter(|&u| self.depth[u] == target).map(|u| self.ids[u]).collect())
    }

    /// `{id}` together with all its descendants.
    pub fn subtree_nodes(&self, id: NodeId) -> Result<Coalition> {
        let v = self.index_of(id)?;
        Ok(self.subtree_indices(v).into_iter().map(|u| self.ids[u]).collect())
    }

    pub fn descendants(&self, id: NodeId) -> Result<Coalition> {
        let mut c = self.subtree_nodes(id)?;
        c.remove(id);
        Ok(c)
    }

    pub fn ancestors(&self, id: NodeId) -> Result<Coalition> {
        let mut v = self.index_of(id)?;
        let mut out = Coalition::new();
        while let Some(p) = self.parent[v] {
            out.insert(self.ids[p]);
            v = p;
        }
        Ok(out)
    }

    // --- trimming ---------------------------------------------------------

    /// Keeps the members whose ancestors all belong to the mask.
    pub(crate) fn trim_dense(&self, mask: &[bool]) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        if !mask[self.root] {
            return keep;
        }
        for &v in &self.order {
            keep[v] = mask[v] && self.parent[v].is_none_or(|p| keep[p]);
        }
        keep
    }

    /// Trimming on a bitmask of dense indices; requires `n <= 64`.
    pub fn trim_bits(&self, mask: u64) -> u64 {
        debug_assert!(self.len() <= 64);
        if mask >> self.root & 1 == 0 {
            return 0;
        }
        let mut keep = 0u64;
        for &v in &self.order {
            let parent_ok = match self.parent[v] {
                None => true,
                Some(p) => keep >> p & 1 == 1,
            };
            if parent_ok && mask >> v & 1 == 1 {
                keep |= 1 << v;
            }
        }
        keep
    }

    /// The members of `c` connected to the root through `c`.
    pub fn trim(&self, c: &Coalition) -> Result<TrimmedSet> {
        let mask = self.to_mask(c)?;
        let keep = self.trim_dense(&mask);
        Ok(TrimmedSet::from_sorted((0..self.len()).filter(|&v| keep[v]).collect()))
    }

    pub fn is_trimmed(&self, c: &Coalition) -> Result<bool> {
        Ok(self.trim(c)?.len() == c.len())
    }

    /// Certifies `c` as trimmed, or reports [`Error::NotTrimmed`].
    pub fn certify(&self, c: &Coalition) -> Result<TrimmedSet> {
        let t = self.trim(c)?;
        if t.len() == c.len() {
            Ok(t)
        } else {
            Err(Error::NotTrimmed)
        }
    }

    /// Nodes outside `c` sharing an edge with some member of `c`.
    pub fn adjacent(&self, c: &Coalition) -> Result<Coalition> {
        let mask = self.to_mask(c)?;
        Ok(self.ids_where(&self.adjacent_dense(&mask)))
    }

    pub(crate) fn adjacent_dense(&self, mask: &[bool]) -> Vec<bool> {
        let mut adj = vec![false; self.len()];
        for v in 0..self.len() {
            if !mask[v] {
                continue;
            }
            if let Some(p) = self.parent[v] {
                adj[p] |= !mask[p];
            }
            for &c in &self.children[v] {
                adj[c] |= !mask[c];
            }
        }
        adj
    }

    /// Number of non-members adjacent to a trimmed set: for a root-containing
    /// parent-closed set these are exactly the missing children of members.
    pub(crate) fn adjacent_count_trimmed(&self, members: &[usize], in_set: &[bool]) -> usize {
        members.iter().map(|&v| self.children[v].iter().filter(|&&c| !in_set[c]).count()).sum()
    }

    /// Number of coalitions that trim to `c`: `2^(n - |c| - |adj(c)|)`.
    pub fn same_trim_count(&self, c: &TrimmedSet) -> Result<BigUint> {
        if c.is_empty() {
            return Err(Error::NotTrimmed);
        }
        let mut in_set = vec![false; self.len()];
        for &v in c.indices() {
            in_set[v] = true;
        }
        let adj = self.adjacent_count_trimmed(c.indices(), &in_set);
        Ok(BigUint::one() << (self.len() - c.len() - adj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u64]) -> Coalition {
        v.iter().map(|&x| NodeId(x)).collect()
    }

    fn edges(e: &[(u64, u64)]) -> Vec<(NodeId, NodeId)> {
        e.iter().map(|&(c, p)| (NodeId(c), NodeId(p))).collect()
    }

    fn f9() -> RootedTree {
        RootedTree::build(&edges(&[(2, 1), (3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4), (9, 4)]), NodeId(1)).unwrap()
    }

    #[test]
    fn builds_example_tree() {
        let t = RootedTree::build(&edges(&[(3, 1), (6, 3), (7, 3)]), NodeId(1)).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.height(), 2);
        assert_eq!(t.children(NodeId(3)).unwrap(), vec![NodeId(6), NodeId(7)]);
    }

    #[test]
    fn single_node() {
        let t = RootedTree::build(&[], NodeId(1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.height(), 0);
    }

    #[test]
    fn build_errors() {
        assert_eq!(RootedTree::build(&edges(&[(2, 1), (1, 2)]), NodeId(1)), Err(Error::Cycle(NodeId(1))));
        assert_eq!(RootedTree::build(&edges(&[(2, 1), (2, 3)]), NodeId(1)), Err(Error::DuplicateParent(NodeId(2))));
        assert_eq!(RootedTree::build(&edges(&[(1, 3)]), NodeId(1)), Err(Error::RootHasParent(NodeId(1))));
        assert_eq!(RootedTree::build(&edges(&[(2, 1), (5, 4)]), NodeId(1)), Err(Error::Unreachable(NodeId(4))));
        assert_eq!(RootedTree::build(&edges(&[(0, 1)]), NodeId(1)), Err(Error::ZeroId));
    }

    #[test]
    fn depth_levels_ancestry() {
        let t = f9();
        assert_eq!(t.depth(NodeId(8)).unwrap(), 3);
        assert!(t.ancestors(NodeId(1)).unwrap().is_empty());
        assert_eq!(t.level(1).unwrap(), ids(&[2, 3]));
        assert_eq!(t.ancestors(NodeId(9)).unwrap(), ids(&[1, 2, 4]));
        assert_eq!(t.descendants(NodeId(2)).unwrap(), ids(&[4, 5, 8, 9]));
        assert_eq!(t.subtree_nodes(NodeId(3)).unwrap(), ids(&[3, 6, 7]));
        assert_eq!(t.height_of_subtree(NodeId(2)).unwrap(), 2);
        assert_eq!(t.subtree_level(NodeId(2), 2).unwrap(), ids(&[8, 9]));
        assert!(matches!(t.level(4), Err(Error::LevelOutOfRange { .. })));
        assert_eq!(t.depth(NodeId(42)), Err(Error::UnknownNode(NodeId(42))));
    }

    #[test]
    fn trimming_examples() {
        let t = f9();
        let tc = t.trim(&ids(&[1, 3, 4, 6, 7, 8, 9])).unwrap();
        assert_eq!(tc.to_coalition(&t), ids(&[1, 3, 6, 7]));
        assert!(t.trim(&ids(&[2, 5, 8])).unwrap().is_empty());
        assert_eq!(t.trim(&ids(&[1, 2, 5])).unwrap().to_coalition(&t), ids(&[1, 2, 5]));
        assert!(t.is_trimmed(&ids(&[1, 3, 6, 7])).unwrap());
        assert!(!t.is_trimmed(&ids(&[1, 2, 8, 9])).unwrap());
        assert!(t.is_trimmed(&Coalition::new()).unwrap());
        assert_eq!(t.trim(&ids(&[1, 10])), Err(Error::UnknownNode(NodeId(10))));
    }

    #[test]
    fn adjacency_examples() {
        let t = f9();
        assert_eq!(t.adjacent(&ids(&[1, 3, 6, 7])).unwrap(), ids(&[2]));
        assert!(t.adjacent(&t.grand_coalition()).unwrap().is_empty());
        assert_eq!(t.adjacent(&ids(&[1])).unwrap(), ids(&[2, 3]));
        assert_eq!(t.adjacent(&ids(&[4])).unwrap(), ids(&[2, 8, 9]));
    }

    #[test]
    fn same_trim_counts() {
        let t = f9();
        let c = t.certify(&ids(&[1, 3])).unwrap();
        assert_eq!(t.same_trim_count(&c).unwrap(), BigUint::from(16u32));
        let all = t.certify(&t.grand_coalition()).unwrap();
        assert_eq!(t.same_trim_count(&all).unwrap(), BigUint::from(1u32));
        let chain = RootedTree::build(&edges(&[(2, 1)]), NodeId(1)).unwrap();
        let c = chain.certify(&ids(&[1])).unwrap();
        assert_eq!(chain.same_trim_count(&c).unwrap(), BigUint::from(1u32));
        assert_eq!(t.certify(&ids(&[1, 4])), Err(Error::NotTrimmed));
    }

    #[test]
    fn arbitrary_ids_are_remapped() {
        let t = RootedTree::build(&edges(&[(500, 70), (9, 70)]), NodeId(70)).unwrap();
        assert_eq!(t.node_ids(), &[NodeId(9), NodeId(70), NodeId(500)]);
        assert_eq!(t.root(), NodeId(70));
        assert_eq!(t.edges(), edges(&[(9, 70), (500, 70)]));
    }

    #[test]
    fn trim_bits_matches_trim() {
        let t = f9();
        for mask in 0u64..(1 << 9) {
            let c: Coalition = (0..9).filter(|v| mask >> v & 1 == 1).map(|v| t.id(v)).collect();
            let expect = t.trim(&c).unwrap();
            let got = t.trim_bits(mask);
            let got: Vec<usize> = (0..9).filter(|v| got >> v & 1 == 1).collect();
            assert_eq!(got, expect.indices());
        }
    }
}
