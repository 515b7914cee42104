//! Rooted forests: the comparability skeletons of quasi-threshold graphs.
//!
//! A connected quasi-threshold graph is exactly the comparability closure of
//! a rooted tree (edges between ancestor–descendant pairs). This module
//! provides the forest type, the closure, the caterpillar realizing a
//! threshold sequence, recovery of a skeleton from a recognized graph, and a
//! canonical enumerator of all rooted trees on a given number of nodes.

use crate::graph::Graph;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForestError {
    /// parent[] contains an index outside 0..n.
    ParentOutOfRange { node: usize, parent: usize },
    /// Following parent pointers from some node never reaches a root.
    CyclicParents { node: usize },
    /// A node index passed to a query is out of range.
    InvalidNode { node: usize, n: usize },
    /// A trailing 0-bit has no subsequent universal vertex to attach to.
    TrailingZero,
    /// Skeleton recovery found a nontrivial connected piece without a
    /// universal vertex, so the input is not quasi-threshold.
    NotQuasiThreshold { component: Vec<usize> },
}

impl fmt::Display for ForestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForestError::ParentOutOfRange { node, parent } => {
                write!(f, "parent {parent} of node {node} is out of range")
            }
            ForestError::CyclicParents { node } => {
                write!(f, "parent pointers form a cycle through node {node}")
            }
            ForestError::InvalidNode { node, n } => {
                write!(f, "node {node} out of range for forest on {n} nodes")
            }
            ForestError::TrailingZero => write!(
                f,
                "threshold sequence must end in 1 (or be empty): a trailing 0-vertex has no \
                 subsequent universal vertex to attach to"
            ),
            ForestError::NotQuasiThreshold { component } => write!(
                f,
                "graph is not quasi-threshold: component {component:?} has no universal vertex"
            ),
        }
    }
}

/// A rooted forest on nodes `0..n`, stored as a parent array with `None`
/// marking roots. Children lists are derived at construction and kept
/// consistent with the parent array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedForest {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl RootedForest {
    /// Validates acyclicity and builds the children lists.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, ForestError> {
        let n = parent.len();
        for (node, &p) in parent.iter().enumerate() {
            if let Some(p) = p {
                if p >= n {
                    return Err(ForestError::ParentOutOfRange { node, parent: p });
                }
            }
        }
        // Walk upward from every node; a walk longer than n nodes is a cycle.
        for start in 0..n {
            let mut cur = start;
            let mut hops = 0usize;
            while let Some(p) = parent[cur] {
                cur = p;
                hops += 1;
                if hops > n {
                    return Err(ForestError::CyclicParents { node: start });
                }
            }
        }
        let mut children = vec![Vec::new(); n];
        for (node, &p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[p].push(node);
            }
        }
        Ok(RootedForest { parent, children })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Root nodes in index order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.parent[v].is_none()).collect()
    }

    fn check_node(&self, v: usize) -> Result<(), ForestError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(ForestError::InvalidNode { node: v, n: self.len() })
        }
    }

    /// Proper ancestors of `v`, nearest first.
    pub fn ancestors(&self, v: usize) -> Result<Vec<usize>, ForestError> {
        self.check_node(v)?;
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        Ok(out)
    }

    /// Proper descendants of `v` in preorder.
    pub fn descendants(&self, v: usize) -> Result<Vec<usize>, ForestError> {
        self.check_node(v)?;
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.children[v].clone();
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend_from_slice(&self.children[u]);
        }
        Ok(out)
    }

    pub fn children(&self, v: usize) -> Result<&[usize], ForestError> {
        self.check_node(v)?;
        Ok(&self.children[v])
    }

    /// Depth of `v`; roots have depth 0.
    pub fn depth(&self, v: usize) -> Result<usize, ForestError> {
        Ok(self.ancestors(v)?.len())
    }

    /// Maximum depth over all nodes (0 for a forest of isolated roots).
    pub fn height(&self) -> usize {
        (0..self.len())
            .map(|v| self.depth(v).expect("valid node"))
            .max()
            .unwrap_or(0)
    }

    /// Comparability closure: vertices are the forest nodes and edges join
    /// every proper ancestor–descendant pair.
    pub fn comparability_closure(&self) -> Graph {
        let n = self.len();
        let mut edges = Vec::new();
        for v in 0..n {
            for a in self.ancestors(v).expect("valid node") {
                edges.push((a, v));
            }
        }
        Graph::from_edge_list(n.max(1), &edges).expect("closure edges are valid")
    }

    /// Caterpillar skeleton of a threshold sequence, on the same vertex
    /// indexing as [`Graph::threshold_from_sequence`]: vertex 0 is the
    /// initial vertex and vertex `k` realizes bit `k-1`.
    ///
    /// The universal (1-bit) vertices form the spine in reverse insertion
    /// order from the root, and every other vertex hangs off the nearest
    /// universal vertex inserted after it. Requires the last bit to be 1 (or
    /// an empty sequence), otherwise the trailing 0-vertices have no spine
    /// node to attach to.
    pub fn caterpillar_from_sequence(bits: &str) -> Result<Self, ForestError> {
        let n = 1 + bits.len();
        if !bits.is_empty() && !bits.ends_with('1') {
            return Err(ForestError::TrailingZero);
        }
        // next_one[v] = the first 1-bit vertex with index > v, if any.
        let mut parent = vec![None; n];
        let mut next_one: Option<usize> = None;
        for v in (0..n).rev() {
            let is_one = v > 0 && bits.as_bytes()[v - 1] == b'1';
            parent[v] = next_one;
            if is_one {
                next_one = Some(v);
            }
        }
        RootedForest::from_parents(parent)
    }

    /// Recovers a skeleton from a quasi-threshold graph: within each
    /// connected component the universal vertices are chained in ascending
    /// index order as the top path, and the remainder is processed
    /// recursively below them. Fails when some nontrivial connected piece
    /// has no universal vertex, which happens exactly when the input is not
    /// quasi-threshold.
    pub fn tree_representation(g: &Graph) -> Result<Self, ForestError> {
        let mut parent = vec![None; g.n()];
        for component in g.connected_components() {
            peel_component(g, &component, None, &mut parent)?;
        }
        RootedForest::from_parents(parent)
    }
}

/// One peeling step of skeleton recovery: finds the vertices universal
/// within `vertices`, chains them under `attach`, and recurses on the
/// connected pieces of the rest.
fn peel_component(
    g: &Graph,
    vertices: &[usize],
    attach: Option<usize>,
    parent: &mut [Option<usize>],
) -> Result<(), ForestError> {
    let inside: BTreeSet<usize> = vertices.iter().copied().collect();
    let universal: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|&v| {
            g.neighbors(v).iter().filter(|u| inside.contains(u)).count() == vertices.len() - 1
        })
        .collect();
    if universal.is_empty() {
        return Err(ForestError::NotQuasiThreshold {
            component: vertices.to_vec(),
        });
    }

    let mut below = attach;
    for &u in &universal {
        parent[u] = below;
        below = Some(u);
    }

    let rest: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|v| !universal.contains(v))
        .collect();
    if rest.is_empty() {
        return Ok(());
    }

    // Connected pieces of the remainder, found within the induced subgraph.
    let rest_set: BTreeSet<usize> = rest.iter().copied().collect();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &start in &rest {
        if seen.contains(&start) {
            continue;
        }
        let mut piece = vec![start];
        seen.insert(start);
        let mut head = 0;
        while head < piece.len() {
            let v = piece[head];
            head += 1;
            for &u in g.neighbors(v) {
                if rest_set.contains(&u) && seen.insert(u) {
                    piece.push(u);
                }
            }
        }
        piece.sort_unstable();
        peel_component(g, &piece, below, parent)?;
    }
    Ok(())
}

// Interchange format: {"parent": [null|int, ...]}.

impl Serialize for RootedForest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            parent: &'a [Option<usize>],
        }
        Repr { parent: &self.parent }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RootedForest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            parent: Vec<Option<usize>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        RootedForest::from_parents(repr.parent)
            .map_err(|e| D::Error::custom(format!("invalid forest: {e}")))
    }
}

/// Enumerates all rooted trees on `n` nodes, one representative per
/// isomorphism class, as parent arrays in preorder (node 0 is the root).
///
/// Uses the canonical level-sequence successor rule: starting from the path
/// and ending at the star, each tree's level sequence is rewritten at the
/// last node deeper than the root's children by cyclically repeating the
/// block below its parent.
pub fn rooted_trees(n: usize) -> RootedTreeIter {
    RootedTreeIter {
        levels: (1..=n).collect(),
        exhausted: n == 0,
        fresh: true,
    }
}

pub struct RootedTreeIter {
    levels: Vec<usize>,
    exhausted: bool,
    fresh: bool,
}

impl RootedTreeIter {
    fn emit(&self) -> RootedForest {
        // stack[l] = most recent node at level l+1.
        let n = self.levels.len();
        let mut parent = vec![None; n];
        let mut stack: Vec<usize> = Vec::new();
        for (node, &level) in self.levels.iter().enumerate() {
            stack.truncate(level - 1);
            parent[node] = stack.last().copied();
            stack.push(node);
        }
        RootedForest::from_parents(parent).expect("level sequence yields a tree")
    }

    fn advance(&mut self) {
        let levels = &mut self.levels;
        let p = match levels.iter().rposition(|&l| l > 2) {
            Some(p) => p,
            None => {
                self.exhausted = true;
                return;
            }
        };
        let q = (0..p)
            .rev()
            .find(|&i| levels[i] == levels[p] - 1)
            .expect("canonical sequence has the parent level before p");
        let span = p - q;
        for i in p..levels.len() {
            levels[i] = levels[i - span];
        }
    }
}

impl Iterator for RootedTreeIter {
    type Item = RootedForest;

    fn next(&mut self) -> Option<RootedForest> {
        if self.exhausted {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(self.emit());
        }
        self.advance();
        if self.exhausted {
            None
        } else {
            Some(self.emit())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(parents: &[Option<usize>]) -> RootedForest {
        RootedForest::from_parents(parents.to_vec()).unwrap()
    }

    #[test]
    fn from_parents_validates() {
        assert!(matches!(
            RootedForest::from_parents(vec![Some(5)]),
            Err(ForestError::ParentOutOfRange { .. })
        ));
        assert!(matches!(
            RootedForest::from_parents(vec![Some(1), Some(0)]),
            Err(ForestError::CyclicParents { .. })
        ));
    }

    #[test]
    fn queries_on_small_trees() {
        // Path-shaped tree 0 -> 1 -> 2.
        let path = tree(&[None, Some(0), Some(1)]);
        assert_eq!(path.descendants(0).unwrap().len(), 2);
        assert_eq!(path.ancestors(2).unwrap(), vec![1, 0]);
        assert_eq!(path.depth(2).unwrap(), 2);
        assert_eq!(path.height(), 2);

        // Depth-1 star.
        let star = tree(&[None, Some(0), Some(0), Some(0)]);
        assert_eq!(star.depth(3).unwrap(), 1);
        assert_eq!(star.children(0).unwrap(), &[1, 2, 3]);
        assert!(star.descendants(1).unwrap().is_empty());

        assert!(matches!(
            star.depth(9),
            Err(ForestError::InvalidNode { .. })
        ));
    }

    #[test]
    fn closure_of_star_and_path() {
        let star = tree(&[None, Some(0), Some(0), Some(0)]);
        assert_eq!(star.comparability_closure(), Graph::complete_split(1, 3).unwrap());

        // A path-shaped tree is a total order, so its closure is complete.
        let path = tree(&[None, Some(0), Some(1), Some(2)]);
        assert_eq!(path.comparability_closure(), Graph::complete(4).unwrap());
    }

    #[test]
    fn closure_neighborhood_is_ancestors_plus_descendants() {
        for n in 1..=7usize {
            for t in rooted_trees(n) {
                let g = t.comparability_closure();
                for v in 0..t.len() {
                    let mut expected: Vec<usize> = t
                        .ancestors(v)
                        .unwrap()
                        .into_iter()
                        .chain(t.descendants(v).unwrap())
                        .collect();
                    expected.sort_unstable();
                    assert_eq!(g.neighbors(v), &expected[..]);
                }
            }
        }
    }

    #[test]
    fn caterpillar_examples() {
        // "1": root is the universal vertex, initial vertex below it.
        let f = RootedForest::caterpillar_from_sequence("1").unwrap();
        assert_eq!(f.parents(), &[Some(1), None]);

        // "01": root is the last universal vertex with two children.
        let f = RootedForest::caterpillar_from_sequence("01").unwrap();
        assert_eq!(f.parents(), &[Some(2), Some(2), None]);

        assert_eq!(
            RootedForest::caterpillar_from_sequence("10"),
            Err(ForestError::TrailingZero)
        );

        let f = RootedForest::caterpillar_from_sequence("").unwrap();
        assert_eq!(f.parents(), &[None]);
    }

    #[test]
    fn caterpillar_closure_reproduces_threshold_graph() {
        // The figure example plus an exhaustive sweep over short sequences.
        let seq = "10101011001";
        let f = RootedForest::caterpillar_from_sequence(seq).unwrap();
        assert_eq!(
            f.comparability_closure(),
            Graph::threshold_from_sequence(seq).unwrap()
        );

        for len in 1..=8usize {
            for mask in 0..(1u32 << (len - 1)) {
                let mut s: alloc::string::String = (0..len - 1)
                    .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                s.push('1');
                let f = RootedForest::caterpillar_from_sequence(&s).unwrap();
                assert_eq!(
                    f.comparability_closure(),
                    Graph::threshold_from_sequence(&s).unwrap(),
                    "sequence {s:?}"
                );
            }
        }
    }

    #[test]
    fn representation_of_complete_and_star() {
        let kn = Graph::complete(5).unwrap();
        let f = RootedForest::tree_representation(&kn).unwrap();
        // All vertices universal: a single path-shaped tree.
        assert_eq!(f.parents(), &[None, Some(0), Some(1), Some(2), Some(3)]);
        assert_eq!(f.comparability_closure(), kn);

        let star = Graph::complete_split(1, 4).unwrap();
        let f = RootedForest::tree_representation(&star).unwrap();
        assert_eq!(f.roots(), vec![0]);
        assert_eq!(f.children(0).unwrap().len(), 4);
    }

    #[test]
    fn representation_rejects_non_quasi_threshold() {
        assert!(matches!(
            RootedForest::tree_representation(&Graph::path(4).unwrap()),
            Err(ForestError::NotQuasiThreshold { .. })
        ));
        assert!(matches!(
            RootedForest::tree_representation(&Graph::cycle(5).unwrap()),
            Err(ForestError::NotQuasiThreshold { .. })
        ));
    }

    #[test]
    fn representation_handles_forests() {
        let g = Graph::from_edge_list(4, &[(0, 1), (2, 3)]).unwrap();
        let f = RootedForest::tree_representation(&g).unwrap();
        assert_eq!(f.roots().len(), 2);
        assert_eq!(f.comparability_closure(), g);
    }

    #[test]
    fn closure_representation_round_trip_all_trees() {
        for n in 1..=7usize {
            for t in rooted_trees(n) {
                let g = t.comparability_closure();
                let back = RootedForest::tree_representation(&g).unwrap();
                assert_eq!(back.comparability_closure(), g);
            }
        }
    }

    #[test]
    fn rooted_tree_counts() {
        let expected = [1usize, 1, 2, 4, 9, 20, 48];
        for (n, &count) in (1..=7usize).zip(&expected) {
            assert_eq!(rooted_trees(n).count(), count, "n = {n}");
        }
    }

    #[test]
    fn json_round_trip() {
        let f = tree(&[None, Some(0), Some(0), Some(1)]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, "{\"parent\":[null,0,0,1]}");
        let back: RootedForest = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);

        let bad: Result<RootedForest, _> = serde_json::from_str("{\"parent\":[1,0]}");
        assert!(bad.is_err());
    }
}
