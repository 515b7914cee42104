//! Undirected simple graphs with dual adjacency storage, constructive
//! families, and quasi-threshold recognition.
//!
//! Adjacency is kept both as bitset rows (O(1) edge queries for the induced
//! four-vertex scans) and as sorted neighbor lists (cache-friendly iteration
//! for energy sums). All constructors normalize to this dual form and the
//! resulting values are immutable.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Errors raised by graph constructors and the exponential oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// An edge endpoint is not a valid vertex index.
    IndexOutOfRange { index: usize, n: usize },
    /// A self-loop was supplied.
    SelfLoop { index: usize },
    /// The requested family needs at least one vertex.
    EmptyGraph,
    /// A threshold sequence contained something other than '0'/'1'.
    NonBinaryCharacter { position: usize },
    /// The exponential trivially-perfect oracle refuses large inputs.
    TooLargeForOracle { n: usize, max: usize },
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::IndexOutOfRange { index, n } => {
                write!(f, "vertex index {index} out of range for n = {n}")
            }
            GraphError::SelfLoop { index } => write!(f, "self-loop at vertex {index}"),
            GraphError::EmptyGraph => write!(f, "graph must have at least one vertex"),
            GraphError::NonBinaryCharacter { position } => {
                write!(f, "threshold sequence has a non-binary character at position {position}")
            }
            GraphError::TooLargeForOracle { n, max } => {
                write!(f, "trivially-perfect oracle supports n <= {max}, got n = {n}")
            }
        }
    }
}

/// An immutable undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    neighbors: Vec<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.bits == other.bits
    }
}
impl Eq for Graph {}

impl Graph {
    fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            bits: vec![0u64; n * words],
            neighbors: vec![Vec::new(); n],
        }
    }

    fn set_edge(&mut self, u: usize, v: usize) {
        self.bits[u * self.words + v / 64] |= 1u64 << (v % 64);
        self.bits[v * self.words + u / 64] |= 1u64 << (u % 64);
    }

    fn rebuild_neighbor_lists(&mut self) {
        for v in 0..self.n {
            let mut list = Vec::new();
            for u in 0..self.n {
                if self.has_edge(v, u) {
                    list.push(u);
                }
            }
            self.neighbors[v] = list;
        }
    }

    /// Builds a graph from an unordered edge list; edges are symmetrized and
    /// deduplicated. Rejects out-of-range indices and self-loops.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::IndexOutOfRange { index: u, n });
            }
            if v >= n {
                return Err(GraphError::IndexOutOfRange { index: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { index: u });
            }
            g.set_edge(u, v);
        }
        g.rebuild_neighbor_lists();
        Ok(g)
    }

    /// Single vertex, no edges.
    pub fn single_vertex() -> Self {
        let mut g = Graph::empty(1);
        g.rebuild_neighbor_lists();
        g
    }

    /// The path graph P_n on `n >= 1` vertices.
    pub fn path(n: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edge_list(n, &edges)
    }

    /// The cycle graph C_n on `n >= 3` vertices.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::EmptyGraph);
        }
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Graph::from_edge_list(n, &edges)
    }

    /// The complete graph K_n.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        Graph::from_edge_list(n, &edges)
    }

    /// Threshold graph of a binary sequence: vertex 0 is the initial vertex
    /// and vertex `k` realizes bit `k-1`. A `1`-bit vertex is inserted
    /// adjacent to every vertex before it; a `0`-bit vertex is inserted
    /// isolated.
    pub fn threshold_from_sequence(bits: &str) -> Result<Self, GraphError> {
        for (pos, c) in bits.chars().enumerate() {
            if c != '0' && c != '1' {
                return Err(GraphError::NonBinaryCharacter { position: pos });
            }
        }
        let n = 1 + bits.len();
        let mut g = Graph::empty(n);
        for (k, c) in bits.chars().enumerate() {
            let v = k + 1;
            if c == '1' {
                for u in 0..v {
                    g.set_edge(u, v);
                }
            }
        }
        g.rebuild_neighbor_lists();
        Ok(g)
    }

    /// Complete split graph: a clique on the first block, an independent set
    /// on the second, and all cross edges.
    pub fn complete_split(clique_size: usize, independent_size: usize) -> Result<Self, GraphError> {
        if clique_size == 0 && independent_size == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let n = clique_size + independent_size;
        let mut g = Graph::empty(n);
        for i in 0..clique_size {
            for j in (i + 1)..n {
                g.set_edge(i, j);
            }
        }
        g.rebuild_neighbor_lists();
        Ok(g)
    }

    /// Complete bipartite graph K_{a,b}: all cross edges, no intra-block
    /// edges. Both sides must be nonempty.
    pub fn complete_bipartite(a: usize, b: usize) -> Result<Self, GraphError> {
        if a == 0 || b == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut g = Graph::empty(a + b);
        for i in 0..a {
            for j in a..(a + b) {
                g.set_edge(i, j);
            }
        }
        g.rebuild_neighbor_lists();
        Ok(g)
    }

    /// Returns a copy with one new vertex, indexed `n`, adjacent to all
    /// existing vertices.
    pub fn add_universal_vertex(&self) -> Self {
        let n = self.n + 1;
        let mut g = Graph::empty(n);
        for (u, v) in self.edges() {
            g.set_edge(u, v);
        }
        for u in 0..self.n {
            g.set_edge(u, self.n);
        }
        g.rebuild_neighbor_lists();
        g
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let n = self.n + other.n;
        let mut g = Graph::empty(n);
        for (u, v) in self.edges() {
            g.set_edge(u, v);
        }
        for (u, v) in other.edges() {
            g.set_edge(u + self.n, v + self.n);
        }
        g.rebuild_neighbor_lists();
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Edges as pairs `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components as sorted vertex lists, ordered by their
    /// smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &u in &self.neighbors[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// Quasi-threshold test by the forbidden-subgraph characterization:
    /// true iff no four vertices induce a P4 or a C4. Exhaustive over all
    /// C(n,4) subsets; intended for desk scale.
    pub fn is_quasi_threshold(&self) -> bool {
        let n = self.n;
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        if self.induces_p4_or_c4(a, b, c, d) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn induces_p4_or_c4(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let q = [a, b, c, d];
        let mut deg = [0usize; 4];
        let mut edges = 0usize;
        for i in 0..4 {
            for j in (i + 1)..4 {
                if self.has_edge(q[i], q[j]) {
                    deg[i] += 1;
                    deg[j] += 1;
                    edges += 1;
                }
            }
        }
        match edges {
            // Among 3-edge graphs on four vertices only P4 has degrees {1,1,2,2}.
            3 => {
                let ones = deg.iter().filter(|&&d| d == 1).count();
                let twos = deg.iter().filter(|&&d| d == 2).count();
                ones == 2 && twos == 2
            }
            // Among 4-edge graphs only C4 is 2-regular.
            4 => deg.iter().all(|&d| d == 2),
            _ => false,
        }
    }

    /// Independent exponential oracle for the trivially-perfect property:
    /// on every induced subgraph, the independence number must equal the
    /// number of maximal cliques. Brute force over all vertex subsets;
    /// rejects `n > 12`.
    pub fn trivially_perfect_check(&self) -> Result<bool, GraphError> {
        const MAX_N: usize = 12;
        let n = self.n;
        if n > MAX_N {
            return Err(GraphError::TooLargeForOracle { n, max: MAX_N });
        }

        // Bitmask adjacency and per-mask precomputations.
        let mut adj = vec![0u32; n];
        for v in 0..n {
            for &u in &self.neighbors[v] {
                adj[v] |= 1 << u;
            }
        }
        let full = (1u32 << n) - 1;
        let masks = 1usize << n;

        // is_clique and the common neighborhood of every clique.
        let mut is_clique = vec![false; masks];
        let mut common = vec![0u32; masks];
        is_clique[0] = true;
        common[0] = full;
        for m in 1..masks {
            let low = m.trailing_zeros() as usize;
            let rest = m & (m - 1);
            is_clique[m] = is_clique[rest] && (adj[low] & rest as u32) == rest as u32;
            common[m] = common[rest] & adj[low];
        }

        // Independence number per induced subgraph by subset DP.
        let mut alpha = vec![0u8; masks];
        for m in 1..masks {
            let low = m.trailing_zeros() as usize;
            let rest = m & (m - 1);
            let without = alpha[rest];
            let with = 1 + alpha[rest & !(adj[low] as usize)];
            alpha[m] = without.max(with);
        }

        // Count maximal cliques of every induced subgraph; a clique C is
        // maximal in H iff no vertex of H \ C is adjacent to all of C.
        for h in 1..masks {
            let mut maximal = 0u32;
            let mut c = h;
            loop {
                if c != 0 && is_clique[c] && common[c] & (h as u32) & !(c as u32) == 0 {
                    maximal += 1;
                }
                if c == 0 {
                    break;
                }
                c = (c - 1) & h;
            }
            if u32::from(alpha[h]) != maximal {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Iterates over every labeled graph on `n` vertices, in bitmask order of
/// the C(n,2) possible edges. Meant for small-n exhaustive sweeps.
pub fn all_labeled_graphs(n: usize) -> impl Iterator<Item = Graph> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    let total = 1u64 << pairs.len();
    (0..total).map(move |mask| {
        let edges: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        Graph::from_edge_list(n, &edges).expect("enumerated edges are valid")
    })
}

// Interchange format: {"n": int, "edges": [[i, j], ...]} with i < j, sorted.

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        Repr {
            n: self.n,
            edges: self.edges(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Graph::from_edge_list(repr.n, &repr.edges)
            .map_err(|e| D::Error::custom(format!("invalid graph: {e}")))
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.edge_count())
    }
}

/// Convenience label used by survey reports and the CLI.
pub fn describe(g: &Graph) -> String {
    format!("n{}m{}", g.n(), g.edge_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edge_list_basics() {
        let p3 = Graph::from_edge_list(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.edge_count(), 2);
        assert!(p3.has_edge(1, 0));
        assert!(!p3.has_edge(0, 2));

        let single = Graph::from_edge_list(1, &[]).unwrap();
        assert_eq!(single.n(), 1);
        assert_eq!(single.edge_count(), 0);

        let c4 = Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert!(c4.degree(0) == 2 && c4.degree(2) == 2);

        // Duplicate edges collapse.
        let dup = Graph::from_edge_list(2, &[(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(dup.edge_count(), 1);
    }

    #[test]
    fn from_edge_list_rejects_bad_input() {
        assert_eq!(
            Graph::from_edge_list(3, &[(0, 3)]),
            Err(GraphError::IndexOutOfRange { index: 3, n: 3 })
        );
        assert_eq!(
            Graph::from_edge_list(3, &[(1, 1)]),
            Err(GraphError::SelfLoop { index: 1 })
        );
        assert_eq!(Graph::from_edge_list(0, &[]), Err(GraphError::EmptyGraph));
    }

    #[test]
    fn threshold_sequence_small_cases() {
        let single = Graph::threshold_from_sequence("").unwrap();
        assert_eq!((single.n(), single.edge_count()), (1, 0));

        let k2 = Graph::threshold_from_sequence("1").unwrap();
        assert_eq!((k2.n(), k2.edge_count()), (2, 1));

        assert_eq!(
            Graph::threshold_from_sequence("10x"),
            Err(GraphError::NonBinaryCharacter { position: 2 })
        );
    }

    #[test]
    fn threshold_sequence_matches_insertion_oracle() {
        // Independent simulation of the insertion process: the k-th inserted
        // vertex contributes k edges when its bit is 1, none otherwise.
        let seq = "10101011001";
        let g = Graph::threshold_from_sequence(seq).unwrap();
        assert_eq!(g.n(), 12);

        let mut oracle_edges = 0usize;
        for (k, c) in seq.chars().enumerate() {
            if c == '1' {
                oracle_edges += k + 1;
            }
        }
        assert_eq!(oracle_edges, 35);
        assert_eq!(g.edge_count(), oracle_edges);

        // Per-vertex degrees from the same simulation.
        let n = g.n();
        let mut deg = vec![0usize; n];
        for (k, c) in seq.chars().enumerate() {
            if c == '1' {
                for d in deg.iter_mut().take(k + 1) {
                    *d += 1;
                }
                deg[k + 1] += k + 1;
            }
        }
        for v in 0..n {
            assert_eq!(g.degree(v), deg[v], "degree mismatch at {v}");
        }
    }

    #[test]
    fn threshold_connectivity_rule() {
        // Connected iff the sequence is empty or ends in 1.
        for len in 0..=8usize {
            for mask in 0..(1u32 << len) {
                let s: String = (0..len)
                    .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                let g = Graph::threshold_from_sequence(&s).unwrap();
                let expect = s.is_empty() || s.ends_with('1');
                assert_eq!(g.is_connected(), expect, "sequence {s:?}");
            }
        }
    }

    #[test]
    fn split_and_bipartite_counts() {
        let k2 = Graph::complete_split(2, 0).unwrap();
        assert_eq!((k2.n(), k2.edge_count()), (2, 1));

        let star = Graph::complete_split(1, 3).unwrap();
        assert_eq!((star.n(), star.edge_count()), (4, 3));
        assert_eq!(star.degree(0), 3);

        // C(3,2) + 3*2 = 9 edges.
        let s = Graph::complete_split(3, 2).unwrap();
        assert_eq!(s.edge_count(), 9);

        assert_eq!(Graph::complete_bipartite(1, 1).unwrap().edge_count(), 1);
        let star2 = Graph::complete_bipartite(1, 5).unwrap();
        assert_eq!(star2.degree(0), 5);
        assert_eq!(Graph::complete_bipartite(3, 4).unwrap().edge_count(), 12);
        assert_eq!(Graph::complete_bipartite(0, 4), Err(GraphError::EmptyGraph));
    }

    #[test]
    fn universal_vertex_and_union() {
        let k1 = Graph::single_vertex();
        let k2 = k1.add_universal_vertex();
        assert_eq!((k2.n(), k2.edge_count()), (2, 1));

        let two = k1.disjoint_union(&k1);
        assert_eq!((two.n(), two.edge_count()), (2, 0));

        let p3 = two.add_universal_vertex();
        assert_eq!(p3, Graph::from_edge_list(3, &[(0, 2), (1, 2)]).unwrap());
    }

    #[test]
    fn recognition_forbidden_subgraphs() {
        assert!(!Graph::path(4).unwrap().is_quasi_threshold());
        assert!(!Graph::cycle(4).unwrap().is_quasi_threshold());
        assert!(Graph::path(3).unwrap().is_quasi_threshold());
        assert!(Graph::complete(4).unwrap().is_quasi_threshold());
        assert!(Graph::threshold_from_sequence("10101011001")
            .unwrap()
            .is_quasi_threshold());
    }

    #[test]
    fn oracle_matches_definition_on_small_cases() {
        assert_eq!(Graph::complete(3).unwrap().trivially_perfect_check(), Ok(true));
        // C4 itself already violates: alpha = 2 but it has 4 maximal cliques.
        assert_eq!(Graph::cycle(4).unwrap().trivially_perfect_check(), Ok(false));
        assert_eq!(Graph::path(4).unwrap().trivially_perfect_check(), Ok(false));
        let too_big = Graph::path(13).unwrap();
        assert!(matches!(
            too_big.trivially_perfect_check(),
            Err(GraphError::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn recognition_agrees_with_oracle_n_le_5() {
        // n <= 5 here keeps the unit test fast; the full n <= 6 sweep runs in
        // the acceptance suite.
        for n in 1..=5usize {
            for g in all_labeled_graphs(n) {
                assert_eq!(
                    g.is_quasi_threshold(),
                    g.trivially_perfect_check().unwrap(),
                    "disagreement on {g} edges {:?}",
                    g.edges()
                );
            }
        }
    }

    #[test]
    fn constructive_closure_is_quasi_threshold() {
        // Anything built from single vertices by disjoint union and
        // universal-vertex addition must pass recognition.
        let mut pool = vec![Graph::single_vertex()];
        for step in 0..40usize {
            let a = &pool[step % pool.len()];
            let b = &pool[(step * 7 + 3) % pool.len()];
            let g = if step % 3 == 0 {
                a.disjoint_union(b)
            } else {
                a.add_universal_vertex()
            };
            if g.n() <= 10 {
                assert!(g.is_quasi_threshold());
                pool.push(g);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::threshold_from_sequence("1011").unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
        // Canonical shape with sorted i < j pairs.
        assert!(json.starts_with("{\"n\":5,\"edges\":[[0,1],"));

        let bad: Result<Graph, _> = serde_json::from_str("{\"n\":2,\"edges\":[[0,2]]}");
        assert!(bad.is_err());
    }
}
