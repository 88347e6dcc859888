//! Static directed topology, the six generator families and structural metrics.

mod components;
mod generate;
mod structure;

pub use components::{weakly_connected_components, UnionFind};
pub use generate::{generate, GeneratorSpec};
pub use structure::{average_path_length, clustering_coefficient, er_connectivity_probability};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current version tag of the graph JSON document.
pub const GRAPH_FORMAT_VERSION: u32 = 1;

/// Dense node identifier in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Immutable directed graph without self-loops or parallel edges.
///
/// Adjacency lists are kept sorted so iteration order, and therefore every
/// seeded simulation on top of the graph, is reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    edge_count: usize,
    origin: Option<GeneratorSpec>,
}

impl DirectedGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        DirectedGraph { out_adj: vec![Vec::new(); n], in_adj: vec![Vec::new(); n], edge_count: 0, origin: None }
    }

    /// Builds a graph from an edge list. Self-loops and out-of-range endpoints
    /// are rejected; duplicates are collapsed.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut out_sets: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        for (u, v) in edges {
            if u.index() >= n || v.index() >= n {
                return Err(Error::InvalidNode { node: u.0.max(v.0), n });
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            out_sets[u.index()].insert(v);
        }
        let out_adj: Vec<Vec<NodeId>> = out_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(Self::from_sorted_adjacency(out_adj))
    }

    pub(crate) fn from_sorted_adjacency(out_adj: Vec<Vec<NodeId>>) -> Self {
        let n = out_adj.len();
        let mut in_adj = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, outs) in out_adj.iter().enumerate() {
            edge_count += outs.len();
            for &v in outs {
                in_adj[v.index()].push(NodeId::from(u));
            }
        }
        // sources are visited in ascending order, so in_adj is already sorted
        DirectedGraph { out_adj, in_adj, edge_count, origin: None }
    }

    pub(crate) fn with_origin(mut self, origin: GeneratorSpec) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Generator that produced this graph, if any.
    pub fn origin(&self) -> Option<&GeneratorSpec> {
        self.origin.as_ref()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u.index()]
    }

    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u.index()]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj[u.index()].len()
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_adj[u.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(u, outs)| outs.iter().map(move |&v| (NodeId::from(u), v)))
    }

    /// Copy of the graph without the given edges.
    pub fn without_edges(&self, removed: &BTreeSet<(NodeId, NodeId)>) -> Self {
        let out_adj = self
            .out_adj
            .iter()
            .enumerate()
            .map(|(u, outs)| outs.iter().copied().filter(|&v| !removed.contains(&(NodeId::from(u), v))).collect())
            .collect();
        let mut g = Self::from_sorted_adjacency(out_adj);
        g.origin = self.origin.clone();
        g
    }

    /// Copy of the graph with every edge incident to a removed node deleted.
    /// Node ids are kept so index tables stay addressable.
    pub fn without_nodes(&self, removed: &BTreeSet<NodeId>) -> Self {
        let out_adj = self
            .out_adj
            .iter()
            .enumerate()
            .map(|(u, outs)| {
                if removed.contains(&NodeId::from(u)) {
                    Vec::new()
                } else {
                    outs.iter().copied().filter(|v| !removed.contains(v)).collect()
                }
            })
            .collect();
        let mut g = Self::from_sorted_adjacency(out_adj);
        g.origin = self.origin.clone();
        g
    }

    /// Kahn's algorithm; `true` when the graph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.node_count();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.in_adj[v].len()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for v in &self.out_adj[u] {
                indeg[v.index()] -= 1;
                if indeg[v.index()] == 0 {
                    stack.push(v.index());
                }
            }
        }
        seen == n
    }

    pub fn to_document(&self) -> GraphDocument {
        let (kind, params, seed) = match &self.origin {
            Some(spec) => (spec.kind_name().to_string(), spec.params_json(), spec.seed()),
            None => ("custom".to_string(), serde_json::Value::Object(Default::default()), 0),
        };
        GraphDocument {
            version: GRAPH_FORMAT_VERSION,
            n: self.node_count(),
            kind,
            params,
            seed,
            edges: self.edges().map(|(u, v)| [u.0, v.0]).collect(),
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        if doc.version != GRAPH_FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: doc.version, expected: GRAPH_FORMAT_VERSION });
        }
        let g = Self::from_edges(doc.n, doc.edges.iter().map(|&[u, v]| (NodeId(u), NodeId(v))))?;
        if g.edge_count() != doc.edges.len() {
            return Err(Error::InvalidGraph("duplicate edges in document".into()));
        }
        let origin = if doc.kind == "custom" {
            None
        } else {
            Some(GeneratorSpec::from_parts(&doc.kind, &doc.params, doc.seed)?)
        };
        Ok(DirectedGraph { origin, ..g })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("graph document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_document(&doc)
    }
}

/// Versioned, byte-stable JSON form of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub n: usize,
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub edges: Vec<[u32; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(i: u32) -> NodeId {
        NodeId(i)
    }

    #[test]
    fn in_adjacency_inverts_out_adjacency() {
        let g = DirectedGraph::from_edges(4, [(n(0), n(1)), (n(2), n(1)), (n(1), n(3)), (n(3), n(0))]).unwrap();
        assert_eq!(g.edge_count(), 4);
        for (u, v) in g.edges() {
            assert!(g.in_neighbors(v).contains(&u));
        }
        let in_total: usize = g.nodes().map(|v| g.in_degree(v)).sum();
        assert_eq!(in_total, g.edge_count());
        assert_eq!(g.in_neighbors(n(1)), &[n(0), n(2)]);
    }

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        assert!(DirectedGraph::from_edges(3, [(n(1), n(1))]).is_err());
        assert!(DirectedGraph::from_edges(3, [(n(1), n(3))]).is_err());
    }

    #[test]
    fn duplicate_edges_collapse() {
        let g = DirectedGraph::from_edges(3, [(n(0), n(1)), (n(0), n(1))]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn node_removal_keeps_ids() {
        let g = DirectedGraph::from_edges(3, [(n(0), n(1)), (n(1), n(2)), (n(2), n(0))]).unwrap();
        let removed: BTreeSet<_> = [n(1)].into_iter().collect();
        let h = g.without_nodes(&removed);
        assert_eq!(h.node_count(), 3);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(n(2), n(0))]);
    }

    #[test]
    fn document_version_is_checked() {
        let g = DirectedGraph::from_edges(2, [(n(0), n(1))]).unwrap();
        let mut doc = g.to_document();
        doc.version = 99;
        assert!(matches!(DirectedGraph::from_document(&doc), Err(Error::VersionMismatch { .. })));
        assert!(DirectedGraph::from_json("{not json").is_err());
    }

    #[test]
    fn cycle_detection() {
        let dag = DirectedGraph::from_edges(3, [(n(0), n(1)), (n(1), n(2))]).unwrap();
        assert!(dag.is_acyclic());
        let cyc = DirectedGraph::from_edges(3, [(n(0), n(1)), (n(1), n(2)), (n(2), n(0))]).unwrap();
        assert!(!cyc.is_acyclic());
    }
}
