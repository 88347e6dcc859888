use serde::{Deserialize, Serialize};

use super::{Network, DEFAULT_CAPACITY};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, GraphDocument, NodeId};
use crate::node::{normalize, ActivationTrace, IndexTable};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Table of one node. Entries keep storage order, since lookup ties go to
/// the earliest entry; the sets inside each entry are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub node: NodeId,
    pub entries: Vec<ActivationTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSnapshot {
    pub version: u32,
    /// Table bound `K`, shared by all nodes.
    #[serde(default = "default_capacity")]
    pub capacity: usize,
    pub graph: GraphDocument,
    /// Nodes with empty tables are omitted.
    pub tables: Vec<TableDocument>,
}

fn default_capacity() -> usize {
    DEFAULT_CAPACITY
}

impl NetworkSnapshot {
    pub fn capture(net: &Network) -> Self {
        let tables = net
            .tables()
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(v, t)| TableDocument { node: NodeId::from(v), entries: t.entries().to_vec() })
            .collect();
        NetworkSnapshot {
            version: SNAPSHOT_FORMAT_VERSION,
            capacity: net.capacity(),
            graph: net.graph().to_document(),
            tables,
        }
    }

    pub fn restore(self) -> Result<Network> {
        if self.version != SNAPSHOT_FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: self.version, expected: SNAPSHOT_FORMAT_VERSION });
        }
        let graph = DirectedGraph::from_document(&self.graph)?;
        let n = graph.node_count();
        let mut tables = vec![IndexTable::new(self.capacity); n];
        let mut last: Option<NodeId> = None;
        for doc in self.tables {
            if doc.node.index() >= n {
                return Err(Error::InvalidNode { node: doc.node.0, n });
            }
            if last.is_some_and(|p| p >= doc.node) {
                return Err(Error::Malformed(format!("table for node {} out of order or repeated", doc.node)));
            }
            last = Some(doc.node);
            for e in &doc.entries {
                if e.fan_in.iter().chain(&e.fan_out).any(|v| v.index() >= n) {
                    return Err(Error::Malformed(format!("entry of node {} names a node outside 0..{n}", doc.node)));
                }
                if normalize(e.fan_in.clone()) != e.fan_in || normalize(e.fan_out.clone()) != e.fan_out {
                    return Err(Error::Malformed(format!("entry sets of node {} are not sorted", doc.node)));
                }
                if e.strength == 0 {
                    return Err(Error::Malformed(format!("zero strength in table of node {}", doc.node)));
                }
            }
            let distinct = {
                let mut outs: Vec<_> = doc.entries.iter().map(|e| &e.fan_out).collect();
                outs.sort();
                outs.dedup();
                outs.len()
            };
            if distinct > self.capacity {
                return Err(Error::Malformed(format!(
                    "table of node {} holds {distinct} outputs, bound is {}",
                    doc.node, self.capacity
                )));
            }
            tables[doc.node.index()] = IndexTable::from_entries(self.capacity, doc.entries);
        }
        Network::from_parts(graph, tables)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        if let Some(v) = value.get("version").and_then(serde_json::Value::as_u64) {
            if v != u64::from(SNAPSHOT_FORMAT_VERSION) {
                return Err(Error::VersionMismatch { found: v as u32, expected: SNAPSHOT_FORMAT_VERSION });
            }
        }
        serde_json::from_value(value).map_err(|e| Error::Malformed(e.to_string()))
    }
}
