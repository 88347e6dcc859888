//! Tick-synchronous storage and retrieval episodes over a network of
//! index-table nodes.

mod episode;
mod snapshot;

pub use episode::{NodeRuntime, NodeState};
pub use snapshot::{NetworkSnapshot, TableDocument, SNAPSHOT_FORMAT_VERSION};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{weakly_connected_components, DirectedGraph, NodeId};
use crate::node::IndexTable;

/// Default table bound, counted in distinct fan-out sets.
pub const DEFAULT_CAPACITY: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Store,
    Retrieve,
}

/// Which downstream nodes an active node may forward stimulus to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupancy {
    /// A node accepts stimulus from at most one upstream node for the whole
    /// episode; initial nodes start unowned and may be claimed once.
    Exclusive,
    /// Communication nodes as in `Exclusive`; initial nodes as in `SameTick`.
    SharedInitials,
    /// A node accepts every delivery that lands in the tick of its first
    /// one, then refuses stimulus until it has lost all of its inputs.
    SameTick,
    /// Every delivery to an active or resting node is accepted.
    Open,
}

/// How fresh fan-out targets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPreference {
    /// Weighted draw over every claimable neighbour.
    Uniform,
    /// Weighted draw over active neighbours that accept stimulus first,
    /// topped up from resting ones when fewer than `e_out` are available.
    ActiveFirst,
}

/// Lookup key an initial node uses when it is cue-activated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueInput {
    /// The empty set.
    Empty,
    /// The cue nodes among its in-neighbours.
    CueNeighbors,
    /// The upstream nodes delivering to it, like any other node. During
    /// retrieval an initial node without a matching entry waits for input.
    FanIn,
    /// The whole cue set.
    WholeCue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Probability `H` that a stimulated resting node activates (store mode).
    pub activation_probability: f64,
    /// Number of fresh downstream targets drawn on a table miss.
    pub e_out: usize,
    /// A table entry is reused when its F1 score strictly exceeds this.
    pub similarity_threshold: f64,
    /// Output pairs scoring at least this are merged at capacity.
    pub merge_threshold: f64,
    /// Re-pathfinding attempts before an initial node goes dormant.
    pub repath_limit: u32,
    pub mode: Mode,
    pub seed: u64,
    /// Apply `H` during retrieval as well.
    pub retrieval_uses_activation_probability: bool,
    /// A stimulated node that fails its activation roll stays stimulated and
    /// rolls again next tick, instead of dropping the stimulus.
    pub retry_activation: bool,
    pub occupancy: Occupancy,
    pub target_preference: TargetPreference,
    pub cue_input: CueInput,
    /// Hard stop for pathological episodes.
    pub max_ticks: u32,
    /// Upper bound on resource-release rounds per storage episode.
    pub max_release_rounds: u32,
    /// Compute per-node decisions on the rayon pool.
    pub parallel: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            activation_probability: 0.6,
            e_out: 3,
            similarity_threshold: 0.8,
            merge_threshold: 0.5,
            repath_limit: 3,
            mode: Mode::Store,
            seed: 0,
            retrieval_uses_activation_probability: false,
            retry_activation: false,
            occupancy: Occupancy::Exclusive,
            target_preference: TargetPreference::ActiveFirst,
            cue_input: CueInput::WholeCue,
            max_ticks: 10_000,
            max_release_rounds: 16,
            parallel: false,
        }
    }
}

impl EpisodeConfig {
    pub fn store(seed: u64) -> Self {
        EpisodeConfig { mode: Mode::Store, seed, ..Self::default() }
    }

    pub fn retrieve(&self, seed: u64) -> Self {
        EpisodeConfig { mode: Mode::Retrieve, seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.activation_probability) {
            return Err(Error::InvalidConfig(format!("H={} outside [0,1]", self.activation_probability)));
        }
        if !(self.similarity_threshold > 0.0 && self.similarity_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "similarity threshold {} outside (0,1]",
                self.similarity_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.merge_threshold) {
            return Err(Error::InvalidConfig(format!("merge threshold {} outside [0,1]", self.merge_threshold)));
        }
        if self.e_out == 0 {
            return Err(Error::InvalidConfig("e_out must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one episode once the network has settled.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StableSubgraph {
    pub active_nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
    pub isolated_initials: BTreeSet<NodeId>,
    pub initial_nodes: BTreeSet<NodeId>,
    pub wcc_count: usize,
    /// Ticks until the episode settled.
    pub ticks: u32,
}

impl StableSubgraph {
    pub(crate) fn assemble(
        initial_nodes: BTreeSet<NodeId>,
        active_nodes: BTreeSet<NodeId>,
        edges: BTreeSet<(NodeId, NodeId)>,
        ticks: u32,
    ) -> Self {
        let mut touched = BTreeSet::new();
        for &(u, v) in &edges {
            touched.insert(u);
            touched.insert(v);
        }
        let isolated_initials: BTreeSet<NodeId> =
            initial_nodes.iter().copied().filter(|v| !touched.contains(v)).collect();
        let linked: BTreeSet<NodeId> = active_nodes.difference(&isolated_initials).copied().collect();
        let wcc_count =
            weakly_connected_components(&linked, &edges).expect("subgraph edges only touch active nodes").len();
        StableSubgraph { active_nodes, edges, isolated_initials, initial_nodes, wcc_count, ticks }
    }

    pub fn node_count(&self) -> usize {
        self.active_nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Active nodes that were not part of the cue.
    pub fn communication_nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.active_nodes.iter().filter(move |v| !self.initial_nodes.contains(v))
    }
}

/// Topology plus the index table of every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    graph: DirectedGraph,
    tables: Vec<IndexTable>,
}

impl Network {
    /// Fresh network: every table empty with bound `capacity`.
    pub fn new(graph: DirectedGraph, capacity: usize) -> Self {
        let tables = vec![IndexTable::new(capacity); graph.node_count()];
        Network { graph, tables }
    }

    pub fn from_parts(graph: DirectedGraph, tables: Vec<IndexTable>) -> Result<Self> {
        if tables.len() != graph.node_count() {
            return Err(Error::InvalidGraph(format!("{} tables for {} nodes", tables.len(), graph.node_count())));
        }
        Ok(Network { graph, tables })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn tables(&self) -> &[IndexTable] {
        &self.tables
    }

    pub fn table(&self, v: NodeId) -> &IndexTable {
        &self.tables[v.index()]
    }

    pub fn tables_mut(&mut self) -> &mut [IndexTable] {
        &mut self.tables
    }

    /// Replaces the topology, keeping tables. Node count must not change.
    pub fn with_graph(&self, graph: DirectedGraph) -> Result<Self> {
        Network::from_parts(graph, self.tables.clone())
    }

    pub fn capacity(&self) -> usize {
        self.tables.first().map_or(DEFAULT_CAPACITY, IndexTable::capacity)
    }

    fn check_nodes(&self, nodes: &BTreeSet<NodeId>) -> Result<()> {
        let n = self.graph.node_count();
        match nodes.iter().find(|v| v.index() >= n) {
            Some(v) => Err(Error::InvalidNode { node: v.0, n }),
            None => Ok(()),
        }
    }

    /// Presents `initial_nodes`, lets the network settle, then consolidates
    /// every active node's trace into its table.
    pub fn store_sample(&mut self, initial_nodes: &BTreeSet<NodeId>, cfg: &EpisodeConfig) -> Result<StableSubgraph> {
        cfg.validate()?;
        if cfg.mode != Mode::Store {
            return Err(Error::InvalidConfig("store_sample needs mode = store".into()));
        }
        if initial_nodes.is_empty() {
            return Err(Error::Precondition("a sample needs at least one initial node".into()));
        }
        self.check_nodes(initial_nodes)?;
        let run = episode::Episode::run(self, initial_nodes, cfg);
        let traces = run.traces();
        let subgraph = run.into_subgraph();
        for (v, trace) in traces {
            self.tables[v.index()].record(trace, cfg.merge_threshold);
        }
        Ok(subgraph)
    }

    /// Replays stored traces from `cue_nodes`. Tables are not modified.
    pub fn retrieve_sample(&self, cue_nodes: &BTreeSet<NodeId>, cfg: &EpisodeConfig) -> Result<StableSubgraph> {
        cfg.validate()?;
        if cfg.mode != Mode::Retrieve {
            return Err(Error::InvalidConfig("retrieve_sample needs mode = retrieve".into()));
        }
        self.check_nodes(cue_nodes)?;
        Ok(episode::Episode::run(self, cue_nodes, cfg).into_subgraph())
    }

    pub fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot::capture(self)
    }

    pub fn to_json(&self) -> String {
        self.snapshot().to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        NetworkSnapshot::from_json(s)?.restore()
    }
}
