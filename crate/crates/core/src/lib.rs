//! Decentralized sample storage in active directed graphs.
//!
//! Every node owns a small index table of activation traces and decides
//! where to forward stimulus from local information only. A stored sample is
//! the stable subgraph its initial nodes recruit; retrieval replays the
//! recorded traces from a cue.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod node;
mod par;
pub mod seed;

pub use error::{Error, Result};
pub use graph::{DirectedGraph, GeneratorSpec, NodeId};
pub use par::with_threads;
