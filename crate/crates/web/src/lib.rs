//! Browser bindings: one network held in memory, stored and queried from
//! the page.

use std::collections::BTreeSet;

use adg::engine::{EpisodeConfig, Network, StableSubgraph};
use adg::graph::{generate, GeneratorSpec};
use adg::metrics::{representation_quality, sample_nodes, score_retrieval, EmptyRetrieval};
use adg::NodeId;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: adg::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn cue(nodes: &[u32]) -> BTreeSet<NodeId> {
    nodes.iter().copied().map(NodeId).collect()
}

fn flat_edges(sub: &StableSubgraph) -> Vec<u32> {
    sub.edges.iter().flat_map(|&(u, v)| [u.0, v.0]).collect()
}

#[wasm_bindgen]
pub struct Demo {
    net: Network,
    seed: u64,
    stored: Vec<(BTreeSet<NodeId>, StableSubgraph)>,
}

#[wasm_bindgen]
impl Demo {
    /// ER network on `n` nodes with edge probability `p` and table bound `k`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, p: f64, k: usize, seed: u64) -> Result<Demo, JsError> {
        let g = generate(&GeneratorSpec::er(p, seed), n).map_err(js_err)?;
        Ok(Demo { net: Network::new(g, k), seed, stored: Vec::new() })
    }

    pub fn node_count(&self) -> usize {
        self.net.graph().node_count()
    }

    /// Graph edges as `[u0, v0, u1, v1, ...]`.
    pub fn edges(&self) -> Vec<u32> {
        self.net.graph().edges().flat_map(|(u, v)| [u.0, v.0]).collect()
    }

    /// Distinct outputs held by every node's table.
    pub fn occupancy(&self) -> Vec<u32> {
        self.net.tables().iter().map(|t| t.distinct_output_count() as u32).collect()
    }

    pub fn stored_count(&self) -> usize {
        self.stored.len()
    }

    /// Cue of the next sample in the seeded stream.
    pub fn next_cue(&self, s: usize) -> Result<Vec<u32>, JsError> {
        let c = sample_nodes(self.node_count(), s, self.seed, self.stored.len() as u64).map_err(js_err)?;
        Ok(c.into_iter().map(|v| v.0).collect())
    }

    /// Stores a sample; returns `{edges, nodes, quality}` as JSON.
    pub fn store(&mut self, nodes: &[u32]) -> Result<String, JsError> {
        let initial = cue(nodes);
        let i = self.stored.len() as u64;
        let sub = self.net.store_sample(&initial, &EpisodeConfig::store(self.seed ^ i)).map_err(js_err)?;
        let quality =
            if initial.is_empty() { 1.0 } else { representation_quality(&sub, initial.len()).map_err(js_err)? };
        let doc = json!({
            "edges": flat_edges(&sub),
            "nodes": sub.active_nodes.iter().map(|v| v.0).collect::<Vec<_>>(),
            "quality": quality,
        });
        self.stored.push((initial, sub));
        Ok(doc.to_string())
    }

    /// Retrieves from a cue; when the cue matches a stored sample the result
    /// also carries its accuracy and completeness.
    pub fn retrieve(&self, nodes: &[u32]) -> Result<String, JsError> {
        let c = cue(nodes);
        let got = self.net.retrieve_sample(&c, &EpisodeConfig::store(self.seed).retrieve(self.seed)).map_err(js_err)?;
        let score = self
            .stored
            .iter()
            .rev()
            .find(|(init, _)| *init == c)
            .map(|(_, sub)| score_retrieval(sub, &got, EmptyRetrieval::Vacuous));
        Ok(json!({
            "edges": flat_edges(&got),
            "nodes": got.active_nodes.iter().map(|v| v.0).collect::<Vec<_>>(),
            "accuracy": score.map(|s| s.accuracy),
            "completeness": score.map(|s| s.completeness),
        })
        .to_string())
    }

    /// Retrieves every stored sample with its full cue; returns `[P, C]`.
    pub fn recall_all(&self) -> Result<Vec<f64>, JsError> {
        if self.stored.is_empty() {
            return Ok(vec![1.0, 1.0]);
        }
        let rcfg = EpisodeConfig::store(self.seed).retrieve(self.seed);
        let (mut p, mut c) = (0.0, 0.0);
        for (init, sub) in &self.stored {
            let got = self.net.retrieve_sample(init, &rcfg).map_err(js_err)?;
            let s = score_retrieval(sub, &got, EmptyRetrieval::Vacuous);
            p += s.accuracy;
            c += s.completeness;
        }
        let k = self.stored.len() as f64;
        Ok(vec![p / k, c / k])
    }
}
