use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DirectedGraph, NodeId};
use crate::error::{Error, Result};

/// Topology family with its kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// Erdős–Rényi: every ordered pair independently with probability `p`.
    Er { p: f64 },
    /// Erdős–Rényi with exactly `m` distinct ordered pairs, uniform.
    ErEdges { m: usize },
    /// Globally coupled: all ordered pairs.
    Global,
    /// Nearest-neighbour ring, `l` neighbours on each side, both directions.
    Ring { l: usize },
    /// Bidirectional spokes between node 0 and every other node.
    Star,
    /// Ring plus `long_range` uniformly random out-edges per node.
    Kleinberg { l: usize, long_range: usize },
    /// Price preferential attachment with `m_new` out-edges per new node.
    Price { m_new: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec { kind, seed }
    }

    pub fn er(p: f64, seed: u64) -> Self {
        Self::new(GeneratorKind::Er { p }, seed)
    }

    pub fn er_edges(m: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::ErEdges { m }, seed)
    }

    pub fn global() -> Self {
        Self::new(GeneratorKind::Global, 0)
    }

    pub fn ring(l: usize) -> Self {
        Self::new(GeneratorKind::Ring { l }, 0)
    }

    pub fn star() -> Self {
        Self::new(GeneratorKind::Star, 0)
    }

    pub fn kleinberg(l: usize, long_range: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::Kleinberg { l, long_range }, seed)
    }

    pub fn price(m_new: usize, seed: u64) -> Self {
        Self::new(GeneratorKind::Price { m_new }, seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GeneratorKind::Er { .. } => "er",
            GeneratorKind::ErEdges { .. } => "er_edges",
            GeneratorKind::Global => "global",
            GeneratorKind::Ring { .. } => "ring",
            GeneratorKind::Star => "star",
            GeneratorKind::Kleinberg { .. } => "kleinberg",
            GeneratorKind::Price { .. } => "price",
        }
    }

    /// Kind-specific parameters as a JSON object (without the `kind` tag).
    pub fn params_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.kind).expect("generator kind serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("kind");
        }
        v
    }

    pub fn from_parts(kind: &str, params: &serde_json::Value, seed: u64) -> Result<Self> {
        let mut obj = match params {
            serde_json::Value::Object(m) => m.clone(),
            serde_json::Value::Null => Default::default(),
            other => return Err(Error::Malformed(format!("generator params must be an object, got {other}"))),
        };
        obj.insert("kind".into(), serde_json::Value::String(kind.to_string()));
        let kind: GeneratorKind = serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| Error::Malformed(format!("generator spec: {e}")))?;
        Ok(GeneratorSpec { kind, seed })
    }

    /// Checks the parameter ranges for a graph of `n` nodes.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        match self.kind {
            GeneratorKind::Er { p } if !(0.0..=1.0).contains(&p) => bad(format!("er: p={p} outside [0,1]")),
            GeneratorKind::ErEdges { m } if m > n * n.saturating_sub(1) => {
                bad(format!("er_edges: m={m} exceeds the {} ordered pairs", n * n.saturating_sub(1)))
            }
            GeneratorKind::Ring { l } | GeneratorKind::Kleinberg { l, .. } if l < 1 || 2 * l >= n => {
                bad(format!("{}: need 1 <= L < n/2, got L={l}, n={n}", self.kind_name()))
            }
            GeneratorKind::Kleinberg { l, long_range } if long_range + 2 * l >= n => {
                bad(format!("kleinberg: {long_range} long-range edges do not fit beside ring L={l} at n={n}"))
            }
            GeneratorKind::Price { m_new } if m_new < 1 || m_new >= n => {
                bad(format!("price: need 1 <= m_new < n, got m_new={m_new}, n={n}"))
            }
            GeneratorKind::Star if n < 2 => bad("star: need at least 2 nodes".into()),
            _ => Ok(()),
        }
    }
}

/// Builds a graph of `n` nodes. Deterministic for a fixed `(spec, n)`.
pub fn generate(spec: &GeneratorSpec, n: usize) -> Result<DirectedGraph> {
    spec.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let out_adj = match spec.kind {
        GeneratorKind::Er { p } => erdos_renyi(n, p, &mut rng),
        GeneratorKind::ErEdges { m } => erdos_renyi_edges(n, m, &mut rng),
        GeneratorKind::Global => (0..n).map(|u| (0..n).filter(|&v| v != u).map(NodeId::from).collect()).collect(),
        GeneratorKind::Ring { l } => ring_sets(n, l).into_iter().map(|s| s.into_iter().collect()).collect(),
        GeneratorKind::Star => {
            let mut adj = vec![Vec::new(); n];
            adj[0] = (1..n).map(NodeId::from).collect();
            for leaf in adj.iter_mut().skip(1) {
                leaf.push(NodeId(0));
            }
            adj
        }
        GeneratorKind::Kleinberg { l, long_range } => kleinberg(n, l, long_range, &mut rng),
        GeneratorKind::Price { m_new } => price(n, m_new, &mut rng),
    };
    Ok(DirectedGraph::from_sorted_adjacency(out_adj).with_origin(spec.clone()))
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<NodeId>> {
    (0..n).map(|u| (0..n).filter(|&v| v != u && rng.gen::<f64>() < p).map(NodeId::from).collect()).collect()
}

fn erdos_renyi_edges(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<NodeId>> {
    let mut adj = vec![Vec::new(); n];
    if n < 2 {
        return adj;
    }
    // pair index k encodes u = k / (n-1) and the k % (n-1)-th node other than u
    let mut picked = rand::seq::index::sample(rng, n * (n - 1), m).into_vec();
    picked.sort_unstable();
    for k in picked {
        let u = k / (n - 1);
        let r = k % (n - 1);
        let v = if r < u { r } else { r + 1 };
        adj[u].push(NodeId::from(v));
    }
    adj
}

fn ring_sets(n: usize, l: usize) -> Vec<BTreeSet<NodeId>> {
    (0..n).map(|u| (1..=l).flat_map(|d| [(u + d) % n, (u + n - d) % n]).map(NodeId::from).collect()).collect()
}

fn kleinberg(n: usize, l: usize, long_range: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<NodeId>> {
    let mut sets = ring_sets(n, l);
    for (u, outs) in sets.iter_mut().enumerate() {
        let mut added = 0;
        while added < long_range {
            let v = rng.gen_range(0..n);
            if v != u && outs.insert(NodeId::from(v)) {
                added += 1;
            }
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

/// Nodes arrive in id order; each new node points at up to `m_new` distinct
/// older nodes drawn with weight `in_degree + 1`.
fn price(n: usize, m_new: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<NodeId>> {
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    // one entry per unit of attachment weight
    let mut bag: Vec<NodeId> = Vec::with_capacity(n * (m_new + 1));
    for (u, out) in adj.iter_mut().enumerate() {
        let mut chosen = BTreeSet::new();
        if u <= m_new {
            chosen.extend((0..u).map(NodeId::from));
        } else {
            while chosen.len() < m_new {
                chosen.insert(bag[rng.gen_range(0..bag.len())]);
            }
        }
        bag.extend(chosen.iter().copied());
        bag.push(NodeId::from(u));
        *out = chosen.into_iter().collect();
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_zero_probability_has_no_edges() {
        let g = generate(&GeneratorSpec::er(0.0, 1), 10).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn er_edges_hits_the_exact_count() {
        let g = generate(&GeneratorSpec::er_edges(3101, 7), 500).unwrap();
        assert_eq!(g.edge_count(), 3101);
        assert!(g.edges().all(|(u, v)| u != v));
        let full = generate(&GeneratorSpec::er_edges(12, 0), 4).unwrap();
        assert_eq!(full.edge_count(), 12);
        assert!(generate(&GeneratorSpec::er_edges(13, 0), 4).is_err());
    }

    #[test]
    fn global_has_all_ordered_pairs() {
        let g = generate(&GeneratorSpec::global(), 10).unwrap();
        assert_eq!(g.edge_count(), 90);
    }

    #[test]
    fn star_edge_count() {
        let g = generate(&GeneratorSpec::star(), 1000).unwrap();
        assert_eq!(g.edge_count(), 1998);
    }

    #[test]
    fn ring_degrees_are_two_l() {
        let g = generate(&GeneratorSpec::ring(3), 50).unwrap();
        for v in g.nodes() {
            assert_eq!(g.out_degree(v), 6);
            assert_eq!(g.in_degree(v), 6);
        }
        assert_eq!(g.edge_count(), 300);
    }

    #[test]
    fn kleinberg_adds_long_range_edges() {
        let g = generate(&GeneratorSpec::kleinberg(3, 1, 5), 1000).unwrap();
        assert_eq!(g.edge_count(), 7000);
        for v in g.nodes() {
            assert_eq!(g.out_degree(v), 7);
        }
    }

    #[test]
    fn price_is_acyclic_and_points_backwards() {
        let g = generate(&GeneratorSpec::price(6, 3), 1000).unwrap();
        assert!(g.is_acyclic());
        assert!(g.edges().all(|(u, v)| v < u));
        assert_eq!(g.edge_count(), 15 + 994 * 6);
    }

    #[test]
    fn parameter_validation() {
        assert!(generate(&GeneratorSpec::er(1.5, 0), 10).is_err());
        assert!(generate(&GeneratorSpec::er(-0.1, 0), 10).is_err());
        assert!(generate(&GeneratorSpec::ring(0), 10).is_err());
        assert!(generate(&GeneratorSpec::ring(5), 10).is_err());
        assert!(generate(&GeneratorSpec::ring(4), 10).is_ok());
        assert!(generate(&GeneratorSpec::price(0, 0), 10).is_err());
        assert!(generate(&GeneratorSpec::price(10, 0), 10).is_err());
        assert!(generate(&GeneratorSpec::kleinberg(3, 4, 0), 10).is_err());
    }

    #[test]
    fn spec_round_trips_through_parts() {
        let spec = GeneratorSpec::kleinberg(3, 1, 42);
        let back = GeneratorSpec::from_parts(spec.kind_name(), &spec.params_json(), spec.seed()).unwrap();
        assert_eq!(spec, back);
        assert!(GeneratorSpec::from_parts("er", &serde_json::json!({"q": 1}), 0).is_err());
    }
}
