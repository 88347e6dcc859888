//! Retrieval quality and storage capacity.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::engine::{EpisodeConfig, Network, StableSubgraph};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::par::map_indices;
use crate::seed::{self, tag};

/// Score assigned when retrieval returns no edges although some were stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyRetrieval {
    /// Accuracy 1: nothing false was produced.
    #[default]
    Vacuous,
    /// Accuracy 0.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalScore {
    pub accuracy: f64,
    pub completeness: f64,
}

/// Edge-set precision and recall of `retrieved` against `stored`.
pub fn score_retrieval(stored: &StableSubgraph, retrieved: &StableSubgraph, empty: EmptyRetrieval) -> RetrievalScore {
    score_edges(&stored.edges, &retrieved.edges, empty)
}

pub fn score_edges(
    stored: &BTreeSet<(NodeId, NodeId)>,
    retrieved: &BTreeSet<(NodeId, NodeId)>,
    empty: EmptyRetrieval,
) -> RetrievalScore {
    let common = stored.intersection(retrieved).count() as f64;
    let accuracy = if retrieved.is_empty() {
        match empty {
            EmptyRetrieval::Strict if !stored.is_empty() => 0.0,
            _ => 1.0,
        }
    } else {
        common / retrieved.len() as f64
    };
    let completeness = if stored.is_empty() { 1.0 } else { common / stored.len() as f64 };
    RetrievalScore { accuracy, completeness }
}

/// `(s - l) / s` with `l` the number of isolated initial nodes.
pub fn representation_quality(subgraph: &StableSubgraph, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::Precondition("representation quality needs s >= 1".into()));
    }
    let l = subgraph.isolated_initials.len();
    if l > s {
        return Err(Error::Precondition(format!("{l} isolated initial nodes but s = {s}")));
    }
    Ok((s - l) as f64 / s as f64)
}

/// `nK / (s + c)`.
pub fn simple_capacity_bound(n: usize, k: usize, s: usize, c: f64) -> Result<f64> {
    let denom = s as f64 + c;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Precondition(format!("s + c must be positive, got {denom}")));
    }
    Ok((n * k) as f64 / denom)
}

/// Ways to split `n` nodes into `t` unordered disjoint groups of
/// `(s + c) / t` nodes each: `prod_k C(n - k g, g) / t!`.
pub fn grouping_capacity_bound(n: u64, s: u64, c: u64, t: u64) -> Result<BigUint> {
    let total = s + c;
    if t == 0 || !total.is_multiple_of(t) {
        return Err(Error::InvalidParameters(format!("t = {t} does not divide s + c = {total}")));
    }
    if total > n {
        return Err(Error::InvalidParameters(format!("s + c = {total} exceeds n = {n}")));
    }
    let g = total / t;
    let mut product = BigUint::one();
    for k in 0..t {
        product *= binomial(n - k * g, g);
    }
    let mut t_factorial = BigUint::one();
    for i in 2..=t {
        t_factorial *= i;
    }
    Ok(product / t_factorial)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Levels that a stored prefix must strictly exceed. `None` skips a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityThresholds {
    pub quality: Option<f64>,
    pub accuracy: Option<f64>,
    pub completeness: Option<f64>,
}

impl Default for CapacityThresholds {
    fn default() -> Self {
        CapacityThresholds { quality: Some(0.9), accuracy: Some(0.9), completeness: Some(0.9) }
    }
}

impl CapacityThresholds {
    /// Completeness only.
    pub fn completeness(level: f64) -> Self {
        CapacityThresholds { quality: None, accuracy: None, completeness: Some(level) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub sample_size: usize,
    /// Give up counting past this many stored samples.
    pub max_samples: usize,
    /// Re-check all stored samples after every `stride`-th store.
    pub stride: usize,
    pub thresholds: CapacityThresholds,
    pub empty_retrieval: EmptyRetrieval,
    pub episode: EpisodeConfig,
    pub seed: u64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            sample_size: 60,
            max_samples: 2000,
            stride: 1,
            thresholds: CapacityThresholds::default(),
            empty_retrieval: EmptyRetrieval::default(),
            episode: EpisodeConfig::default(),
            seed: 0,
        }
    }
}

/// One row per stored sample. The means are those of the latest re-check at
/// or before this sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub index: usize,
    pub quality: f64,
    pub mean_accuracy: f64,
    pub mean_completeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Largest verified prefix meeting every threshold.
    pub capacity: usize,
    /// `true` when `max_samples` was reached without a violation.
    pub saturated: bool,
    pub mean_accuracy: f64,
    pub mean_completeness: f64,
    pub per_sample_quality: Vec<f64>,
    pub rows: Vec<CapacityRow>,
    /// Mean number of communication nodes over the stored subgraphs.
    pub mean_communication_nodes: f64,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    pub mean_wcc: f64,
}

impl CapacityReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("index,Q,mean_P,mean_C\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.index, r.quality, r.mean_accuracy, r.mean_completeness));
        }
        out
    }
}

/// Initial set of sample `i` in a seeded stream: `s` distinct nodes of `0..n`.
pub fn sample_nodes(n: usize, s: usize, seed: u64, i: u64) -> Result<BTreeSet<NodeId>> {
    if s > n {
        return Err(Error::InvalidParameters(format!("sample size {s} exceeds n = {n}")));
    }
    let mut rng = seed::rng(seed, &[tag::SAMPLE, i]);
    Ok(index::sample(&mut rng, n, s).into_iter().map(NodeId::from).collect())
}

/// Retrieves every stored sample with its full cue and averages the scores.
pub fn mean_retrieval(
    net: &Network,
    stored: &[(BTreeSet<NodeId>, StableSubgraph)],
    cfg: &EpisodeConfig,
    seed: u64,
    empty: EmptyRetrieval,
) -> Result<RetrievalScore> {
    if stored.is_empty() {
        return Ok(RetrievalScore { accuracy: 1.0, completeness: 1.0 });
    }
    let run = |j: usize| -> Result<RetrievalScore> {
        let rcfg = cfg.retrieve(seed::derive(seed, &[tag::RETRIEVE, j as u64]));
        let got = net.retrieve_sample(&stored[j].0, &rcfg)?;
        Ok(score_retrieval(&stored[j].1, &got, empty))
    };
    let scores = if cfg.parallel { map_indices(stored.len(), run) } else { (0..stored.len()).map(run).collect() };
    let (mut p, mut c) = (0.0, 0.0);
    for s in scores {
        let s = s?;
        p += s.accuracy;
        c += s.completeness;
    }
    let k = stored.len() as f64;
    Ok(RetrievalScore { accuracy: p / k, completeness: c / k })
}

/// Stores samples one at a time and stops at the first prefix that breaks a
/// threshold.
pub fn reliable_capacity(mut net: Network, cfg: &CapacityConfig) -> Result<CapacityReport> {
    let n = net.graph().node_count();
    if cfg.stride == 0 {
        return Err(Error::InvalidConfig("stride must be at least 1".into()));
    }
    let mut stored: Vec<(BTreeSet<NodeId>, StableSubgraph)> = Vec::new();
    let mut report = CapacityReport {
        capacity: 0,
        saturated: false,
        mean_accuracy: 1.0,
        mean_completeness: 1.0,
        per_sample_quality: Vec::new(),
        rows: Vec::new(),
        mean_communication_nodes: 0.0,
        mean_nodes: 0.0,
        mean_edges: 0.0,
        mean_wcc: 0.0,
    };
    let above = |level: Option<f64>, x: f64| level.is_none_or(|l| x > l);
    let (mut comm, mut nodes, mut edges, mut wcc) = (0usize, 0usize, 0usize, 0usize);
    let mut latest = RetrievalScore { accuracy: 1.0, completeness: 1.0 };
    for i in 0..cfg.max_samples {
        let initial = sample_nodes(n, cfg.sample_size, cfg.seed, i as u64)?;
        let scfg = EpisodeConfig { seed: seed::derive(cfg.seed, &[tag::STORE, i as u64]), ..cfg.episode.clone() };
        let sub = net.store_sample(&initial, &scfg)?;
        let q = representation_quality(&sub, cfg.sample_size.max(1))?;
        comm += sub.communication_nodes().count();
        nodes += sub.node_count();
        edges += sub.edge_count();
        wcc += sub.wcc_count;
        report.per_sample_quality.push(q);
        stored.push((initial, sub));
        let last = i + 1 == cfg.max_samples;
        let quality_ok = above(cfg.thresholds.quality, q);
        if quality_ok && ((i + 1) % cfg.stride == 0 || last) {
            latest = mean_retrieval(&net, &stored, &cfg.episode, cfg.seed, cfg.empty_retrieval)?;
        }
        report.rows.push(CapacityRow {
            index: i + 1,
            quality: q,
            mean_accuracy: latest.accuracy,
            mean_completeness: latest.completeness,
        });
        if !quality_ok
            || !above(cfg.thresholds.accuracy, latest.accuracy)
            || !above(cfg.thresholds.completeness, latest.completeness)
        {
            break;
        }
        if (i + 1) % cfg.stride == 0 || last {
            report.capacity = i + 1;
            report.mean_accuracy = latest.accuracy;
            report.mean_completeness = latest.completeness;
            report.saturated = last;
        }
    }
    let k = stored.len().max(1) as f64;
    report.mean_communication_nodes = comm as f64 / k;
    report.mean_nodes = nodes as f64 / k;
    report.mean_edges = edges as f64 / k;
    report.mean_wcc = wcc as f64 / k;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(edges: &[(u32, u32)]) -> StableSubgraph {
        StableSubgraph {
            edges: edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect(),
            ..StableSubgraph::default()
        }
    }

    #[test]
    fn identical_subgraphs_score_one() {
        let a = sub(&[(0, 1), (1, 2)]);
        let s = score_retrieval(&a, &a, EmptyRetrieval::Vacuous);
        assert_eq!((s.accuracy, s.completeness), (1.0, 1.0));
    }

    #[test]
    fn half_retrieved() {
        let s = score_retrieval(&sub(&[(0, 1), (1, 2)]), &sub(&[(0, 1)]), EmptyRetrieval::Vacuous);
        assert_eq!((s.accuracy, s.completeness), (1.0, 0.5));
    }

    #[test]
    fn sixteen_stored_twenty_retrieved_twelve_common() {
        let stored: Vec<(u32, u32)> = (0..16).map(|i| (i, i + 100)).collect();
        let mut got: Vec<(u32, u32)> = (0..12).map(|i| (i, i + 100)).collect();
        got.extend((0..8).map(|i| (i + 50, i + 200)));
        let s = score_retrieval(&sub(&stored), &sub(&got), EmptyRetrieval::Vacuous);
        assert!((s.accuracy - 0.6).abs() < 1e-12 && (s.completeness - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_retrieval_conventions() {
        let stored = sub(&[(0, 1)]);
        let empty = sub(&[]);
        let v = score_retrieval(&stored, &empty, EmptyRetrieval::Vacuous);
        assert_eq!((v.accuracy, v.completeness), (1.0, 0.0));
        let s = score_retrieval(&stored, &empty, EmptyRetrieval::Strict);
        assert_eq!((s.accuracy, s.completeness), (0.0, 0.0));
        let both = score_retrieval(&empty, &empty, EmptyRetrieval::Strict);
        assert_eq!((both.accuracy, both.completeness), (1.0, 1.0));
    }

    #[test]
    fn quality_formula() {
        let mut g = StableSubgraph::default();
        assert_eq!(representation_quality(&g, 60).unwrap(), 1.0);
        g.isolated_initials = (0..3).map(NodeId).collect();
        assert!((representation_quality(&g, 60).unwrap() - 0.95).abs() < 1e-12);
        assert_eq!(representation_quality(&g, 3).unwrap(), 0.0);
        assert!(representation_quality(&g, 0).is_err());
    }

    #[test]
    fn simple_bound() {
        assert!((simple_capacity_bound(500, 20, 60, 25.0).unwrap() - 117.647).abs() < 1e-3);
        assert_eq!(simple_capacity_bound(3, 20, 60, 0.0).unwrap(), 1.0);
        assert!(simple_capacity_bound(3, 20, 0, 0.0).is_err());
    }

    #[test]
    fn grouping_bound_small_cases() {
        assert_eq!(grouping_capacity_bound(6, 3, 1, 2).unwrap(), BigUint::from(45u32));
        assert_eq!(grouping_capacity_bound(4, 4, 0, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(grouping_capacity_bound(10, 2, 1, 1).unwrap(), binomial(10, 3));
        assert!(grouping_capacity_bound(10, 2, 1, 2).is_err());
        assert!(grouping_capacity_bound(3, 2, 2, 2).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial(5, 0), BigUint::one());
        assert_eq!(binomial(3, 5), BigUint::default());
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
    }

    #[test]
    fn capacity_csv_header() {
        let r = CapacityReport {
            capacity: 1,
            saturated: false,
            mean_accuracy: 1.0,
            mean_completeness: 1.0,
            per_sample_quality: vec![1.0],
            rows: vec![CapacityRow { index: 1, quality: 1.0, mean_accuracy: 1.0, mean_completeness: 0.5 }],
            mean_communication_nodes: 0.0,
            mean_nodes: 0.0,
            mean_edges: 0.0,
            mean_wcc: 0.0,
        };
        assert_eq!(r.csv(), "index,Q,mean_P,mean_C\n1,1,1,0.5\n");
    }
}
