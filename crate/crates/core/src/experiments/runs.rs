use std::collections::BTreeSet;
use std::time::Instant;

use super::output::{CapacityCurve, SEED_DERIVATION};
use super::{
    damage_network, perturb_cue, ExperimentConfig, ExperimentKind, ExperimentOutput, ExperimentRecord, NetworkSpec,
    Timing,
};
use crate::engine::{Network, StableSubgraph};
use crate::error::Result;
use crate::graph::{average_path_length, clustering_coefficient, generate, DirectedGraph, GeneratorSpec, NodeId};
use crate::metrics::{
    reliable_capacity, representation_quality, sample_nodes, score_retrieval, CapacityConfig, CapacityReport,
    EmptyRetrieval, RetrievalScore,
};
use crate::par::map_indices;
use crate::seed::{self, tag};

/// A network after its sample stream was stored.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub network: Network,
    /// Cue and stored subgraph of every sample, in store order.
    pub stored: Vec<(BTreeSet<NodeId>, StableSubgraph)>,
    pub quality: f64,
    pub nodes: f64,
    pub edges: f64,
    pub wcc: f64,
    pub comm_nodes: f64,
}

pub fn build_graph(spec: &NetworkSpec, seed: u64) -> Result<DirectedGraph> {
    let g = GeneratorSpec { seed: seed::derive(spec.generator.seed, &[tag::GRAPH, seed]), ..spec.generator.clone() };
    generate(&g, spec.n)
}

fn capacity_config(cfg: &ExperimentConfig, seed: u64) -> CapacityConfig {
    CapacityConfig {
        sample_size: cfg.sample_size,
        max_samples: cfg.search.max_samples,
        stride: cfg.search.stride,
        thresholds: cfg.search.thresholds,
        empty_retrieval: cfg.empty_retrieval,
        episode: cfg.episode.clone(),
        seed,
    }
}

/// Stores `cfg.samples` samples of the seeded stream, the same stream the
/// capacity search uses.
pub fn load_network(graph: DirectedGraph, cfg: &ExperimentConfig, seed: u64) -> Result<Loaded> {
    let n = graph.node_count();
    let mut network = Network::new(graph, cfg.table_capacity);
    let mut stored = Vec::with_capacity(cfg.samples);
    let (mut q, mut nodes, mut edges, mut wcc, mut comm) = (0.0, 0usize, 0usize, 0usize, 0usize);
    for i in 0..cfg.samples {
        let initial = sample_nodes(n, cfg.sample_size, seed, i as u64)?;
        let mut ecfg = cfg.episode.clone();
        ecfg.seed = seed::derive(seed, &[tag::STORE, i as u64]);
        let sub = network.store_sample(&initial, &ecfg)?;
        q += representation_quality(&sub, cfg.sample_size)?;
        nodes += sub.node_count();
        edges += sub.edge_count();
        wcc += sub.wcc_count;
        comm += sub.communication_nodes().count();
        stored.push((initial, sub));
    }
    let k = cfg.samples.max(1) as f64;
    Ok(Loaded {
        network,
        stored,
        quality: q / k,
        nodes: nodes as f64 / k,
        edges: edges as f64 / k,
        wcc: wcc as f64 / k,
        comm_nodes: comm as f64 / k,
    })
}

/// Indices of the stored samples to retrieve.
fn retrieval_indices(total: usize, limit: Option<usize>) -> Vec<usize> {
    match limit {
        Some(l) if l < total => (0..l).map(|k| k * total / l).collect(),
        _ => (0..total).collect(),
    }
}

/// Mean score over `indices`, retrieving sample `j` from `cue(j)`.
pub fn measure(
    net: &Network,
    loaded: &Loaded,
    indices: &[usize],
    cfg: &ExperimentConfig,
    seed: u64,
    cue: impl Fn(usize) -> Result<BTreeSet<NodeId>> + Sync + Send,
) -> Result<RetrievalScore> {
    let empty: EmptyRetrieval = cfg.empty_retrieval;
    let scores = map_indices(indices.len(), |k| -> Result<RetrievalScore> {
        let j = indices[k];
        let rcfg = cfg.episode.retrieve(seed::derive(seed, &[tag::RETRIEVE, j as u64]));
        let got = net.retrieve_sample(&cue(j)?, &rcfg)?;
        Ok(score_retrieval(&loaded.stored[j].1, &got, empty))
    });
    let (mut p, mut c) = (0.0, 0.0);
    for s in scores {
        let s = s?;
        p += s.accuracy;
        c += s.completeness;
    }
    let k = indices.len().max(1) as f64;
    Ok(RetrievalScore { accuracy: p / k, completeness: c / k })
}

fn base_record(
    kind: ExperimentKind,
    spec: &NetworkSpec,
    g: &DirectedGraph,
    s: usize,
    seed: u64,
    variant: &str,
) -> ExperimentRecord {
    ExperimentRecord::blank(kind.name(), &spec.label, g.node_count(), g.edge_count(), s, seed, variant)
}

fn with_loaded(mut r: ExperimentRecord, l: &Loaded) -> ExperimentRecord {
    r.quality = l.quality;
    r.nodes = l.nodes;
    r.edges = l.edges;
    r.wcc = l.wcc;
    r.comm_nodes = l.comm_nodes;
    r
}

fn with_report(mut r: ExperimentRecord, rep: &CapacityReport) -> ExperimentRecord {
    r.accuracy = rep.mean_accuracy;
    r.completeness = rep.mean_completeness;
    let q = &rep.per_sample_quality;
    r.quality = q.iter().sum::<f64>() / q.len().max(1) as f64;
    r.nodes = rep.mean_nodes;
    r.edges = rep.mean_edges;
    r.wcc = rep.mean_wcc;
    r.comm_nodes = rep.mean_communication_nodes;
    r.capacity = Some(rep.capacity);
    r.saturated = Some(rep.saturated);
    r
}

/// Runs `unit` once per (network, seed) and collects rows and timings.
fn each_unit(
    cfg: &ExperimentConfig,
    mut unit: impl FnMut(&NetworkSpec, u64) -> Result<Vec<ExperimentRecord>>,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut timings = Vec::new();
    for spec in &cfg.networks {
        for &seed in &cfg.seeds {
            let t0 = Instant::now();
            records.extend(unit(spec, seed)?);
            timings.push(Timing { network: spec.label.clone(), seed, millis: t0.elapsed().as_millis() as u64 });
        }
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        seeds: cfg.seeds.clone(),
        seed_derivation: SEED_DERIVATION.to_string(),
        records,
        timings,
        curves: Vec::new(),
    })
}

/// Stores the sample stream on every network and retrieves every sample
/// with its full cue. Optionally searches the reliable capacity of each
/// network and of an ER sweep over `p_grid`.
pub fn run_capacity(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let kind = ExperimentKind::Capacity;
    let mut curves = Vec::new();
    let mut out = each_unit(cfg, |spec, seed| {
        let g = build_graph(spec, seed)?;
        let mut rows = Vec::new();
        if cfg.samples > 0 {
            let loaded = load_network(g.clone(), cfg, seed)?;
            let idx = retrieval_indices(loaded.stored.len(), cfg.retrieve_limit);
            let score = measure(&loaded.network, &loaded, &idx, cfg, seed, |j| Ok(loaded.stored[j].0.clone()))?;
            let mut r = with_loaded(base_record(kind, spec, &g, cfg.sample_size, seed, "load"), &loaded);
            r.accuracy = score.accuracy;
            r.completeness = score.completeness;
            rows.push(r);
        }
        if cfg.reliable {
            let rep = reliable_capacity(Network::new(g.clone(), cfg.table_capacity), &capacity_config(cfg, seed))?;
            rows.push(with_report(base_record(kind, spec, &g, cfg.sample_size, seed, "reliable"), &rep));
            curves.push(CapacityCurve { network: spec.label.clone(), seed, rows: rep.rows });
        }
        Ok(rows)
    })?;
    out.curves = curves;
    if let Some(first) = cfg.networks.first() {
        for &p in &cfg.p_grid {
            for &seed in &cfg.seeds {
                let t0 = Instant::now();
                let spec = NetworkSpec::new(&format!("er_p{p}"), first.n, GeneratorSpec::er(p, first.generator.seed));
                let g = build_graph(&spec, seed)?;
                let rep = reliable_capacity(Network::new(g.clone(), cfg.table_capacity), &capacity_config(cfg, seed))?;
                let mut r = with_report(base_record(kind, &spec, &g, cfg.sample_size, seed, "sweep"), &rep);
                r.level = Some(p);
                out.records.push(r);
                out.curves.push(CapacityCurve { network: spec.label.clone(), seed, rows: rep.rows });
                out.timings.push(Timing { network: spec.label, seed, millis: t0.elapsed().as_millis() as u64 });
            }
        }
    }
    Ok(out)
}

/// Retrieves the stored samples from perturbed cues over the fraction grid.
pub fn run_fault_tolerance(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let kind = ExperimentKind::Fault;
    each_unit(cfg, |spec, seed| {
        let g = build_graph(spec, seed)?;
        let loaded = load_network(g.clone(), cfg, seed)?;
        let n = g.node_count();
        let idx = retrieval_indices(loaded.stored.len(), cfg.retrieve_limit);
        let mut rows = Vec::new();
        for &mode in &cfg.modes {
            for (gi, &f) in cfg.fractions.iter().enumerate() {
                let (missing, noise) = mode.fractions(f);
                let score = measure(&loaded.network, &loaded, &idx, cfg, seed, |j| {
                    let mut rng = seed::rng(seed, &[tag::PERTURB, mode as u64, gi as u64, j as u64]);
                    perturb_cue(&loaded.stored[j].0, missing, noise, n, &mut rng)
                })?;
                let mut r = with_loaded(base_record(kind, spec, &g, cfg.sample_size, seed, mode.name()), &loaded);
                r.level = Some(f);
                r.accuracy = score.accuracy;
                r.completeness = score.completeness;
                rows.push(r);
            }
        }
        Ok(rows)
    })
}

/// Damages copies of the loaded network over the fraction grid, restores
/// tables with each scheme and retrieves the stored samples with their
/// surviving cue nodes.
pub fn run_robustness(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let kind = ExperimentKind::Robustness;
    each_unit(cfg, |spec, seed| {
        let g = build_graph(spec, seed)?;
        let loaded = load_network(g.clone(), cfg, seed)?;
        let idx = retrieval_indices(loaded.stored.len(), cfg.retrieve_limit);
        let mut rows = Vec::new();
        for &target in &cfg.targets {
            for (gi, &f) in cfg.fractions.iter().enumerate() {
                for &scheme in &cfg.schemes {
                    // every scheme sees the same damage at a grid point
                    let mut rng = seed::rng(seed, &[tag::DAMAGE, target as u64, gi as u64]);
                    let d = damage_network(&loaded.network, target, f, scheme, cfg.episode.merge_threshold, &mut rng)?;
                    let score = measure(&d.network, &loaded, &idx, cfg, seed, |j| {
                        Ok(loaded.stored[j].0.difference(&d.removed_nodes).copied().collect())
                    })?;
                    let mut r = with_loaded(base_record(kind, spec, &g, cfg.sample_size, seed, target.name()), &loaded);
                    r.scheme = Some(scheme.name().to_string());
                    r.level = Some(f);
                    r.accuracy = score.accuracy;
                    r.completeness = score.completeness;
                    rows.push(r);
                }
            }
        }
        Ok(rows)
    })
}

/// Structural metrics and reliable capacity of every configured topology.
pub fn run_structures(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let kind = ExperimentKind::Structures;
    let mut curves = Vec::new();
    let mut out = each_unit(cfg, |spec, seed| {
        let g = build_graph(spec, seed)?;
        let rep = reliable_capacity(Network::new(g.clone(), cfg.table_capacity), &capacity_config(cfg, seed))?;
        let mut r = with_report(base_record(kind, spec, &g, cfg.sample_size, seed, "structure"), &rep);
        r.clustering = Some(clustering_coefficient(&g)?);
        r.path_length = Some(average_path_length(&g)?);
        curves.push(CapacityCurve { network: spec.label.clone(), seed, rows: rep.rows });
        Ok(vec![r])
    })?;
    out.curves = curves;
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.kind {
        ExperimentKind::Capacity => run_capacity(cfg),
        ExperimentKind::Fault => run_fault_tolerance(cfg),
        ExperimentKind::Robustness => run_robustness(cfg),
        ExperimentKind::Structures => run_structures(cfg),
    }
}
