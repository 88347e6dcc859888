use serde::{Deserialize, Serialize};

use crate::engine::{EpisodeConfig, DEFAULT_CAPACITY};
use crate::error::{Error, Result};
use crate::graph::GeneratorSpec;
use crate::metrics::{CapacityThresholds, EmptyRetrieval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Capacity,
    Fault,
    Robustness,
    Structures,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::Fault => "fault",
            ExperimentKind::Robustness => "robustness",
            ExperimentKind::Structures => "structures",
        }
    }
}

/// One network under test: a generator and its node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    /// Free-form label used in output rows.
    pub label: String,
    pub n: usize,
    pub generator: GeneratorSpec,
}

impl NetworkSpec {
    pub fn new(label: &str, n: usize, generator: GeneratorSpec) -> Self {
        NetworkSpec { label: label.to_string(), n, generator }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestorationScheme {
    /// Tables are left untouched.
    Maintain,
    /// Colliding fan-ins keep the union of their fan-outs.
    Union,
    /// Colliding fan-ins keep the intersection of their fan-outs.
    Intersection,
    /// Colliding fan-ins keep the fan-out of largest total strength.
    HighestFrequency,
}

impl RestorationScheme {
    pub const ALL: [RestorationScheme; 4] = [
        RestorationScheme::Maintain,
        RestorationScheme::Union,
        RestorationScheme::Intersection,
        RestorationScheme::HighestFrequency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RestorationScheme::Maintain => "maintain",
            RestorationScheme::Union => "union",
            RestorationScheme::Intersection => "intersection",
            RestorationScheme::HighestFrequency => "highest_frequency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DamageTarget {
    Nodes,
    Edges,
}

impl DamageTarget {
    pub fn name(self) -> &'static str {
        match self {
            DamageTarget::Nodes => "nodes",
            DamageTarget::Edges => "edges",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// Drop a fraction of the cue.
    Missing,
    /// Add a fraction of non-members.
    Noise,
    /// Replace a fraction of the cue with as many non-members.
    Mixed,
}

impl PerturbationMode {
    pub const ALL: [PerturbationMode; 3] =
        [PerturbationMode::Missing, PerturbationMode::Noise, PerturbationMode::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationMode::Missing => "missing",
            PerturbationMode::Noise => "noise",
            PerturbationMode::Mixed => "mixed",
        }
    }

    /// `(missing, noise)` fractions at grid level `f`.
    pub fn fractions(self, f: f64) -> (f64, f64) {
        match self {
            PerturbationMode::Missing => (f, 0.0),
            PerturbationMode::Noise => (0.0, f),
            PerturbationMode::Mixed => (f, f),
        }
    }
}

/// Reliable-capacity search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySearch {
    pub thresholds: CapacityThresholds,
    pub max_samples: usize,
    pub stride: usize,
}

impl Default for CapacitySearch {
    fn default() -> Self {
        CapacitySearch { thresholds: CapacityThresholds::default(), max_samples: 2000, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub networks: Vec<NetworkSpec>,
    /// Initial nodes per sample.
    pub sample_size: usize,
    /// Samples stored before fault and robustness measurements, and by the
    /// plain capacity run.
    pub samples: usize,
    /// Table bound `K`.
    pub table_capacity: usize,
    pub episode: EpisodeConfig,
    pub empty_retrieval: EmptyRetrieval,
    /// Capacity runs: also search the reliable capacity of every network.
    pub reliable: bool,
    /// Capacity runs: edge probabilities of an ER sweep over the first
    /// network's node count.
    pub p_grid: Vec<f64>,
    pub search: CapacitySearch,
    /// Perturbation or damage levels.
    pub fractions: Vec<f64>,
    pub modes: Vec<PerturbationMode>,
    pub targets: Vec<DamageTarget>,
    pub schemes: Vec<RestorationScheme>,
    /// Retrieve at most this many stored samples per measurement, evenly
    /// spaced over the store order. `None` retrieves all of them.
    pub retrieve_limit: Option<usize>,
    /// Master seeds; every run is repeated once per seed.
    pub seeds: Vec<u64>,
}

pub fn default_grid() -> Vec<f64> {
    (0..10).map(|i| f64::from(i) / 10.0).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Capacity,
            networks: Vec::new(),
            sample_size: 15,
            samples: 1000,
            table_capacity: DEFAULT_CAPACITY,
            episode: EpisodeConfig::default(),
            empty_retrieval: EmptyRetrieval::default(),
            reliable: false,
            p_grid: Vec::new(),
            search: CapacitySearch::default(),
            fractions: default_grid(),
            modes: PerturbationMode::ALL.to_vec(),
            targets: vec![DamageTarget::Nodes, DamageTarget::Edges],
            schemes: RestorationScheme::ALL.to_vec(),
            retrieve_limit: None,
            seeds: vec![0],
        }
    }
}

/// ER network with 3101 edges on 500 nodes.
pub fn sparse_network() -> NetworkSpec {
    NetworkSpec::new("sparse", 500, GeneratorSpec::er_edges(3101, 7))
}

/// ER network with 12606 edges on 500 nodes.
pub fn dense_network() -> NetworkSpec {
    NetworkSpec::new("dense", 500, GeneratorSpec::er_edges(12606, 7))
}

/// The six topologies compared at 1000 nodes.
pub fn structure_networks() -> Vec<NetworkSpec> {
    let n = 1000;
    vec![
        NetworkSpec::new("er", n, GeneratorSpec::er_edges(6070, 7)),
        NetworkSpec::new("global", n, GeneratorSpec::global()),
        NetworkSpec::new("ring", n, GeneratorSpec::ring(3)),
        NetworkSpec::new("star", n, GeneratorSpec::star()),
        NetworkSpec::new("kleinberg", n, GeneratorSpec::kleinberg(3, 1, 7)),
        NetworkSpec::new("price", n, GeneratorSpec::price(6, 7)),
    ]
}

impl ExperimentConfig {
    /// Named starting points. `desk_*` presets are scaled down to finish in
    /// seconds.
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig::default();
        let desk_sparse = NetworkSpec::new("desk_sparse", 200, GeneratorSpec::er_edges(1240, 7));
        let desk_dense = NetworkSpec::new("desk_dense", 200, GeneratorSpec::er_edges(5042, 7));
        let cfg = match name {
            "sparse" => ExperimentConfig { networks: vec![sparse_network()], ..base },
            "dense" => ExperimentConfig { networks: vec![dense_network()], sample_size: 60, ..base },
            "table" => ExperimentConfig { networks: vec![sparse_network(), dense_network()], ..base },
            "desk_sparse" => ExperimentConfig { networks: vec![desk_sparse], samples: 200, ..base },
            "desk_dense" => ExperimentConfig { networks: vec![desk_dense], samples: 200, sample_size: 24, ..base },
            "edge_sweep" => ExperimentConfig {
                networks: vec![NetworkSpec::new("er", 500, GeneratorSpec::er(0.04, 7))],
                sample_size: 60,
                p_grid: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.08, 0.12],
                search: CapacitySearch { max_samples: 1000, stride: 10, ..CapacitySearch::default() },
                ..base
            },
            "structures" => ExperimentConfig {
                kind: ExperimentKind::Structures,
                networks: structure_networks(),
                sample_size: 60,
                search: CapacitySearch { max_samples: 1000, stride: 10, ..CapacitySearch::default() },
                ..base
            },
            other => return Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
        };
        Ok(cfg)
    }

    pub const PRESETS: [&'static str; 7] =
        ["sparse", "dense", "table", "desk_sparse", "desk_dense", "edge_sweep", "structures"];

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.episode.validate()?;
        if self.networks.is_empty() {
            return bad("no networks configured".into());
        }
        if self.seeds.is_empty() {
            return bad("no seeds configured".into());
        }
        if self.sample_size == 0 {
            return bad("sample size must be at least 1".into());
        }
        for net in &self.networks {
            if self.sample_size > net.n {
                return bad(format!("sample size {} exceeds n = {} of {}", self.sample_size, net.n, net.label));
            }
            net.generator.validate(net.n)?;
        }
        if let Some(f) = self.fractions.iter().chain(&self.p_grid).find(|f| !(0.0..=1.0).contains(*f)) {
            return bad(format!("fraction {f} outside [0,1]"));
        }
        if self.search.stride == 0 {
            return bad("search stride must be at least 1".into());
        }
        if self.retrieve_limit == Some(0) {
            return bad("retrieve_limit must be at least 1".into());
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::Malformed(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ExperimentConfig::PRESETS {
            ExperimentConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(ExperimentConfig::preset("nope").is_err());
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let cfg = ExperimentConfig::preset("desk_sparse").unwrap();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert!(ExperimentConfig::from_json(r#"{"sample_sise": 3}"#).is_err());
    }

    #[test]
    fn bad_fractions_are_rejected() {
        let cfg = ExperimentConfig { fractions: vec![1.5], ..ExperimentConfig::preset("sparse").unwrap() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mixed_mode_moves_both_fractions() {
        assert_eq!(PerturbationMode::Mixed.fractions(0.3), (0.3, 0.3));
        assert_eq!(PerturbationMode::Noise.fractions(0.3), (0.0, 0.3));
    }
}
