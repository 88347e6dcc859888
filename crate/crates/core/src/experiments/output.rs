use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::metrics::CapacityRow;

/// One measured point. Columns that do not apply to an experiment are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub network: String,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub seed: u64,
    /// `load`, `reliable`, `sweep`, a perturbation mode, a damage target or
    /// `structure`.
    pub variant: String,
    pub scheme: Option<String>,
    /// Perturbation or damage fraction, or the edge probability of a sweep.
    pub level: Option<f64>,
    pub accuracy: f64,
    pub completeness: f64,
    pub quality: f64,
    pub nodes: f64,
    pub edges: f64,
    pub wcc: f64,
    pub comm_nodes: f64,
    pub capacity: Option<usize>,
    pub saturated: Option<bool>,
    pub clustering: Option<f64>,
    pub path_length: Option<f64>,
}

impl ExperimentRecord {
    pub(crate) fn blank(
        experiment: &str,
        network: &str,
        n: usize,
        m: usize,
        s: usize,
        seed: u64,
        variant: &str,
    ) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            network: network.to_string(),
            n,
            m,
            s,
            seed,
            variant: variant.to_string(),
            scheme: None,
            level: None,
            accuracy: 0.0,
            completeness: 0.0,
            quality: 0.0,
            nodes: 0.0,
            edges: 0.0,
            wcc: 0.0,
            comm_nodes: 0.0,
            capacity: None,
            saturated: None,
            clustering: None,
            path_length: None,
        }
    }
}

/// Wall-clock cost of one (network, seed) unit. Not serialized, so that
/// reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub network: String,
    pub seed: u64,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub seed_derivation: String,
    pub records: Vec<ExperimentRecord>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
    /// Per-sample rows of every capacity search, written as their own CSV.
    #[serde(skip)]
    pub curves: Vec<CapacityCurve>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    pub network: String,
    pub seed: u64,
    pub rows: Vec<CapacityRow>,
}

pub(crate) const SEED_DERIVATION: &str =
    "splitmix64 fold: derive(master, tags) = fold(mix64(master), |a, t| mix64(a ^ mix64(t)))";

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.records.is_empty() {
            w.write_record(HEADER).expect("in-memory write");
        }
        for r in &self.records {
            w.serialize(r).expect("records serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// `network,seed,index,Q,mean_P,mean_C`, or `None` without a capacity
    /// search.
    pub fn curves_csv(&self) -> Option<String> {
        if self.curves.is_empty() {
            return None;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["network", "seed", "index", "Q", "mean_P", "mean_C"]).expect("in-memory write");
        for c in &self.curves {
            for r in &c.rows {
                w.serialize((&c.network, c.seed, r.index, r.quality, r.mean_accuracy, r.mean_completeness))
                    .expect("rows serialize");
            }
        }
        Some(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8"))
    }

    /// Sidecar document: the resolved config, seeds and every record.
    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("output serializes")
    }
}

const HEADER: [&str; 20] = [
    "experiment",
    "network",
    "n",
    "m",
    "s",
    "seed",
    "variant",
    "scheme",
    "level",
    "accuracy",
    "completeness",
    "quality",
    "nodes",
    "edges",
    "wcc",
    "comm_nodes",
    "capacity",
    "saturated",
    "clustering",
    "path_length",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_record_fields() {
        let out = ExperimentOutput {
            config: ExperimentConfig::default(),
            seeds: vec![1],
            seed_derivation: SEED_DERIVATION.into(),
            records: vec![ExperimentRecord::blank("fault", "x", 1, 0, 1, 1, "missing")],
            timings: vec![],
            curves: vec![],
        };
        let csv = out.csv();
        assert_eq!(csv.lines().next().unwrap(), HEADER.join(","));
        assert!(csv.lines().nth(1).unwrap().starts_with("fault,x,1,0,1,1,missing,,,0.0"));
        let empty = ExperimentOutput { records: vec![], ..out };
        assert_eq!(empty.csv().trim_end(), HEADER.join(","));
    }
}
