//! Oracles and property checks shared by the property suite and the
//! acceptance run.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use adg::engine::{EpisodeConfig, Network, StableSubgraph};
use adg::graph::{generate, GeneratorSpec};
use adg::metrics::{grouping_capacity_bound, sample_nodes, score_retrieval, EmptyRetrieval};
use adg::NodeId;
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Check = Result<(), TestCaseError>;

pub fn small_network(n: usize, density: f64, seed: u64, k: usize) -> Network {
    let m = ((n * (n - 1)) as f64 * density) as usize;
    Network::new(generate(&GeneratorSpec::er_edges(m, seed), n).unwrap(), k)
}

pub fn cfg(seed: u64) -> EpisodeConfig {
    EpisodeConfig::store(seed)
}

/// Stores `count` samples of size `s` and returns them with their subgraphs.
pub fn load(net: &mut Network, s: usize, count: u64, seed: u64) -> Vec<(BTreeSet<NodeId>, StableSubgraph)> {
    let n = net.graph().node_count();
    (0..count)
        .map(|i| {
            let cue = sample_nodes(n, s, seed, i).unwrap();
            let sub = net.store_sample(&cue, &cfg(seed ^ i)).unwrap();
            (cue, sub)
        })
        .collect()
}

/// Components of the graph spanned by `edges`, by depth-first search.
pub fn component_oracle(edges: &BTreeSet<(NodeId, NodeId)>) -> usize {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &adj[&x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    count
}

/// Ways to pick `t` pairwise disjoint, unordered groups of size `g` out of
/// `n` labelled items, by enumerating bitmasks.
pub fn grouping_oracle(n: u32, g: u32, t: u32) -> u64 {
    let groups: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() == g).collect();
    fn count(groups: &[u32], from: usize, used: u32, left: u32) -> u64 {
        if left == 0 {
            return 1;
        }
        (from..groups.len())
            .filter(|&i| groups[i] & used == 0)
            .map(|i| count(groups, i + 1, used | groups[i], left - 1))
            .sum()
    }
    count(&groups, 0, 0, t)
}

/// Every `(n, s+c, t)` with `n <= 10` and `t` dividing `s+c`; returns the
/// first mismatch.
pub fn grouping_mismatch() -> Option<(u32, u32, u32)> {
    for n in 1..=10u32 {
        for total in 1..=n {
            for t in (1..=total).filter(|t| total % t == 0) {
                let exact = grouping_capacity_bound(u64::from(n), u64::from(total), 0, u64::from(t)).unwrap();
                if exact != BigUint::from(grouping_oracle(n, total / t, t)) {
                    return Some((n, total, t));
                }
            }
        }
    }
    None
}

pub fn purity(n: usize, density: f64, seed: u64, stored: u64, s: usize) -> Check {
    let mut net = small_network(n, density, seed, 20);
    load(&mut net, s.min(n), stored, seed);
    let before = net.to_json();
    let cue = sample_nodes(n, s.min(n), seed.wrapping_add(1), 99).unwrap();
    net.retrieve_sample(&cue, &cfg(seed).retrieve(seed)).unwrap();
    prop_assert_eq!(net.to_json(), before);
    Ok(())
}

pub fn immediate_recall(n: usize, density: f64, seed: u64, s: usize) -> Check {
    let mut net = small_network(n, density, seed, 20);
    let (cue, stored) = load(&mut net, s.min(n), 1, seed).pop().unwrap();
    prop_assume!(stored.isolated_initials.is_empty());
    let got = net.retrieve_sample(&cue, &cfg(seed).retrieve(seed ^ 5)).unwrap();
    let score = score_retrieval(&stored, &got, EmptyRetrieval::Vacuous);
    prop_assert_eq!((score.accuracy, score.completeness), (1.0, 1.0));
    Ok(())
}

pub fn k_bound(n: usize, density: f64, seed: u64, k: usize, s: usize) -> Check {
    let mut net = small_network(n, density, seed, k);
    load(&mut net, s.min(n), 12, seed);
    for t in net.tables() {
        prop_assert!(t.distinct_output_count() <= k);
    }
    Ok(())
}

/// Path invariant plus the component oracle.
pub fn paths_between_initials(n: usize, density: f64, seed: u64, s: usize) -> Check {
    let mut net = small_network(n, density, seed, 20);
    for (cue, sub) in load(&mut net, s.min(n), 4, seed) {
        let mut indeg: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut outdeg: BTreeMap<NodeId, usize> = BTreeMap::new();
        for &(u, v) in &sub.edges {
            prop_assert!(net.graph().has_edge(u, v));
            prop_assert!(sub.active_nodes.contains(&u) && sub.active_nodes.contains(&v));
            *outdeg.entry(u).or_default() += 1;
            *indeg.entry(v).or_default() += 1;
        }
        for v in sub.communication_nodes() {
            prop_assert!(indeg.get(v).copied().unwrap_or(0) >= 1, "{v} has no input");
            prop_assert!(outdeg.get(v).copied().unwrap_or(0) >= 1, "{v} has no output");
        }
        prop_assert_eq!(&sub.initial_nodes, &cue);
        prop_assert_eq!(sub.wcc_count, component_oracle(&sub.edges));
    }
    Ok(())
}

pub fn seed_replay(n: usize, density: f64, seed: u64, s: usize) -> Check {
    let run = |parallel: bool, threads: usize| {
        adg::with_threads(Some(threads), || {
            let mut net = small_network(n, density, seed, 20);
            let n = net.graph().node_count();
            let subs: Vec<StableSubgraph> = (0..5)
                .map(|i| {
                    let cue = sample_nodes(n, s.min(n), seed, i).unwrap();
                    let c = EpisodeConfig { parallel, ..cfg(seed ^ i) };
                    net.store_sample(&cue, &c).unwrap()
                })
                .collect();
            (net.to_json(), subs)
        })
    };
    let reference = run(false, 1);
    prop_assert_eq!(&run(false, 1), &reference);
    prop_assert_eq!(&run(true, 2), &reference);
    prop_assert_eq!(&run(true, 3), &reference);
    Ok(())
}
