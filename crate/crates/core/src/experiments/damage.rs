use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;

use super::RestorationScheme;
use crate::engine::Network;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::node::{intersection, normalize, ActivationTrace, IndexTable, NodeSet};

use super::DamageTarget;

/// A damaged copy of a network and what was taken out of it.
#[derive(Debug, Clone)]
pub struct Damaged {
    pub network: Network,
    pub removed_nodes: BTreeSet<NodeId>,
    pub removed_edges: BTreeSet<(NodeId, NodeId)>,
}

/// Deletes `⌊fraction·N⌋` uniformly chosen nodes or edges, then rewrites
/// every table with `scheme`. Node ids stay valid; a deleted node keeps no
/// edges.
pub fn damage_network<R: Rng + ?Sized>(
    net: &Network,
    target: DamageTarget,
    fraction: f64,
    scheme: RestorationScheme,
    merge_threshold: f64,
    rng: &mut R,
) -> Result<Damaged> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameters(format!("damage fraction {fraction} outside [0,1]")));
    }
    let g = net.graph();
    let (removed_nodes, removed_edges, graph) = match target {
        DamageTarget::Nodes => {
            let n = g.node_count();
            let k = (fraction * n as f64).floor() as usize;
            let nodes: BTreeSet<NodeId> = index::sample(rng, n, k).into_iter().map(NodeId::from).collect();
            let edges = g.edges().filter(|(u, v)| nodes.contains(u) || nodes.contains(v)).collect();
            let graph = g.without_nodes(&nodes);
            (nodes, edges, graph)
        }
        DamageTarget::Edges => {
            let all: Vec<(NodeId, NodeId)> = g.edges().collect();
            let k = (fraction * all.len() as f64).floor() as usize;
            let edges: BTreeSet<(NodeId, NodeId)> =
                index::sample(rng, all.len(), k).into_iter().map(|i| all[i]).collect();
            let graph = g.without_edges(&edges);
            (BTreeSet::new(), edges, graph)
        }
    };
    let mut damaged = net.with_graph(graph)?;
    if scheme != RestorationScheme::Maintain {
        for (x, table) in damaged.tables_mut().iter_mut().enumerate() {
            let x = NodeId::from(x);
            let gone_in = |u: &NodeId| removed_nodes.contains(u) || removed_edges.contains(&(*u, x));
            let gone_out = |v: &NodeId| removed_nodes.contains(v) || removed_edges.contains(&(x, *v));
            *table = restore_table(table, gone_in, gone_out, scheme, merge_threshold);
        }
    }
    Ok(Damaged { network: damaged, removed_nodes, removed_edges })
}

/// Strips deleted ids from every trace, then resolves traces whose fan-ins
/// now coincide. Resolved entries take the position of the first one.
pub fn restore_table(
    table: &IndexTable,
    gone_in: impl Fn(&NodeId) -> bool,
    gone_out: impl Fn(&NodeId) -> bool,
    scheme: RestorationScheme,
    merge_threshold: f64,
) -> IndexTable {
    if scheme == RestorationScheme::Maintain {
        return table.clone();
    }
    let mut groups: Vec<(NodeSet, Vec<ActivationTrace>)> = Vec::new();
    for e in table.entries() {
        let fan_in: NodeSet = e.fan_in.iter().copied().filter(|u| !gone_in(u)).collect();
        let fan_out: NodeSet = e.fan_out.iter().copied().filter(|v| !gone_out(v)).collect();
        let trace = ActivationTrace { fan_in: fan_in.clone(), fan_out, strength: e.strength };
        match groups.iter_mut().find(|(k, _)| *k == fan_in) {
            Some((_, members)) => members.push(trace),
            None => groups.push((fan_in, vec![trace])),
        }
    }
    let entries = groups
        .into_iter()
        .map(|(fan_in, members)| {
            let total: u32 = members.iter().map(|t| t.strength).sum();
            let (fan_out, strength) = match scheme {
                RestorationScheme::Union => {
                    (normalize(members.iter().flat_map(|t| t.fan_out.iter().copied()).collect()), total)
                }
                RestorationScheme::Intersection => {
                    let mut acc = members[0].fan_out.clone();
                    for t in &members[1..] {
                        acc = intersection(&acc, &t.fan_out);
                    }
                    (acc, total)
                }
                RestorationScheme::HighestFrequency => most_frequent_output(&members),
                RestorationScheme::Maintain => unreachable!("handled above"),
            };
            ActivationTrace { fan_in, fan_out, strength }
        })
        .collect();
    let mut out = IndexTable::from_entries(table.capacity(), entries);
    out.enforce_bound(merge_threshold);
    out
}

/// Fan-out with the largest summed strength; ties go to the earliest stored.
fn most_frequent_output(members: &[ActivationTrace]) -> (NodeSet, u32) {
    let mut totals: Vec<(&NodeSet, u32)> = Vec::new();
    for t in members {
        match totals.iter_mut().find(|(o, _)| **o == t.fan_out) {
            Some((_, s)) => *s += t.strength,
            None => totals.push((&t.fan_out, t.strength)),
        }
    }
    let mut best = totals[0];
    for &c in &totals[1..] {
        if c.1 > best.1 {
            best = c;
        }
    }
    (best.0.clone(), best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DirectedGraph;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // A..Z mapped to 0..25
    fn ids(s: &str) -> Vec<NodeId> {
        normalize(s.bytes().map(|b| NodeId(u32::from(b - b'A'))).collect())
    }

    fn two_entry_table() -> IndexTable {
        IndexTable::from_entries(
            20,
            vec![ActivationTrace::new(ids("ABC"), ids("XYZ")), ActivationTrace::new(ids("BCD"), ids("UXZ"))],
        )
    }

    fn restored(scheme: RestorationScheme) -> IndexTable {
        let deleted = ids("ADZ");
        let gone = |v: &NodeId| deleted.contains(v);
        restore_table(&two_entry_table(), gone, gone, scheme, 0.5)
    }

    #[test]
    fn union_scheme() {
        let t = restored(RestorationScheme::Union);
        assert_eq!(t.entries().len(), 1);
        assert_eq!(t.entries()[0].fan_in, ids("BC"));
        assert_eq!(t.entries()[0].fan_out, ids("UXY"));
    }

    #[test]
    fn intersection_scheme() {
        let t = restored(RestorationScheme::Intersection);
        assert_eq!(t.entries().len(), 1);
        assert_eq!(t.entries()[0].fan_out, ids("X"));
    }

    #[test]
    fn maintain_scheme_keeps_both() {
        assert_eq!(restored(RestorationScheme::Maintain), two_entry_table());
    }

    #[test]
    fn highest_frequency_prefers_strength_then_age() {
        let t = restored(RestorationScheme::HighestFrequency);
        assert_eq!(t.entries()[0].fan_out, ids("XY"));
        let mut strong = two_entry_table();
        strong.entries_mut()[1].strength = 3;
        let deleted = ids("ADZ");
        let gone = |v: &NodeId| deleted.contains(v);
        let t = restore_table(&strong, gone, gone, RestorationScheme::HighestFrequency, 0.5);
        assert_eq!(t.entries()[0].fan_out, ids("UX"));
        assert_eq!(t.entries()[0].strength, 3);
    }

    #[test]
    fn zero_damage_with_maintain_is_identity() {
        let g = DirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)].map(|(u, v)| (NodeId(u), NodeId(v)))).unwrap();
        let mut net = Network::new(g, 5);
        net.tables_mut()[1] = two_entry_table();
        for target in [DamageTarget::Nodes, DamageTarget::Edges] {
            let d =
                damage_network(&net, target, 0.0, RestorationScheme::Maintain, 0.5, &mut ChaCha8Rng::seed_from_u64(1))
                    .unwrap();
            assert_eq!(d.network.to_json(), net.to_json());
        }
    }

    #[test]
    fn node_damage_removes_incident_edges() {
        let g = DirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)].map(|(u, v)| (NodeId(u), NodeId(v))))
            .unwrap();
        let net = Network::new(g, 5);
        let d = damage_network(
            &net,
            DamageTarget::Nodes,
            0.25,
            RestorationScheme::Union,
            0.5,
            &mut ChaCha8Rng::seed_from_u64(2),
        )
        .unwrap();
        assert_eq!(d.removed_nodes.len(), 1);
        assert_eq!(d.removed_edges.len(), 2);
        assert_eq!(d.network.graph().edge_count(), 2);
    }
}
