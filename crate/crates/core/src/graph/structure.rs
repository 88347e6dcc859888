use std::collections::VecDeque;

use super::{DirectedGraph, NodeId};
use crate::error::{Error, Result};
use crate::par::map_indices;

/// Harmonic-mean average path length.
///
/// Efficiency `GE` averages `1/d(i,j)` over all ordered pairs `i != j`, with
/// unreachable pairs contributing zero; the result is `1/GE`, or `+inf` when no
/// pair is reachable.
pub fn average_path_length(g: &DirectedGraph) -> Result<f64> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Precondition(format!("average path length needs n >= 2, got {n}")));
    }
    let per_source = map_indices(n, |s| inverse_distance_sum(g, NodeId::from(s)));
    let total: f64 = per_source.iter().sum();
    let efficiency = total / (n as f64 * (n as f64 - 1.0));
    Ok(if efficiency == 0.0 { f64::INFINITY } else { 1.0 / efficiency })
}

fn inverse_distance_sum(g: &DirectedGraph, source: NodeId) -> f64 {
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source.index()] = 0;
    queue.push_back(source);
    let mut sum = 0.0;
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()];
        for &v in g.out_neighbors(u) {
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = du + 1;
                sum += 1.0 / f64::from(du + 1);
                queue.push_back(v);
            }
        }
    }
    sum
}

/// Mean of Fagiolo's per-node directed clustering coefficient
/// `(A+Aᵀ)³_ii / (2 [d_tot (d_tot - 1) - 2 d_recip])`.
/// Nodes with a zero denominator contribute 0.
pub fn clustering_coefficient(g: &DirectedGraph) -> Result<f64> {
    let n = g.node_count();
    if n < 3 {
        return Err(Error::Precondition(format!("clustering coefficient needs n >= 3, got {n}")));
    }
    let sym = symmetrized(g);
    let per_node = map_indices(n, |i| {
        let v = NodeId::from(i);
        let d_tot = (g.out_degree(v) + g.in_degree(v)) as i64;
        let d_recip = sym[i].iter().filter(|&&(_, w)| w == 2).count() as i64;
        let denom = 2 * (d_tot * (d_tot - 1) - 2 * d_recip);
        if denom == 0 {
            return 0.0;
        }
        let mut row = vec![0u64; n];
        for &(j, w) in &sym[i] {
            row[j as usize] = u64::from(w);
        }
        let mut closed: u64 = 0;
        for &(j, wij) in &sym[i] {
            let wij = u64::from(wij);
            for &(k, wjk) in &sym[j as usize] {
                closed += wij * u64::from(wjk) * row[k as usize];
            }
        }
        closed as f64 / denom as f64
    });
    Ok(per_node.iter().sum::<f64>() / n as f64)
}

/// Undirected adjacency with multiplicity weights `A_ij + A_ji`.
fn symmetrized(g: &DirectedGraph) -> Vec<Vec<(u32, u8)>> {
    g.nodes()
        .map(|u| {
            let (outs, ins) = (g.out_neighbors(u), g.in_neighbors(u));
            let mut merged = Vec::with_capacity(outs.len() + ins.len());
            let (mut a, mut b) = (0, 0);
            while a < outs.len() || b < ins.len() {
                match (outs.get(a), ins.get(b)) {
                    (Some(x), Some(y)) if x == y => {
                        merged.push((x.0, 2));
                        a += 1;
                        b += 1;
                    }
                    (Some(x), Some(y)) if x < y => {
                        merged.push((x.0, 1));
                        a += 1;
                    }
                    (Some(x), None) => {
                        merged.push((x.0, 1));
                        a += 1;
                    }
                    (_, Some(y)) => {
                        merged.push((y.0, 1));
                        b += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            merged
        })
        .collect()
}

/// Reference edge probability `ln(s)/s` above which an ER graph on `s`
/// nodes is almost surely connected.
pub fn er_connectivity_probability(s: usize) -> Result<f64> {
    if s < 2 {
        return Err(Error::Precondition(format!("connectivity threshold needs s >= 2, got {s}")));
    }
    let s = s as f64;
    Ok(s.ln() / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    fn graph(n: usize, edges: &[(u32, u32)]) -> DirectedGraph {
        DirectedGraph::from_edges(n, edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v)))).unwrap()
    }

    #[test]
    fn path_length_of_complete_graph_is_one() {
        let g = generate(&GeneratorSpec::global(), 40).unwrap();
        assert_eq!(average_path_length(&g).unwrap(), 1.0);
    }

    #[test]
    fn path_length_two_node_cycle() {
        assert_eq!(average_path_length(&graph(2, &[(0, 1), (1, 0)])).unwrap(), 1.0);
    }

    #[test]
    fn path_length_directed_chain() {
        let l = average_path_length(&graph(3, &[(0, 1), (1, 2)])).unwrap();
        assert!((l - 2.4).abs() < 1e-12, "{l}");
    }

    #[test]
    fn path_length_without_edges_is_infinite() {
        assert!(average_path_length(&graph(3, &[])).unwrap().is_infinite());
        assert!(average_path_length(&graph(1, &[])).is_err());
    }

    #[test]
    fn star_path_length_closed_form() {
        let g = generate(&GeneratorSpec::star(), 1000).unwrap();
        let l = average_path_length(&g).unwrap();
        assert!((l - 2000.0 / 1002.0).abs() < 1e-9, "{l}");
    }

    #[test]
    fn clustering_of_complete_and_star() {
        let g = generate(&GeneratorSpec::global(), 30).unwrap();
        assert!((clustering_coefficient(&g).unwrap() - 1.0).abs() < 1e-12);
        let s = generate(&GeneratorSpec::star(), 30).unwrap();
        assert_eq!(clustering_coefficient(&s).unwrap(), 0.0);
    }

    #[test]
    fn clustering_of_ring_matches_undirected_value() {
        let g = generate(&GeneratorSpec::ring(3), 100).unwrap();
        assert!((clustering_coefficient(&g).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn connectivity_threshold() {
        assert!((er_connectivity_probability(60).unwrap() - 0.068_239).abs() < 1e-5);
        assert!((er_connectivity_probability(3).unwrap() - 3f64.ln() / 3.0).abs() < 1e-15);
        assert!((er_connectivity_probability(2).unwrap() - 0.346_573_6).abs() < 1e-6);
        assert!(er_connectivity_probability(1).is_err());
    }
}
