use std::collections::{BTreeMap, BTreeSet};

use super::NodeId;
use crate::error::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        UnionFind { parent: (0..len).collect(), size: vec![1; len], sets: len }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn set_count(&self) -> usize {
        self.sets
    }
}

/// Partition of `nodes` under direction-blind reachability through `edges`.
///
/// Components are returned sorted, each listing its members in ascending order.
pub fn weakly_connected_components(
    nodes: &BTreeSet<NodeId>,
    edges: &BTreeSet<(NodeId, NodeId)>,
) -> Result<Vec<Vec<NodeId>>> {
    let slot: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut uf = UnionFind::new(nodes.len());
    for &(u, v) in edges {
        let (a, b) = match (slot.get(&u), slot.get(&v)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                let missing = if slot.contains_key(&u) { v } else { u };
                return Err(Error::Precondition(format!("edge endpoint {missing} is not in the node set")));
            }
        };
        uf.union(a, b);
    }
    let members: Vec<NodeId> = nodes.iter().copied().collect();
    let mut groups: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (i, &v) in members.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(v);
    }
    let mut comps: Vec<Vec<NodeId>> = groups.into_values().collect();
    comps.sort();
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u32]) -> BTreeSet<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn no_edges_gives_singletons() {
        let comps = weakly_connected_components(&set(&[0, 1]), &BTreeSet::new()).unwrap();
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn single_edge_joins_pair() {
        let edges = [(NodeId(0), NodeId(1))].into_iter().collect();
        let comps = weakly_connected_components(&set(&[0, 1, 2]), &edges).unwrap();
        assert_eq!(comps, vec![vec![NodeId(0), NodeId(1)], vec![NodeId(2)]]);
    }

    #[test]
    fn direction_is_ignored() {
        let edges = [(NodeId(2), NodeId(0)), (NodeId(2), NodeId(1))].into_iter().collect();
        let comps = weakly_connected_components(&set(&[0, 1, 2]), &edges).unwrap();
        assert_eq!(comps.len(), 1);
    }

    #[test]
    fn foreign_endpoint_rejected() {
        let edges = [(NodeId(0), NodeId(9))].into_iter().collect();
        assert!(weakly_connected_components(&set(&[0, 1]), &edges).is_err());
    }

    #[test]
    fn union_find_counts_sets() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(!uf.union(1, 0));
        assert!(uf.union(3, 4));
        assert_eq!(uf.set_count(), 3);
    }
}
