//! Per-node memory and local decision rules.
//!
//! A node's index table maps the set of upstream nodes it was activated by to
//! the set of downstream nodes it forwarded stimulus to. The table is bounded
//! by the number of distinct fan-out sets it may hold; inserting beyond that
//! bound either merges the two most similar outputs or drops the weakest one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// Sorted, duplicate-free node list.
pub type NodeSet = Vec<NodeId>;

/// Sorts and dedups in place, returning the set.
pub fn normalize(mut v: Vec<NodeId>) -> NodeSet {
    v.sort_unstable();
    v.dedup();
    v
}

/// Size of the intersection of two sorted sets.
pub fn overlap(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn intersection(a: &[NodeId], b: &[NodeId]) -> NodeSet {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

/// F1 score of two sets, `2|A∩B| / (|A|+|B|)`. Two empty sets score 1.
pub fn f1_score(a: &[NodeId], b: &[NodeId]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => 2.0 * overlap(a, b) as f64 / (a.len() + b.len()) as f64,
    }
}

/// One `fan_in -> fan_out` record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationTrace {
    #[serde(rename = "in")]
    pub fan_in: NodeSet,
    #[serde(rename = "out")]
    pub fan_out: NodeSet,
    pub strength: u32,
}

impl ActivationTrace {
    pub fn new(fan_in: Vec<NodeId>, fan_out: Vec<NodeId>) -> Self {
        ActivationTrace { fan_in: normalize(fan_in), fan_out: normalize(fan_out), strength: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched: bool,
    pub fan_out: NodeSet,
    pub score: f64,
    /// Position of the winning entry when matched.
    pub entry: Option<usize>,
}

/// Bounded per-node trace memory. Entries are kept in storage order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexTable {
    entries: Vec<ActivationTrace>,
    capacity: usize,
}

impl IndexTable {
    pub fn new(capacity: usize) -> Self {
        IndexTable { entries: Vec::new(), capacity }
    }

    pub fn from_entries(capacity: usize, entries: Vec<ActivationTrace>) -> Self {
        IndexTable { entries, capacity }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[ActivationTrace] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Vec<ActivationTrace> {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct fan-out sets in order of first appearance.
    pub fn distinct_outputs(&self) -> Vec<&NodeSet> {
        let mut outs: Vec<&NodeSet> = Vec::new();
        for e in &self.entries {
            if !outs.contains(&&e.fan_out) {
                outs.push(&e.fan_out);
            }
        }
        outs
    }

    pub fn distinct_output_count(&self) -> usize {
        self.distinct_outputs().len()
    }

    /// Number of fan-out sets that list `v`.
    pub fn frequency(&self, v: NodeId) -> usize {
        self.entries.iter().filter(|e| e.fan_out.binary_search(&v).is_ok()).count()
    }

    /// Best entry whose fan-in scores strictly above `threshold` against
    /// `input`. Ties go to the earliest entry.
    pub fn lookup(&self, input: &[NodeId], threshold: f64) -> MatchResult {
        let mut best: Option<(usize, f64)> = None;
        let mut top = 0.0f64;
        for (i, e) in self.entries.iter().enumerate() {
            let s = f1_score(&e.fan_in, input);
            top = top.max(s);
            if s > threshold && best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, s)) => {
                MatchResult { matched: true, fan_out: self.entries[i].fan_out.clone(), score: s, entry: Some(i) }
            }
            None => MatchResult { matched: false, fan_out: Vec::new(), score: top, entry: None },
        }
    }

    /// Strongest support for forwarding to `v`: the largest strength among
    /// entries whose fan-out lists it.
    pub fn support(&self, v: NodeId) -> u32 {
        self.entries.iter().filter(|e| e.fan_out.binary_search(&v).is_ok()).map(|e| e.strength).max().unwrap_or(0)
    }

    /// Stores `trace` and restores the distinct-output bound.
    ///
    /// An identical `(fan_in, fan_out)` pair gains one strength; a new fan-out
    /// for a known fan-in overwrites it with strength 1. Past the bound, the
    /// most similar pair of outputs is replaced by its intersection when the
    /// pair scores at least `merge_threshold`, otherwise every entry carrying
    /// the output of least total strength is deleted.
    pub fn record(&mut self, trace: ActivationTrace, merge_threshold: f64) {
        match self.entries.iter_mut().find(|e| e.fan_in == trace.fan_in) {
            Some(e) if e.fan_out == trace.fan_out => e.strength += 1,
            Some(e) => {
                e.fan_out = trace.fan_out;
                e.strength = 1;
            }
            None => self.entries.push(ActivationTrace { strength: 1, ..trace }),
        }
        self.enforce_bound(merge_threshold);
    }

    /// Merges or evicts outputs until at most `capacity` distinct ones remain.
    pub fn enforce_bound(&mut self, merge_threshold: f64) {
        while self.distinct_output_count() > self.capacity {
            self.shrink_once(merge_threshold);
        }
    }

    fn shrink_once(&mut self, merge_threshold: f64) {
        let outputs: Vec<NodeSet> = self.distinct_outputs().into_iter().cloned().collect();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..outputs.len() {
            for j in i + 1..outputs.len() {
                let s = f1_score(&outputs[i], &outputs[j]);
                if best.is_none_or(|(_, _, b)| s > b) {
                    best = Some((i, j, s));
                }
            }
        }
        match best {
            Some((i, j, s)) if s >= merge_threshold => {
                let merged = intersection(&outputs[i], &outputs[j]);
                for e in &mut self.entries {
                    if e.fan_out == outputs[i] || e.fan_out == outputs[j] {
                        e.fan_out = merged.clone();
                    }
                }
                self.entries.retain(|e| !e.fan_out.is_empty());
            }
            _ => {
                let mut weakest: Option<(usize, u64)> = None;
                for (k, out) in outputs.iter().enumerate() {
                    let total: u64 =
                        self.entries.iter().filter(|e| &e.fan_out == out).map(|e| u64::from(e.strength)).sum();
                    if weakest.is_none_or(|(_, w)| total < w) {
                        weakest = Some((k, total));
                    }
                }
                if let Some((k, _)) = weakest {
                    let victim = &outputs[k];
                    self.entries.retain(|e| &e.fan_out != victim);
                }
            }
        }
    }
}

/// Draws `min(e_out, |candidates|)` distinct candidates without replacement,
/// each draw weighted by `1 / (1 + frequency)` in `table`.
pub fn select_fanout<R: Rng + ?Sized>(table: &IndexTable, candidates: &[NodeId], e_out: usize, rng: &mut R) -> NodeSet {
    let mut pool: Vec<(NodeId, f64)> =
        candidates.iter().map(|&v| (v, 1.0 / (1.0 + table.frequency(v) as f64))).collect();
    let take = e_out.min(pool.len());
    let mut chosen = Vec::with_capacity(take);
    for _ in 0..take {
        let total: f64 = pool.iter().map(|&(_, w)| w).sum();
        let mut x = rng.gen::<f64>() * total;
        let mut pick = pool.len() - 1;
        for (i, &(_, w)) in pool.iter().enumerate() {
            if x < w {
                pick = i;
                break;
            }
            x -= w;
        }
        chosen.push(pool.swap_remove(pick).0);
    }
    normalize(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(ids: &[u32]) -> NodeSet {
        normalize(ids.iter().map(|&i| NodeId(i)).collect())
    }

    fn trace(i: &[u32], o: &[u32]) -> ActivationTrace {
        ActivationTrace::new(s(i), s(o))
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_score(&s(&[1, 2, 3]), &s(&[1, 2, 3])), 1.0);
        assert_eq!(f1_score(&s(&[1, 2]), &s(&[3, 4])), 0.0);
        assert_eq!(f1_score(&s(&[1, 2]), &s(&[2, 3])), 0.5);
        assert_eq!(f1_score(&[], &[]), 1.0);
        assert_eq!(f1_score(&[], &s(&[1])), 0.0);
    }

    #[test]
    fn lookup_reuses_matching_trace() {
        let mut t = IndexTable::new(20);
        t.record(trace(&[0, 1, 2], &[7, 8]), 0.5);
        let m = t.lookup(&s(&[0, 1, 2]), 0.8);
        assert!(m.matched);
        assert_eq!(m.fan_out, s(&[7, 8]));
        assert_eq!(m.score, 1.0);
    }

    #[test]
    fn lookup_misses_on_empty_table_and_disjoint_input() {
        assert!(!IndexTable::new(20).lookup(&s(&[1]), 0.8).matched);
        let mut t = IndexTable::new(20);
        t.record(trace(&[0, 1, 2], &[7]), 0.5);
        let m = t.lookup(&s(&[3, 4]), 0.8);
        assert!(!m.matched);
        assert_eq!(m.score, 0.0);
    }

    #[test]
    fn lookup_ties_go_to_earliest_entry() {
        let t = IndexTable::from_entries(20, vec![trace(&[1, 2], &[10]), trace(&[1, 3], &[11])]);
        // both score 2/3 against {1}
        let m = t.lookup(&s(&[1]), 0.6);
        assert_eq!(m.fan_out, s(&[10]));
    }

    #[test]
    fn lookup_threshold_is_strict() {
        let t = IndexTable::from_entries(20, vec![trace(&[1, 2], &[10])]);
        assert!(!t.lookup(&s(&[2, 3]), 0.5).matched);
        assert!(t.lookup(&s(&[2, 3]), 0.49).matched);
    }

    #[test]
    fn record_merges_similar_outputs_at_capacity() {
        let (x, y, z, w, q) = (10, 11, 12, 13, 14);
        let mut t = IndexTable::new(2);
        t.record(trace(&[1], &[x, y, z]), 0.5);
        t.record(trace(&[2], &[x, y, w]), 0.5);
        t.record(trace(&[3], &[q]), 0.5);
        let outs: Vec<NodeSet> = t.distinct_outputs().into_iter().cloned().collect();
        assert_eq!(outs, vec![s(&[x, y]), s(&[q])]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn record_discards_weakest_output() {
        let mut t = IndexTable::new(2);
        for _ in 0..5 {
            t.record(trace(&[1], &[10]), 0.5);
        }
        t.record(trace(&[2], &[20]), 0.5);
        t.record(trace(&[3], &[30]), 0.5);
        // {20} and {30} both have strength 1; the earlier one goes
        let outs: Vec<NodeSet> = t.distinct_outputs().into_iter().cloned().collect();
        assert_eq!(outs, vec![s(&[10]), s(&[30])]);
        assert_eq!(t.entries()[0].strength, 5);
    }

    #[test]
    fn record_below_capacity_is_plain_insert() {
        let mut t = IndexTable::new(3);
        t.record(trace(&[1], &[10]), 0.5);
        t.record(trace(&[2], &[10]), 0.5);
        assert_eq!(t.len(), 2);
        assert_eq!(t.distinct_output_count(), 1);
        t.record(trace(&[1], &[11]), 0.5);
        assert_eq!(t.len(), 2);
        assert_eq!(t.lookup(&s(&[1]), 0.8).fan_out, s(&[11]));
    }

    #[test]
    fn zero_capacity_keeps_nothing() {
        let mut t = IndexTable::new(0);
        t.record(trace(&[1], &[10]), 0.5);
        assert!(t.is_empty());
    }

    #[test]
    fn merge_to_empty_deletes_entries() {
        let mut t = IndexTable::new(1);
        t.record(trace(&[1], &[10]), 0.0);
        t.record(trace(&[2], &[11]), 0.0);
        assert!(t.is_empty());
    }

    #[test]
    fn select_takes_all_when_e_out_covers_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let got = select_fanout(&IndexTable::new(20), &s(&[1, 2, 3]), 3, &mut rng);
        assert_eq!(got, s(&[1, 2, 3]));
        assert!(select_fanout(&IndexTable::new(20), &[], 3, &mut rng).is_empty());
    }
}
