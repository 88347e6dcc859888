use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Removes `⌊missing·|S|⌋` members of `sample`, then adds `⌊noise·|S|⌋`
/// nodes of `0..universe` that were not in it. Both draws are uniform.
pub fn perturb_cue<R: Rng + ?Sized>(
    sample: &BTreeSet<NodeId>,
    missing: f64,
    noise: f64,
    universe: usize,
    rng: &mut R,
) -> Result<BTreeSet<NodeId>> {
    for f in [missing, noise] {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameters(format!("perturbation fraction {f} outside [0,1]")));
        }
    }
    let size = sample.len();
    let drop = (missing * size as f64).floor() as usize;
    let add = (noise * size as f64).floor() as usize;
    let outside: Vec<NodeId> = (0..universe).map(NodeId::from).filter(|v| !sample.contains(v)).collect();
    if add > outside.len() {
        return Err(Error::Precondition(format!(
            "cannot add {add} noise nodes, only {} non-members exist",
            outside.len()
        )));
    }
    let members: Vec<NodeId> = sample.iter().copied().collect();
    let mut cue: BTreeSet<NodeId> = sample.clone();
    for i in index::sample(rng, size, drop) {
        cue.remove(&members[i]);
    }
    cue.extend(index::sample(rng, outside.len(), add).into_iter().map(|i| outside[i]));
    Ok(cue)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(r: std::ops::Range<u32>) -> BTreeSet<NodeId> {
        r.map(NodeId).collect()
    }

    #[test]
    fn zero_fractions_are_identity() {
        let s = set(0..60);
        assert_eq!(perturb_cue(&s, 0.0, 0.0, 500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap(), s);
    }

    #[test]
    fn everything_missing() {
        let s = set(0..60);
        assert!(perturb_cue(&s, 1.0, 0.0, 500, &mut ChaCha8Rng::seed_from_u64(1)).unwrap().is_empty());
    }

    #[test]
    fn half_replaced() {
        let s = set(0..60);
        let cue = perturb_cue(&s, 0.5, 0.5, 500, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(cue.len(), 60);
        assert_eq!(cue.intersection(&s).count(), 30);
    }

    #[test]
    fn exhausted_universe_is_rejected() {
        let s = set(0..8);
        assert!(perturb_cue(&s, 0.0, 1.0, 10, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(perturb_cue(&s, 1.2, 0.0, 10, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
