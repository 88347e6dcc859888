mod common;

use std::collections::BTreeSet;

use adg::experiments::{damage_network, perturb_cue, DamageTarget, RestorationScheme};
use adg::metrics::{score_retrieval, EmptyRetrieval};
use adg::NodeId;
use common::{load, small_network};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn grouping_bound_matches_enumeration_up_to_ten_nodes() {
    assert_eq!(common::grouping_mismatch(), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn retrieval_leaves_the_snapshot_untouched(
        n in 4usize..30, density in 0.05f64..0.5, seed in any::<u64>(), stored in 0u64..4, s in 1usize..6,
    ) {
        common::purity(n, density, seed, stored, s)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fresh_network_recalls_a_well_represented_sample_exactly(
        n in 4usize..40, density in 0.05f64..0.5, seed in any::<u64>(), s in 1usize..8,
    ) {
        common::immediate_recall(n, density, seed, s)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tables_never_exceed_their_bound(
        n in 4usize..30, density in 0.05f64..0.6, seed in any::<u64>(), k in 0usize..4, s in 1usize..6,
    ) {
        common::k_bound(n, density, seed, k, s)?;
    }

    #[test]
    fn stable_subgraphs_are_paths_between_initials(
        n in 4usize..40, density in 0.05f64..0.4, seed in any::<u64>(), s in 1usize..10,
    ) {
        common::paths_between_initials(n, density, seed, s)?;
    }

    #[test]
    fn seed_replay_is_exact_with_and_without_parallel_decisions(
        n in 10usize..40, density in 0.05f64..0.4, seed in any::<u64>(), s in 2usize..10,
    ) {
        common::seed_replay(n, density, seed, s)?;
    }

    #[test]
    fn identical_subgraphs_score_one(n in 4usize..30, density in 0.05f64..0.4, seed in any::<u64>()) {
        let mut net = small_network(n, density, seed, 20);
        for (_, sub) in load(&mut net, 3.min(n), 2, seed) {
            for empty in [EmptyRetrieval::Vacuous, EmptyRetrieval::Strict] {
                let s = score_retrieval(&sub, &sub, empty);
                prop_assert_eq!((s.accuracy, s.completeness), (1.0, 1.0));
            }
        }
    }

    #[test]
    fn unperturbed_cues_are_unchanged(size in 0u32..60, seed in any::<u64>()) {
        let cue: BTreeSet<NodeId> = (0..size).map(|i| NodeId(i * 2)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(perturb_cue(&cue, 0.0, 0.0, 200, &mut rng).unwrap(), cue);
    }

    #[test]
    fn perturbed_cue_sizes(size in 1u32..40, missing in 0.0f64..=1.0, noise in 0.0f64..=1.0, seed in any::<u64>()) {
        let cue: BTreeSet<NodeId> = (0..size).map(NodeId).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let got = perturb_cue(&cue, missing, noise, 100, &mut rng).unwrap();
        let dropped = (missing * f64::from(size)).floor() as usize;
        let added = (noise * f64::from(size)).floor() as usize;
        prop_assert_eq!(got.intersection(&cue).count(), size as usize - dropped);
        prop_assert_eq!(got.difference(&cue).count(), added);
    }

    #[test]
    fn zero_damage_with_maintain_is_the_identity(n in 4usize..30, density in 0.05f64..0.4, seed in any::<u64>()) {
        let mut net = small_network(n, density, seed, 20);
        load(&mut net, 3.min(n), 3, seed);
        for target in [DamageTarget::Nodes, DamageTarget::Edges] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = damage_network(&net, target, 0.0, RestorationScheme::Maintain, 0.5, &mut rng).unwrap();
            prop_assert_eq!(d.network.to_json(), net.to_json());
        }
    }

    #[test]
    fn damaged_tables_stay_within_bound_and_graph(
        n in 4usize..30, density in 0.05f64..0.4, seed in any::<u64>(), f in 0.0f64..=1.0,
    ) {
        let mut net = small_network(n, density, seed, 3);
        load(&mut net, 3.min(n), 8, seed);
        for scheme in RestorationScheme::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = damage_network(&net, DamageTarget::Nodes, f, scheme, 0.5, &mut rng).unwrap();
            for (v, t) in d.network.tables().iter().enumerate() {
                prop_assert!(t.distinct_output_count() <= 3);
                if scheme != RestorationScheme::Maintain {
                    for e in t.entries() {
                        prop_assert!(e.fan_out.iter().all(|w| !d.removed_nodes.contains(w)), "node {v}");
                    }
                }
            }
            prop_assert!(d.network.graph().edges().all(|(u, w)| !d.removed_nodes.contains(&u) && !d.removed_nodes.contains(&w)));
        }
    }
}
