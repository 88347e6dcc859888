//! Reproduction harness: capacity, fault tolerance, robustness under damage
//! and topology comparison.
//!
//! Every run is a pure function of its [`ExperimentConfig`]. Sub-seeds come
//! from [`crate::seed::derive`] with the tags in [`crate::seed::tag`]:
//! graph `[GRAPH, seed]` applied to the generator seed, sample `i`
//! `[SAMPLE, i]`, its storage episode `[STORE, i]`, its retrieval
//! `[RETRIEVE, i]`, perturbed cues `[PERTURB, mode, level, i]` and damage
//! `[DAMAGE, target, level]`.

mod config;
mod damage;
mod output;
mod perturb;
mod runs;

pub use config::{
    default_grid, dense_network, sparse_network, structure_networks, CapacitySearch, DamageTarget, ExperimentConfig,
    ExperimentKind, NetworkSpec, PerturbationMode, RestorationScheme,
};
pub use damage::{damage_network, restore_table, Damaged};
pub use output::{CapacityCurve, ExperimentOutput, ExperimentRecord, Timing};
pub use perturb::perturb_cue;
pub use runs::{
    build_graph, load_network, measure, run, run_capacity, run_fault_tolerance, run_robustness, run_structures, Loaded,
};
