//! Simulation library for sequential episodic memory in energy-based
//! two-layer networks with delay synapses.
//!
//! A feature layer and a hidden layer interact through a pattern matrix
//! `xi`; directed intra-hidden synapses `phi` feed a slow exponentially
//! filtered copy of the feature output back into the hidden layer. The
//! delay trace reshapes the energy surface as it drifts, so retrieval
//! walks through a stored episode of memories instead of settling into a
//! single one. Two diabatic variants are provided: LISEM (tanh feature
//! layer, linear hidden interactions) and DSEM (identity feature layer,
//! softmax hidden interactions), plus the full model with an integrated
//! hidden layer.
//!
//! - [`model`] — configuration, synapses, memory generation, episode graphs
//! - [`dynamics`] — time-derivative functions and activations
//! - [`integrate`] — fixed-step RK4 driver and trajectory recording
//! - [`energy`] — energy functions, descent-rate split, fixed-point search
//! - [`learning`] — online energy-based synapse rules for DSEM
//! - [`metrics`] — overlaps and retrieval-sequence extraction
//! - [`capacity`] — episode-length capacity experiments

pub mod capacity;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod integrate;
pub mod learning;
pub mod metrics;
pub mod model;

pub use capacity::{capacity_search, CapacityOptions, CapacityResult};
pub use dynamics::{
    delay_convolution_reference, derived_hidden, dsem_rhs, gsemm_rhs, lisem_rhs, rhs,
    softmax_activation, tanh_activation, Activation, StateDerivative,
};
pub use energy::{
    energy_dsem, energy_gsemm, energy_lisem, energy_rate_terms, energy_report, energy_total,
    find_instantaneous_fixed_point, EnergyReport, FixedPoint, LagrangianPair, LisemEnergy,
};
pub use error::{Error, Result};
pub use integrate::{init_from_cue, rk4_step, simulate, SimOptions, Trajectory};
pub use learning::{
    phi_update, target_signals, train_online, xi_update, LearningConfig, Signals,
    TrainingSnapshot,
};
pub use metrics::{
    contains_cycle_traversal, extract_sequence, overlaps, visit_events, RetrievalCriterion, Visit,
};
pub use model::{
    build_episode_graph, build_phi, generate_memories, ActivationKind, EpisodeGraph, ModelSpec,
    NetworkState, SynapseState, Variant,
};
