//! Exact Markov-chain analysis of the pair process (previous action,
//! current action) induced by the learning rule on a finite game.
//!
//! This layer certifies, on games small enough to enumerate, what the
//! learner only samples: transition probabilities and their small-ε
//! exponents, recurrent classes of the unperturbed chain, minimal-resistance
//! routes between settled states, spanning-tree stochastic potentials, and
//! exact stationary distributions. Games are plain [`GameDefinition`]s, so
//! sensor scenarios reduced to utility tables plug in unchanged.
//!
//! [`GameDefinition`]: crate::game::GameDefinition

pub mod arborescence;
pub mod classes;
pub mod potentials;
pub mod routes;
pub mod state;
pub mod stationary;
pub mod transition;

pub use arborescence::{exhaustive_min_in_tree, min_in_tree, min_out_arborescence};
pub use classes::recurrent_classes;
pub use potentials::{
    stochastic_potentials, stochastically_stable_states, GraphEdge, ResistanceGraph, DIAG_LIMIT,
    POTENTIAL_TIE_TOL,
};
pub use routes::{min_resistance_between, single_deviator, straight_route_resistance};
pub use state::{ChainState, PairSpace, CHAIN_STATE_LIMIT};
pub use stationary::{
    stationary_distribution, stationary_of_model, DIRECT_SOLVE_LIMIT, POWER_ITERATION_CAP,
    STATIONARY_RESIDUAL,
};
pub use transition::{
    fitted_resistance, transition_probability, transition_resistance, Transition, TransitionModel,
};
