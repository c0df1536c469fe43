//! Simulation and certification toolkit for camera networks that monitor an
//! environment of flat polygonal patches. Pan-tilt-zoom sensors repeatedly
//! reposition themselves using only their own payoff history; the payoffs are
//! marginal contributions to a network-wide monitoring objective, so selfish
//! adaptation climbs the shared welfare. An exact Markov-chain backend
//! certifies where those dynamics settle for small instances.

pub mod chain;
pub mod comms;
pub mod env;
pub mod error;
pub mod game;
pub mod learner;
pub mod scenario;

pub use error::{Error, Result};
pub use game::{ActionSpace, GameDefinition, JointAction, TableGame};
