//! Constrained games over finite per-player action sets, with utilities
//! defined as marginal contributions to a shared welfare function.

pub mod definition;
pub mod gen;
pub mod space;
pub mod table;

pub use definition::{
    marginal_utility, random_joint, with_player, GameDefinition, GlobalObjective, UtilityOracle,
    JOINT_ENUMERATION_LIMIT, SCALING_MARGIN,
};
pub use space::{ActionSpace, JointAction, SpaceViolation};
pub use table::TableGame;
