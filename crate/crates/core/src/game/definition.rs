//! Game definitions built around a shared welfare function. Utilities are
//! each player's marginal contribution, which makes the welfare itself the
//! potential of the game; most of the chain machinery depends on that.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::space::{ActionSpace, JointAction};

/// Guard for exhaustive sweeps over the joint action space.
pub const JOINT_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Margin kept below the 1/2 deviation ceiling when rescaling.
pub const SCALING_MARGIN: f64 = 0.01;

/// Per-player payoff oracle.
pub trait UtilityOracle: Send + Sync {
    fn utility(&self, player: usize, action: &JointAction) -> f64;
}

/// Global welfare `W` with a null-participation evaluation per player.
///
/// `value_without(i, a)` must not depend on `a[i]`; it models player `i`
/// contributing nothing while everyone else keeps acting.
pub trait GlobalObjective: Send + Sync {
    fn value(&self, action: &JointAction) -> f64;

    fn value_without(&self, player: usize, action: &JointAction) -> f64;

    /// Upper bound on `|value(a) - value(a')|`, if one is cheap to compute.
    /// Used to rescale games whose joint space is too large to sweep.
    fn deviation_bound(&self) -> Option<f64> {
        None
    }
}

/// Marginal contribution of one player to the global objective.
pub fn marginal_utility(objective: &dyn GlobalObjective, player: usize, a: &JointAction) -> f64 {
    objective.value(a) - objective.value_without(player, a)
}

struct MarginalUtilities(Arc<dyn GlobalObjective>);

impl UtilityOracle for MarginalUtilities {
    fn utility(&self, player: usize, action: &JointAction) -> f64 {
        marginal_utility(self.0.as_ref(), player, action)
    }
}

struct Scaled<T: ?Sized>(Arc<T>, f64);

impl UtilityOracle for Scaled<dyn UtilityOracle> {
    fn utility(&self, player: usize, action: &JointAction) -> f64 {
        self.1 * self.0.utility(player, action)
    }
}

impl GlobalObjective for Scaled<dyn GlobalObjective> {
    fn value(&self, action: &JointAction) -> f64 {
        self.1 * self.0.value(action)
    }

    fn value_without(&self, player: usize, action: &JointAction) -> f64 {
        self.1 * self.0.value_without(player, action)
    }

    fn deviation_bound(&self) -> Option<f64> {
        self.0.deviation_bound().map(|b| b * self.1)
    }
}

/// A full game: action structure, utilities, and (optionally) the welfare
/// the utilities were derived from.
#[derive(Clone)]
pub struct GameDefinition {
    space: ActionSpace,
    utilities: Arc<dyn UtilityOracle>,
    objective: Option<Arc<dyn GlobalObjective>>,
}

impl GameDefinition {
    pub fn new(space: ActionSpace, utilities: Arc<dyn UtilityOracle>) -> Self {
        GameDefinition {
            space,
            utilities,
            objective: None,
        }
    }

    /// Wires utilities as marginal contributions to `objective`.
    pub fn from_objective(space: ActionSpace, objective: Arc<dyn GlobalObjective>) -> Self {
        GameDefinition {
            space,
            utilities: Arc::new(MarginalUtilities(objective.clone())),
            objective: Some(objective),
        }
    }

    /// Pairs independently supplied utilities with an objective. Nothing ties
    /// the two together; [`check_potential_identity`] exists to audit them.
    ///
    /// [`check_potential_identity`]: GameDefinition::check_potential_identity
    pub fn with_objective(
        space: ActionSpace,
        utilities: Arc<dyn UtilityOracle>,
        objective: Arc<dyn GlobalObjective>,
    ) -> Self {
        GameDefinition {
            space,
            utilities,
            objective: Some(objective),
        }
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn players(&self) -> usize {
        self.space.players()
    }

    pub fn utility(&self, player: usize, action: &JointAction) -> f64 {
        self.utilities.utility(player, action)
    }

    pub fn objective(&self) -> Option<&Arc<dyn GlobalObjective>> {
        self.objective.as_ref()
    }

    /// Welfare at `a`, if the game carries its objective.
    pub fn global(&self, action: &JointAction) -> Option<f64> {
        self.objective.as_ref().map(|o| o.value(action))
    }

    /// Samples feasible unilateral deviations and reports the largest gap
    /// between the utility change and the welfare change. For an intact
    /// marginal-contribution game this is floating-point noise.
    pub fn check_potential_identity(&self, trials: usize, seed: u64) -> Result<f64> {
        let objective = self.objective.as_ref().ok_or(Error::NoObjective)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let a = random_joint(&self.space, &mut rng);
            let player = rng.random_range(0..self.players());
            let options = self.space.constraint_set(player, a[player]);
            let moved: Vec<usize> = options.iter().copied().filter(|&b| b != a[player]).collect();
            if moved.is_empty() {
                continue;
            }
            let b = with_player(&a, player, moved[rng.random_range(0..moved.len())]);
            let du = self.utility(player, &b) - self.utility(player, &a);
            let dw = objective.value(&b) - objective.value(&a);
            worst = worst.max((du - dw).abs());
        }
        Ok(worst)
    }

    /// All joint actions from which no player has a feasible improving move.
    pub fn enumerate_constrained_nash(&self) -> Result<Vec<JointAction>> {
        let size = self
            .space
            .joint_count()
            .ok_or(Error::SizeGuard {
                what: "Nash enumeration",
                size: u128::MAX,
                limit: JOINT_ENUMERATION_LIMIT,
            })?;
        if size > JOINT_ENUMERATION_LIMIT {
            return Err(Error::SizeGuard {
                what: "Nash enumeration",
                size,
                limit: JOINT_ENUMERATION_LIMIT,
            });
        }
        let mut out = Vec::new();
        'outer: for a in self.space.joint_actions() {
            for player in 0..self.players() {
                let here = self.utility(player, &a);
                for &b in self.space.constraint_set(player, a[player]) {
                    if b == a[player] {
                        continue;
                    }
                    if self.utility(player, &with_player(&a, player, b)) > here {
                        continue 'outer;
                    }
                }
            }
            out.push(a);
        }
        Ok(out)
    }

    /// Largest `|ΔU|` over every feasible unilateral deviation, by sweep.
    pub fn max_unilateral_deviation(&self) -> Result<f64> {
        let size = self.space.joint_count().unwrap_or(u128::MAX);
        if size > JOINT_ENUMERATION_LIMIT {
            return Err(Error::SizeGuard {
                what: "deviation sweep",
                size,
                limit: JOINT_ENUMERATION_LIMIT,
            });
        }
        let mut worst = 0.0f64;
        for a in self.space.joint_actions() {
            for player in 0..self.players() {
                let here = self.utility(player, &a);
                for &b in self.space.constraint_set(player, a[player]) {
                    if b == a[player] {
                        continue;
                    }
                    let there = self.utility(player, &with_player(&a, player, b));
                    worst = worst.max((there - here).abs());
                }
            }
        }
        Ok(worst)
    }

    /// Rescales utilities (and the objective, when present) so that every
    /// feasible unilateral deviation moves a utility by at most `0.49`.
    ///
    /// Small joint spaces are swept exactly; larger games fall back to the
    /// objective's deviation bound. Games already inside the ceiling are
    /// returned unchanged with factor 1.
    pub fn scale_to_assumption3(&self) -> Result<(GameDefinition, f64)> {
        let ceiling = 0.5 - SCALING_MARGIN;
        let size = self.space.joint_count().unwrap_or(u128::MAX);
        let worst = if size <= JOINT_ENUMERATION_LIMIT {
            self.max_unilateral_deviation()?
        } else {
            let objective = self.objective.as_ref().ok_or(Error::NoObjective)?;
            objective.deviation_bound().ok_or(Error::NoObjectiveBound)?
        };
        let factor = if worst <= ceiling { 1.0 } else { ceiling / worst };
        Ok((self.scaled(factor), factor))
    }

    fn scaled(&self, factor: f64) -> GameDefinition {
        if factor == 1.0 {
            return self.clone();
        }
        GameDefinition {
            space: self.space.clone(),
            utilities: Arc::new(Scaled(self.utilities.clone(), factor)),
            objective: self
                .objective
                .as_ref()
                .map(|o| Arc::new(Scaled(o.clone(), factor)) as Arc<dyn GlobalObjective>),
        }
    }
}

/// Copy of `a` with player `i` switched to `action`.
pub fn with_player(a: &JointAction, player: usize, action: usize) -> JointAction {
    let mut b = a.clone();
    b.0[player] = action;
    b
}

/// Uniform draw over the joint action space.
pub fn random_joint<R: Rng>(space: &ActionSpace, rng: &mut R) -> JointAction {
    JointAction(
        (0..space.players())
            .map(|i| rng.random_range(0..space.action_count(i)))
            .collect(),
    )
}
