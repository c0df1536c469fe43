//! Exploration-rate schedules and the admissible range for the
//! reluctance weight `kappa`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::ActionSpace;

/// Diminishing exploration rate `k^(-1/(n(D+1)))` for round `k >= 1`,
/// where `n` is the player count and `D` the largest constraint-graph
/// diameter. Rounds count from 1; the rate is not defined at 0.
pub fn epsilon_schedule(round: u64, players: usize, diameter: usize) -> Result<f64> {
    if round == 0 {
        return Err(Error::ZeroRound);
    }
    let exponent = -1.0 / (players as f64 * (diameter as f64 + 1.0));
    Ok((round as f64).powf(exponent))
}

/// Open-below, closed-above interval for `kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaBounds {
    pub lower_exclusive: f64,
    pub upper_inclusive: f64,
}

impl KappaBounds {
    /// True when no admissible value exists (the interval has no interior).
    pub fn is_empty(&self) -> bool {
        self.lower_exclusive >= self.upper_inclusive
    }

    pub fn contains(&self, kappa: f64) -> bool {
        kappa > self.lower_exclusive && kappa <= self.upper_inclusive
    }
}

/// Admissible `kappa` interval `(1/(C-1), 1/2]` where `C` is the largest
/// constraint-set size. `C = 3` yields the empty interval `(1/2, 1/2]`,
/// reported rather than rejected; `C <= 2` leaves the bound undefined.
pub fn kappa_bounds(space: &ActionSpace) -> Result<KappaBounds> {
    let c = space.max_constraint_size();
    if c <= 2 {
        return Err(Error::DegenerateKappa { c });
    }
    Ok(KappaBounds {
        lower_exclusive: 1.0 / (c as f64 - 1.0),
        upper_inclusive: 0.5,
    })
}

/// How the exploration rate evolves over rounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Fixed rate in `(0, 1/2]`.
    Constant(f64),
    /// Diminishing schedule, clamped to `1/2` during the early rounds
    /// where the raw schedule still exceeds it.
    Schedule { players: usize, diameter: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub mode: EpsilonMode,
    pub kappa: f64,
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if let EpsilonMode::Constant(e) = self.mode {
            if !(e > 0.0 && e <= 0.5) {
                return Err(Error::BadParameter(format!(
                    "constant exploration rate must lie in (0, 0.5], got {e}"
                )));
            }
        }
        if !(0.0..=0.5).contains(&self.kappa) {
            return Err(Error::BadParameter(format!(
                "kappa must lie in [0, 0.5], got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Exploration rate in effect at `round`.
    pub fn epsilon_at(&self, round: u64) -> Result<f64> {
        match self.mode {
            EpsilonMode::Constant(e) => Ok(e),
            EpsilonMode::Schedule { players, diameter } => {
                Ok(epsilon_schedule(round, players, diameter)?.min(0.5))
            }
        }
    }
}
