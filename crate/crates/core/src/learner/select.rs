//! Single-sensor decision rule. Each sensor remembers its last two actions
//! and payoffs; whether the latest move paid off decides between plain
//! exploitation and the reluctant return/stay split.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Two-deep action/payoff memory of one sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorMemory {
    /// Action executed last round (`a^1`).
    pub last: usize,
    /// Action executed the round before (`a^2`).
    pub prev: usize,
    /// Payoff received last round (`U^1`).
    pub u_last: f64,
    /// Payoff received the round before (`U^2`).
    pub u_prev: f64,
}

impl SensorMemory {
    /// Payoff drop of the latest move; positive when it made things worse.
    pub fn delta(&self) -> f64 {
        self.u_prev - self.u_last
    }
}

/// Which rule produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Uniform draw during the two seeding rounds.
    Init,
    Explore,
    Exploit,
    Irrational,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Init => "init",
            Branch::Explore => "explore",
            Branch::Exploit => "exploit",
            Branch::Irrational => "irrational",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "init" => Ok(Branch::Init),
            "explore" => Ok(Branch::Explore),
            "exploit" => Ok(Branch::Exploit),
            "irrational" => Ok(Branch::Irrational),
            other => Err(format!("unknown branch label {other:?}")),
        }
    }
}

/// Aggregate probabilities of the three decision branches for a given
/// memory state. They partition the unit interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchProbabilities {
    pub explore: f64,
    pub exploit: f64,
    pub irrational: f64,
}

pub fn branch_probabilities(m: &SensorMemory, epsilon: f64, kappa: f64) -> BranchProbabilities {
    if m.u_last >= m.u_prev {
        BranchProbabilities {
            explore: epsilon,
            exploit: 1.0 - epsilon,
            irrational: 0.0,
        }
    } else {
        let stay = kappa * epsilon.powf(m.delta());
        BranchProbabilities {
            explore: epsilon,
            exploit: (1.0 - epsilon) * (1.0 - stay),
            irrational: (1.0 - epsilon) * stay,
        }
    }
}

/// Draws the next action for one sensor.
///
/// `options` must be the constraint set of `m.last`, sorted, containing
/// `m.last` itself and (by symmetry of the constraints) `m.prev`.
///
/// If the latest move did not lose payoff, the sensor explores away from
/// `last` with probability `epsilon` and otherwise keeps it. If it did
/// lose, exploration avoids both remembered actions, and the remaining
/// mass splits between stubbornly staying (probability `kappa *
/// epsilon^delta` of it) and returning to `prev`.
pub fn select_action<R: Rng + ?Sized>(
    m: &SensorMemory,
    options: &[usize],
    epsilon: f64,
    kappa: f64,
    rng: &mut R,
) -> (usize, Branch) {
    debug_assert!(options.contains(&m.last), "constraint set must include a^1");
    let improved = m.u_last >= m.u_prev;
    if rng.random::<f64>() < epsilon {
        let pick = if improved {
            draw_excluding(options, &[m.last], rng)
        } else {
            draw_excluding(options, &[m.last, m.prev], rng)
        };
        return (pick, Branch::Explore);
    }
    if improved {
        return (m.last, Branch::Exploit);
    }
    let delta = m.delta();
    assert!(
        delta > 0.0,
        "worsening branch reached with non-positive payoff drop {delta}"
    );
    if rng.random::<f64>() < kappa * epsilon.powf(delta) {
        (m.last, Branch::Irrational)
    } else {
        (m.prev, Branch::Exploit)
    }
}

/// Uniform draw over `options` minus `excluded`, by rejection against
/// explicit membership. The difference is never empty for valid constraint
/// sets (at least three options, at most two exclusions).
fn draw_excluding<R: Rng + ?Sized>(options: &[usize], excluded: &[usize], rng: &mut R) -> usize {
    debug_assert!(options.iter().any(|a| !excluded.contains(a)));
    loop {
        let candidate = options[rng.random_range(0..options.len())];
        if !excluded.contains(&candidate) {
            return candidate;
        }
    }
}
