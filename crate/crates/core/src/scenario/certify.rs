//! Equilibrium certification for reduced scenarios: collapses the scene
//! objective to a utility table, finds welfare maximizers and the
//! stochastically stable set, and tracks how stationary mass concentrates
//! as exploration shrinks.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::chain::{stationary_distribution, stochastically_stable_states, PairSpace, POTENTIAL_TIE_TOL};
use crate::error::{Error, Result};
use crate::game::{TableGame, JOINT_ENUMERATION_LIMIT};
use crate::learner::kappa_bounds;

use super::config::CompiledScenario;

/// Exploration rates examined by default, largest first so the report reads
/// as a concentration curve.
pub const CERTIFY_EPSILONS: [f64; 4] = [0.05, 0.02, 0.01, 0.005];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    /// Change events applied before reducing — the analysis covers the
    /// scene the run ends in, where the asymptotic claims live.
    pub events_applied: usize,
    /// Welfare-maximizing joint actions (exact float ties included).
    pub maximizers: Vec<Vec<usize>>,
    /// True when every joint action's welfare ties the maximum — nothing
    /// to prefer, as in a scene with no information anywhere.
    pub all_tied: bool,
    pub stable: Vec<Vec<usize>>,
    /// Every stable state is a welfare maximizer.
    pub contained: bool,
    pub kappa: f64,
    /// `(ε, stationary mass on the maximizer diagonal)` per examined rate.
    pub masses: Vec<(f64, f64)>,
}

impl Certificate {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "certifying the terminal scene ({} change events applied)",
            self.events_applied
        );
        if self.all_tied {
            let _ = writeln!(
                out,
                "all {} joint actions tie in welfare; every settled state is stable",
                self.maximizers.len()
            );
        } else {
            let _ = writeln!(out, "welfare maximizers: {:?}", self.maximizers);
        }
        let _ = writeln!(out, "stochastically stable set (kappa = {}): {:?}", self.kappa, self.stable);
        let _ = writeln!(
            out,
            "stable set within the maximizers: {}",
            if self.contained { "yes" } else { "NO" }
        );
        for (eps, mass) in &self.masses {
            let _ = writeln!(out, "stationary mass on maximizers at epsilon {eps}: {mass:.4}");
        }
        out
    }
}

/// Guard failures come back with a hint, since the fix is always the same.
fn shrink_hint(e: Error) -> Error {
    match e {
        Error::SizeGuard { what, size, limit } => Error::Config(vec![format!(
            "{what}: {size} states exceed the analysis limit {limit}; shrink the scenario \
             (fewer sensors, or fewer pan/tilt/zoom values)"
        )]),
        other => other,
    }
}

pub fn certify(scenario: &CompiledScenario, epsilons: &[f64]) -> Result<Certificate> {
    let kappa = scenario.params.kappa;
    let bounds = kappa_bounds(&scenario.space)?;
    if !bounds.contains(kappa) {
        return Err(Error::Config(vec![format!(
            "certification requires kappa in ({:.6}, {}], got {kappa}",
            bounds.lower_exclusive, bounds.upper_inclusive
        )]));
    }

    // Theorem-style statements are asymptotic, so certify the game the run
    // ends in: all events that fire within the configured rounds applied.
    scenario.objective.reset_scene();
    scenario
        .objective
        .advance_scene(scenario.rounds.saturating_sub(1));
    let events_applied = scenario
        .config
        .events
        .iter()
        .filter(|e| e.round < scenario.rounds)
        .count();
    let def = scenario.game();
    let table = TableGame::from_definition(&def, JOINT_ENUMERATION_LIMIT).map_err(shrink_hint)?;
    let phi = table.phi().expect("scene objective provides welfare");
    let best = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ranks = table.argmax_phi().expect("phi present");
    let maximizers: Vec<Vec<usize>> = max_ranks
        .iter()
        .map(|&r| scenario.space.unrank(r).0)
        .collect();
    let all_tied = best - worst <= POTENTIAL_TIE_TOL;

    let stable_actions = stochastically_stable_states(&def, kappa).map_err(shrink_hint)?;
    let max_set: std::collections::BTreeSet<usize> = max_ranks.iter().copied().collect();
    let contained = stable_actions
        .iter()
        .all(|a| max_set.contains(&scenario.space.rank(a)));
    let stable = stable_actions.into_iter().map(|a| a.0).collect();

    let pairs = PairSpace::enumerate(&scenario.space).map_err(shrink_hint)?;
    let mut masses = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mu = stationary_distribution(&def, eps, kappa).map_err(shrink_hint)?;
        let mass: f64 = max_ranks.iter().map(|&r| mu[pairs.diag_of_rank(r)]).sum();
        masses.push((eps, mass));
    }
    scenario.objective.reset_scene();

    Ok(Certificate {
        events_applied,
        maximizers,
        all_tied,
        stable,
        contained,
        kappa,
        masses,
    })
}
