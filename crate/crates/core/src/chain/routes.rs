//! Paths between settled states and their resistances.
//!
//! Two settled states are adjacent when exactly one sensor can hop between
//! them in one constrained step. The cheapest way to cross such an edge is
//! the straight route — the deviator explores once, then everyone settles —
//! which costs 1, plus the deviator's payoff drop if the hop made it worse.
//! Everything else reduces to shortest paths over per-transition
//! resistances.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::game::{ActionSpace, GameDefinition, JointAction};

use super::state::ChainState;
use super::transition::TransitionModel;

/// The unique deviating player linking two joint actions one constrained
/// step apart; `None` if zero or several coordinates moved, or the move is
/// infeasible.
pub fn single_deviator(
    space: &ActionSpace,
    from: &JointAction,
    to: &JointAction,
) -> Option<usize> {
    if from.len() != space.players() || to.len() != space.players() {
        return None;
    }
    let mut deviator = None;
    for i in 0..space.players() {
        if from[i] != to[i] {
            if deviator.is_some() {
                return None;
            }
            deviator = Some(i);
        }
    }
    let i = deviator?;
    space.constraint_set(i, from[i]).contains(&to[i]).then_some(i)
}

/// Resistance of the straight route between two adjacent settled states:
/// one exploration, then a free settle if the deviator gained, or a
/// reluctant stay costing the payoff drop if it lost. Under the deviation
/// ceiling the result lies in [1, 1.5).
pub fn straight_route_resistance(
    game: &GameDefinition,
    z1: &ChainState,
    z2: &ChainState,
    kappa: f64,
) -> Result<f64> {
    assert!(kappa > 0.0, "the reluctant-stay branch needs a positive gain");
    if !z1.is_diagonal() || !z2.is_diagonal() {
        return Err(Error::NotSingleDeviation(format!(
            "straight routes connect settled states, got {z1:?} -> {z2:?}"
        )));
    }
    let Some(i) = single_deviator(game.space(), &z1.curr, &z2.curr) else {
        return Err(Error::NotSingleDeviation(format!(
            "{:?} -> {:?} is not one feasible hop of a single sensor",
            z1.curr, z2.curr
        )));
    };
    let before = game.utility(i, &z1.curr);
    let after = game.utility(i, &z2.curr);
    Ok(1.0 + (before - after).max(0.0))
}

/// Minimal total resistance over all transition paths from z1 to z2;
/// infinite when unreachable. Both endpoints may be any chain states,
/// though the interesting case is settled-to-settled.
pub fn min_resistance_between(
    game: &GameDefinition,
    z1: &ChainState,
    z2: &ChainState,
    kappa: f64,
) -> Result<f64> {
    // Probabilities are not used; any ε ∈ (0, 1) yields the same support.
    let model = TransitionModel::build(game, 0.5, kappa)?;
    let from = model.pairs().index_of(z1)?;
    let to = model.pairs().index_of(z2)?;
    Ok(resistance_distances(&model, from)[to])
}

/// Dijkstra over the stored transitions' resistances from one source.
pub(super) fn resistance_distances(model: &TransitionModel, source: usize) -> Vec<f64> {
    let n = model.pairs().len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), source)));
    while let Some(Reverse((OrderedFloat(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for t in model.row(v) {
            let nd = d + t.resistance;
            if nd < dist[t.to] {
                dist[t.to] = nd;
                heap.push(Reverse((OrderedFloat(nd), t.to)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::game::gen::{random_marginal_game, random_space};
    use crate::game::{with_player, ActionSpace, TableGame};

    use super::*;

    fn diag(a: Vec<usize>) -> ChainState {
        ChainState::diagonal(JointAction(a))
    }

    #[test]
    fn improving_hop_costs_exactly_one() {
        let space = ActionSpace::complete(&[3]);
        let game = TableGame::from_welfare(space, vec![0.1, 0.4, 0.2], None)
            .unwrap()
            .to_definition();
        let r = straight_route_resistance(&game, &diag(vec![0]), &diag(vec![1]), 0.3).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn worsening_hop_adds_the_payoff_drop() {
        let space = ActionSpace::complete(&[3]);
        let game = TableGame::from_welfare(space, vec![0.4, 0.2, 0.3], None)
            .unwrap()
            .to_definition();
        let r = straight_route_resistance(&game, &diag(vec![0]), &diag(vec![1]), 0.3).unwrap();
        assert!((r - 1.2).abs() < 1e-12);
    }

    #[test]
    fn non_edges_are_rejected() {
        let space = ActionSpace::complete(&[3, 3]);
        let game = TableGame::from_welfare(space, vec![0.0; 9], None)
            .unwrap()
            .to_definition();
        // Two sensors move at once.
        let err = straight_route_resistance(&game, &diag(vec![0, 0]), &diag(vec![1, 1]), 0.3);
        assert!(matches!(err, Err(Error::NotSingleDeviation(_))));
        // No sensor moves at all.
        let err = straight_route_resistance(&game, &diag(vec![0, 0]), &diag(vec![0, 0]), 0.3);
        assert!(matches!(err, Err(Error::NotSingleDeviation(_))));
        // Off-diagonal endpoint.
        let z = ChainState::new(JointAction(vec![0, 0]), JointAction(vec![0, 1]));
        let err = straight_route_resistance(&game, &z, &diag(vec![0, 0]), 0.3);
        assert!(matches!(err, Err(Error::NotSingleDeviation(_))));
    }

    #[test]
    fn self_distance_is_zero_and_straight_edges_are_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let space = random_space(&mut rng, 2, 3, 4, 0.4);
            let game = random_marginal_game(&mut rng, &space, false)
                .scale_to_assumption3()
                .0
                .to_definition();
            let kappa = 0.3;
            for a in space.joint_actions() {
                let za = ChainState::diagonal(a.clone());
                assert_eq!(min_resistance_between(&game, &za, &za, kappa).unwrap(), 0.0);
                for i in 0..space.players() {
                    for &b in space.constraint_set(i, a[i]) {
                        if b == a[i] {
                            continue;
                        }
                        let zb = ChainState::diagonal(with_player(&a, i, b));
                        let path = min_resistance_between(&game, &za, &zb, kappa).unwrap();
                        let straight =
                            straight_route_resistance(&game, &za, &zb, kappa).unwrap();
                        assert!(straight >= 1.0 && straight < 1.5);
                        assert!(
                            (path - straight).abs() < 1e-12,
                            "path {path} vs straight {straight}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dijkstra_agrees_with_floyd_warshall() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let space = random_space(&mut rng, 2, 3, 3, 0.3);
        let game = random_marginal_game(&mut rng, &space, false)
            .scale_to_assumption3()
            .0
            .to_definition();
        let model = TransitionModel::build(&game, 0.5, 0.3).unwrap();
        let n = model.pairs().len();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        for v in 0..n {
            dist[v][v] = 0.0;
            for t in model.row(v) {
                dist[v][t.to] = dist[v][t.to].min(t.resistance);
            }
        }
        for k in 0..n {
            for i in 0..n {
                if dist[i][k].is_finite() {
                    for j in 0..n {
                        let via = dist[i][k] + dist[k][j];
                        if via < dist[i][j] {
                            dist[i][j] = via;
                        }
                    }
                }
            }
        }
        for v in (0..n).step_by(7) {
            let d = resistance_distances(&model, v);
            for w in 0..n {
                assert!(
                    (d[w] - dist[v][w]).abs() < 1e-12
                        || (d[w].is_infinite() && dist[v][w].is_infinite()),
                    "source {v} target {w}: dijkstra {} vs fw {}",
                    d[w],
                    dist[v][w]
                );
            }
        }
    }

    #[test]
    fn distant_states_pay_at_least_two_explorations() {
        // Single sensor on a 5-ring: hops 0 -> 2 need two legs.
        let sets: Vec<Vec<usize>> = (0..5)
            .map(|a| vec![(a + 4) % 5, a, (a + 1) % 5])
            .collect();
        let space = ActionSpace::new(vec![sets]);
        let game = TableGame::from_welfare(space, vec![0.2; 5], None)
            .unwrap()
            .to_definition();
        let r = min_resistance_between(&game, &diag(vec![0]), &diag(vec![2]), 0.3).unwrap();
        assert_eq!(r, 2.0);
    }
}
