//! Seeded generators for random games, used by the simulator's self-checks
//! and by benchmarks.

use rand::Rng;

use crate::game::space::ActionSpace;
use crate::game::table::TableGame;

/// Random symmetric connected constraint sets: a ring plus extra symmetric
/// edges with probability `extra_edge_prob`. Every set keeps at least three
/// options, so the result always validates.
pub fn random_space<R: Rng>(
    rng: &mut R,
    players: usize,
    actions_min: usize,
    actions_max: usize,
    extra_edge_prob: f64,
) -> ActionSpace {
    assert!(actions_min >= 3);
    let mut constraints = Vec::with_capacity(players);
    for _ in 0..players {
        let n = rng.random_range(actions_min..=actions_max);
        let mut sets: Vec<Vec<usize>> = (0..n)
            .map(|a| vec![(a + n - 1) % n, a, (a + 1) % n])
            .collect();
        for a in 0..n {
            for b in a + 1..n {
                if !sets[a].contains(&b) && rng.random_bool(extra_edge_prob) {
                    sets[a].push(b);
                    sets[b].push(a);
                }
            }
        }
        constraints.push(sets);
    }
    ActionSpace::new(constraints)
}

/// Random marginal-contribution game: welfare uniform on `[0, 1)` plus, when
/// requested, uniform null-participation baselines.
pub fn random_marginal_game<R: Rng>(
    rng: &mut R,
    space: &ActionSpace,
    with_baselines: bool,
) -> TableGame {
    let total = space.joint_count().unwrap() as usize;
    let phi: Vec<f64> = (0..total).map(|_| rng.random::<f64>()).collect();
    let baselines = with_baselines.then(|| {
        (0..space.players())
            .map(|i| {
                let rest = total / space.action_count(i);
                (0..rest).map(|_| rng.random::<f64>()).collect()
            })
            .collect()
    });
    TableGame::from_welfare(space.clone(), phi, baselines).unwrap()
}

/// Random welfare game rescaled to the deviation ceiling, for which the
/// rescaled welfare has a unique maximizer leading the runner-up by at
/// least `min_gap`. Draws until the gap filter passes.
pub fn random_separated_game<R: Rng>(
    rng: &mut R,
    space: &ActionSpace,
    min_gap: f64,
) -> TableGame {
    loop {
        let game = random_marginal_game(rng, space, false);
        let (scaled, _) = game.scale_to_assumption3();
        let phi = scaled.phi().unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &v in phi {
            if v > best {
                second = best;
                best = v;
            } else if v > second {
                second = v;
            }
        }
        if best - second >= min_gap {
            return scaled;
        }
    }
}
