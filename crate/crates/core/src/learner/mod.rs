//! Payoff-based learning with two-round memory and reluctant returns.
//!
//! Sensors never see the objective or each other's payoffs; they react
//! only to their own payoff history. The exploration rate can follow the
//! diminishing schedule `k^(-1/(n(D+1)))` or stay constant.

pub mod params;
pub mod run;
pub mod select;

pub use params::{epsilon_schedule, kappa_bounds, EpsilonMode, KappaBounds, LearnerParams};
pub use run::{run, Learner, RoundEvaluation, RoundOracle, RoundRecord, RunLog, RunMeta};
pub use select::{branch_probabilities, select_action, Branch, BranchProbabilities, SensorMemory};

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::error::Error;
    use crate::game::gen::{random_marginal_game, random_space};
    use crate::game::{ActionSpace, JointAction, TableGame};

    use super::*;

    fn small_game(seed: u64) -> TableGame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 3, 3, 4, 0.3);
        random_marginal_game(&mut rng, &space, true)
    }

    /// Every logged round must be reachable from its predecessor under the
    /// decision rule: each sensor either keeps its previous action or moves
    /// inside that action's constraint set; moves after a payoff drop may
    /// also land on the action before last.
    fn assert_transitions_legal(space: &ActionSpace, log: &RunLog) {
        for w in log.records.windows(2) {
            let (before, after) = (&w[0], &w[1]);
            if after.round < 2 {
                // Seeding rounds repeat the initial draw verbatim.
                assert_eq!(before.action, after.action);
                continue;
            }
            for i in 0..space.players() {
                let from = before.action[i];
                let to = after.action[i];
                assert!(
                    space.constraint_set(i, from).contains(&to),
                    "round {}: sensor {i} jumped {from} -> {to} outside its constraint set",
                    after.round
                );
                match after.branches[i] {
                    Branch::Init => panic!("init branch after round 1"),
                    Branch::Exploit | Branch::Irrational => {}
                    Branch::Explore => {
                        assert_ne!(to, from, "exploration must leave the current action");
                    }
                }
            }
        }
    }

    #[test]
    fn two_seeding_rounds_duplicate_the_start() {
        let game = small_game(7);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.1),
            kappa: 0.3,
        };
        let log = run(game.space(), &game, params, 42, 2).unwrap();
        assert_eq!(log.records.len(), 2);
        assert_eq!(log.records[0].action, log.records[1].action);
        assert_eq!(log.records[0].utilities, log.records[1].utilities);
        assert_eq!(log.records[0].epsilon, 1.0);
        assert!(log.records[1]
            .branches
            .iter()
            .all(|b| *b == Branch::Init));
        for i in 0..game.space().players() {
            let a = log.records[0].action[i];
            assert!(a < game.space().action_count(i));
        }
    }

    #[test]
    fn runs_shorter_than_the_seeding_are_rejected() {
        let game = small_game(7);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.1),
            kappa: 0.3,
        };
        match run(game.space(), &game, params, 42, 1) {
            Err(Error::BadParameter(_)) => {}
            other => panic!("expected BadParameter, got {other:?}"),
        }
    }

    #[test]
    fn same_seed_reproduces_the_log_bit_for_bit() {
        let game = small_game(11);
        let params = LearnerParams {
            mode: EpsilonMode::Schedule {
                players: 3,
                diameter: game.space().diameters().unwrap().0,
            },
            kappa: 0.2,
        };
        let a = run(game.space(), &game, params.clone(), 5, 300).unwrap();
        let b = run(game.space(), &game, params.clone(), 5, 300).unwrap();
        assert_eq!(a, b);
        let c = run(game.space(), &game, params, 6, 300).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn logged_transitions_stay_inside_the_constraints() {
        let game = small_game(13);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.4),
            kappa: 0.45,
        };
        let log = run(game.space(), &game, params, 99, 2000).unwrap();
        assert_transitions_legal(game.space(), &log);
        // With epsilon 0.4 over 2000 rounds every branch should appear.
        let mut seen = [false; 3];
        for r in &log.records[2..] {
            for b in &r.branches {
                match b {
                    Branch::Explore => seen[0] = true,
                    Branch::Exploit => seen[1] = true,
                    Branch::Irrational => seen[2] = true,
                    Branch::Init => unreachable!(),
                }
            }
        }
        assert!(seen.iter().all(|s| *s), "branches seen: {seen:?}");
    }

    #[test]
    fn vanishing_exploration_freezes_the_run() {
        let game = small_game(17);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(1e-12),
            kappa: 0.0,
        };
        let log = run(game.space(), &game, params, 3, 200).unwrap();
        // After at most one settling move the joint action must stop
        // changing: no exploration, no stubborn stays, so each sensor
        // either keeps improving in a 3-player game (impossible forever)
        // or repeats. Check the tail is constant.
        let tail = &log.records[20..];
        let fixed = &tail[0].action;
        assert!(tail.iter().all(|r| &r.action == fixed));
    }

    #[test]
    fn oracle_errors_leave_the_learner_resumable() {
        use std::sync::atomic::{AtomicBool, Ordering};

        struct Flaky<'a> {
            inner: &'a TableGame,
            fail_at: u64,
            tripped: AtomicBool,
        }
        impl RoundOracle for Flaky<'_> {
            fn players(&self) -> usize {
                self.inner.players()
            }
            fn evaluate(&self, round: u64, a: &JointAction) -> crate::error::Result<RoundEvaluation> {
                if round == self.fail_at && !self.tripped.swap(true, Ordering::Relaxed) {
                    return Err(Error::ZeroRound);
                }
                self.inner.evaluate(round, a)
            }
        }

        let game = small_game(23);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.3),
            kappa: 0.2,
        };
        // Clean reference run.
        let reference = run(game.space(), &game, params.clone(), 77, 50).unwrap();

        // Same run, but the oracle fails once at round 10. Retrying the
        // step must then produce the identical remainder, because the
        // failed step restored the RNG streams before returning.
        let flaky = Flaky {
            inner: &game,
            fail_at: 10,
            tripped: AtomicBool::new(false),
        };
        let mut learner = Learner::new(game.space(), &flaky, params, 77).unwrap();
        let mut failures = 0;
        while learner.log().rounds() < 50 {
            if learner.step().is_err() {
                failures += 1;
                assert_eq!(learner.log().rounds(), 10);
                assert!(failures <= 1, "step must not fail twice");
            }
        }
        assert_eq!(failures, 1);
        assert_eq!(learner.into_log().records, reference.records);
    }

    #[test]
    fn tail_occupancy_counts_exact_matches() {
        let game = small_game(29);
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.05),
            kappa: 0.1,
        };
        let log = run(game.space(), &game, params, 1, 400).unwrap();
        let last = log.records.last().unwrap().action.clone();
        let occ = log.tail_occupancy(&last, 1);
        assert_eq!(occ, 1.0);
        let occ_all = log.tail_occupancy(&last, 400);
        assert!((0.0..=1.0).contains(&occ_all));
        // Manual recount over the final 40 records.
        let manual = log.records[360..]
            .iter()
            .filter(|r| r.action == last)
            .count() as f64
            / 40.0;
        assert_eq!(log.tail_occupancy(&last, 40), manual);
    }

    /// Frozen five-round trace: guards the exact draw order (per-sensor
    /// streams, exploration first, then the stay/return draw) against
    /// accidental reshuffling. Regenerate deliberately if the RNG layout
    /// ever changes on purpose.
    #[test]
    fn frozen_trace_is_stable() {
        let space = ActionSpace::complete(&[3, 3, 3]);
        let phi: Vec<f64> = (0..27)
            .map(|r| {
                let a = space.unrank(r);
                // Smooth ridge with a unique peak at (2, 1, 0).
                let score = |x: usize, t: usize| 1.0 - 0.3 * (x as f64 - t as f64).abs();
                score(a[0], 2) + score(a[1], 1) + score(a[2], 0)
            })
            .collect();
        let baselines = vec![vec![0.0; 9]; 3];
        let game = TableGame::from_welfare(space, phi, Some(baselines)).unwrap();
        let params = LearnerParams {
            mode: EpsilonMode::Constant(0.25),
            kappa: 0.3,
        };
        let log = run(game.space(), &game, params, 2024, 7).unwrap();
        let actions: Vec<Vec<usize>> = log.records.iter().map(|r| r.action.0.clone()).collect();
        assert_eq!(
            actions,
            vec![
                vec![0, 1, 1],
                vec![0, 1, 1],
                vec![0, 1, 0],
                vec![2, 1, 0],
                vec![2, 1, 0],
                vec![2, 1, 0],
                vec![2, 1, 0],
            ]
        );
    }
}
