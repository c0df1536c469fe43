//! Round loop: holds all sensors' memories, asks an oracle for payoffs,
//! and records everything needed to replay or audit a run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ActionSpace, GameDefinition, JointAction, TableGame};

use super::params::LearnerParams;
use super::select::{select_action, Branch, SensorMemory};

/// Payoffs of one round plus the welfare achieved, when the oracle knows it.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundEvaluation {
    pub utilities: Vec<f64>,
    /// Global objective at the joint action; `None` when the oracle only
    /// exposes individual payoffs.
    pub welfare: Option<f64>,
}

/// Supplies payoffs for the joint action executed in a round. The round
/// index lets scene-driven oracles apply scheduled changes first.
pub trait RoundOracle {
    fn players(&self) -> usize;
    fn evaluate(&self, round: u64, action: &JointAction) -> Result<RoundEvaluation>;
}

impl RoundOracle for TableGame {
    fn players(&self) -> usize {
        self.space().players()
    }

    fn evaluate(&self, _round: u64, action: &JointAction) -> Result<RoundEvaluation> {
        let utilities = (0..self.players())
            .map(|i| self.utility(i, action))
            .collect();
        Ok(RoundEvaluation {
            utilities,
            welfare: self.phi_at(self.space().rank(action)),
        })
    }
}

impl RoundOracle for GameDefinition {
    fn players(&self) -> usize {
        self.players()
    }

    fn evaluate(&self, _round: u64, action: &JointAction) -> Result<RoundEvaluation> {
        let utilities = (0..self.players())
            .map(|i| self.utility(i, action))
            .collect();
        Ok(RoundEvaluation {
            utilities,
            welfare: self.global(action),
        })
    }
}

/// One executed round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub epsilon: f64,
    pub action: JointAction,
    pub branches: Vec<Branch>,
    pub utilities: Vec<f64>,
    pub welfare: Option<f64>,
}

/// Run header kept alongside the per-round records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub players: usize,
    pub seed: u64,
    pub params: LearnerParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub meta: RunMeta,
    pub records: Vec<RoundRecord>,
}

impl RunLog {
    pub fn rounds(&self) -> u64 {
        self.records.len() as u64
    }

    /// Fraction of the final `window` rounds spent exactly at `target`.
    pub fn tail_occupancy(&self, target: &JointAction, window: usize) -> f64 {
        let n = self.records.len();
        let window = window.min(n);
        if window == 0 {
            return 0.0;
        }
        let hits = self.records[n - window..]
            .iter()
            .filter(|r| &r.action == target)
            .count();
        hits as f64 / window as f64
    }
}

/// Incremental runner. Sensors draw from independent, per-sensor RNG
/// streams so one sensor's draws never perturb another's, regardless of
/// evaluation order or branch structure.
pub struct Learner<'a, O: RoundOracle + ?Sized> {
    space: &'a ActionSpace,
    oracle: &'a O,
    params: LearnerParams,
    memories: Vec<SensorMemory>,
    rngs: Vec<ChaCha8Rng>,
    /// Rounds executed so far (also the next record's index).
    round: u64,
    log: RunLog,
}

impl<'a, O: RoundOracle + ?Sized> Learner<'a, O> {
    /// Seeds every sensor with one uniformly random feasible action and
    /// runs it twice (the memory needs two rounds of history before the
    /// decision rule applies). Both seeding rounds hit the oracle, so the
    /// log starts with two identical records.
    pub fn new(
        space: &'a ActionSpace,
        oracle: &'a O,
        params: LearnerParams,
        seed: u64,
    ) -> Result<Self> {
        if oracle.players() != space.players() {
            return Err(Error::BadParameter(format!(
                "oracle serves {} players, action space has {}",
                oracle.players(),
                space.players()
            )));
        }
        params.validate()?;
        let mut rngs: Vec<ChaCha8Rng> = (0..space.players())
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i as u64 + 1);
                r
            })
            .collect();
        let start = JointAction(
            (0..space.players())
                .map(|i| rngs[i].random_range(0..space.action_count(i)))
                .collect(),
        );
        let eval = oracle.evaluate(0, &start)?;
        let memories = (0..space.players())
            .map(|i| SensorMemory {
                last: start[i],
                prev: start[i],
                u_last: eval.utilities[i],
                u_prev: eval.utilities[i],
            })
            .collect();
        let branches = vec![Branch::Init; space.players()];
        let mut records = Vec::new();
        for round in 0..2 {
            records.push(RoundRecord {
                round,
                epsilon: 1.0,
                action: start.clone(),
                branches: branches.clone(),
                utilities: eval.utilities.clone(),
                welfare: eval.welfare,
            });
        }
        Ok(Learner {
            space,
            oracle,
            params: params.clone(),
            memories,
            rngs,
            round: 2,
            log: RunLog {
                meta: RunMeta {
                    players: space.players(),
                    seed,
                    params,
                },
                records,
            },
        })
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn into_log(self) -> RunLog {
        self.log
    }

    pub fn current(&self) -> JointAction {
        JointAction(self.memories.iter().map(|m| m.last).collect())
    }

    /// Executes one round. On oracle failure the learner state (memories
    /// and RNG streams) is left exactly as before the call.
    pub fn step(&mut self) -> Result<&RoundRecord> {
        let epsilon = self.params.epsilon_at(self.round)?;
        let rng_snapshot = self.rngs.clone();
        let mut action = Vec::with_capacity(self.memories.len());
        let mut branches = Vec::with_capacity(self.memories.len());
        for (i, m) in self.memories.iter().enumerate() {
            let options = self.space.constraint_set(i, m.last);
            let (a, b) = select_action(m, options, epsilon, self.params.kappa, &mut self.rngs[i]);
            action.push(a);
            branches.push(b);
        }
        let action = JointAction(action);
        let eval = match self.oracle.evaluate(self.round, &action) {
            Ok(e) => e,
            Err(e) => {
                self.rngs = rng_snapshot;
                return Err(e);
            }
        };
        for (i, m) in self.memories.iter_mut().enumerate() {
            m.prev = m.last;
            m.u_prev = m.u_last;
            m.last = action[i];
            m.u_last = eval.utilities[i];
        }
        self.log.records.push(RoundRecord {
            round: self.round,
            epsilon,
            action,
            branches,
            utilities: eval.utilities,
            welfare: eval.welfare,
        });
        self.round += 1;
        Ok(self.log.records.last().expect("record just pushed"))
    }
}

/// Runs a fresh learner for `rounds` total rounds (including the two
/// seeding rounds) and returns the full log.
pub fn run<O: RoundOracle + ?Sized>(
    space: &ActionSpace,
    oracle: &O,
    params: LearnerParams,
    seed: u64,
    rounds: u64,
) -> Result<RunLog> {
    if rounds < 2 {
        return Err(Error::BadParameter(format!(
            "a run needs at least the 2 seeding rounds, got {rounds}"
        )));
    }
    let mut learner = Learner::new(space, oracle, params, seed)?;
    for _ in 2..rounds {
        learner.step()?;
    }
    Ok(learner.into_log())
}
