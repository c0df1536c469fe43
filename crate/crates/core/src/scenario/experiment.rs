//! Running a compiled scenario: the learner draws utilities from the
//! message-passing exchange (not from a centralized table), the scene
//! mutates at event boundaries, and the outcome is summarized per regime.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::comms::{round_exchange, CommGraph};
use crate::env::objective::SceneObjective;
use crate::error::Result;
use crate::game::definition::GlobalObjective;
use crate::game::JointAction;
use crate::learner::{run, RoundEvaluation, RoundOracle, RunLog};

use super::config::CompiledScenario;

/// Round oracle that reproduces the deployed loop: advance the scene to the
/// round, broadcast per-region reward tables, and let each sensor assemble
/// its own utility from neighbor messages.
pub struct ExchangeOracle {
    objective: Arc<SceneObjective>,
    graph: CommGraph,
}

impl ExchangeOracle {
    pub fn new(objective: Arc<SceneObjective>, graph: CommGraph) -> ExchangeOracle {
        ExchangeOracle { objective, graph }
    }

    pub fn objective(&self) -> &Arc<SceneObjective> {
        &self.objective
    }
}

impl RoundOracle for ExchangeOracle {
    fn players(&self) -> usize {
        self.graph.players()
    }

    fn evaluate(&self, round: u64, action: &JointAction) -> Result<RoundEvaluation> {
        self.objective.advance_scene(round);
        let tables = self.objective.wij_tables(action)?;
        let utilities = round_exchange(&tables, &self.graph, self.objective.config())?;
        Ok(RoundEvaluation {
            utilities,
            welfare: Some(self.objective.value(action)),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegimeSummary {
    /// First round of the window (0 for the opening regime, otherwise the
    /// event round).
    pub start: u64,
    /// One past the last round of the window.
    pub end: u64,
    pub mean_w: f64,
    /// Mean over the final quarter of the window, where the learner has had
    /// time to settle after the boundary.
    pub final_quarter_mean_w: f64,
    pub best_w: f64,
    pub best_action: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub rounds: u64,
    pub seed: u64,
    pub scale: f64,
    pub config_digest: String,
    pub regimes: Vec<RegimeSummary>,
    pub best_w: f64,
    pub best_action: Vec<usize>,
    /// Fraction of the final 10% of rounds spent exactly at the best
    /// joint action seen anywhere in the run.
    pub best_action_tail_occupancy: f64,
}

impl Summary {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "rounds: {}", self.rounds);
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "reward scale: {:.11e}", self.scale);
        let _ = writeln!(out, "config digest: {}", self.config_digest);
        for (k, r) in self.regimes.iter().enumerate() {
            let _ = writeln!(
                out,
                "regime {k} [{}, {}): mean W {:.6} | final-quarter mean W {:.6} | best W {:.6} at {:?}",
                r.start, r.end, r.mean_w, r.final_quarter_mean_w, r.best_w, r.best_action
            );
        }
        let _ = writeln!(
            out,
            "best W overall: {:.6} at {:?}",
            self.best_w, self.best_action
        );
        let _ = writeln!(
            out,
            "occupancy of that action over the final 10% of rounds: {:.4}",
            self.best_action_tail_occupancy
        );
        out
    }
}

pub struct ExperimentOutcome {
    pub log: RunLog,
    pub summary: Summary,
}

/// Runs the learner for the configured number of rounds and summarizes the
/// welfare trace per inter-event window. The scene is reset first, so
/// repeated calls on one compiled scenario are independent.
pub fn run_experiment(scenario: &CompiledScenario, seed: u64) -> Result<ExperimentOutcome> {
    scenario.objective.reset_scene();
    let oracle = ExchangeOracle::new(scenario.objective.clone(), scenario.graph.clone());
    let log = run(
        &scenario.space,
        &oracle,
        scenario.params.clone(),
        seed,
        scenario.rounds,
    )?;
    let summary = summarize(scenario, &log, seed);
    Ok(ExperimentOutcome { log, summary })
}

fn summarize(scenario: &CompiledScenario, log: &RunLog, seed: u64) -> Summary {
    let rounds = log.records.len() as u64;
    let mut boundaries: Vec<u64> = scenario
        .config
        .events
        .iter()
        .map(|e| e.round)
        .filter(|&r| r < rounds)
        .collect();
    boundaries.sort_unstable();
    boundaries.dedup();

    let mut regimes = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0u64;
    for end in boundaries.into_iter().chain([rounds]) {
        if end > start {
            regimes.push(window_summary(log, start, end));
            start = end;
        }
    }

    let (best_w, best_action) = regimes
        .iter()
        .map(|r| (r.best_w, r.best_action.clone()))
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, cur| {
            if cur.0 > acc.0 {
                cur
            } else {
                acc
            }
        });
    let tail_window = ((rounds as usize) / 10).max(1);
    let best_action_tail_occupancy =
        log.tail_occupancy(&JointAction(best_action.clone()), tail_window);

    Summary {
        rounds,
        seed,
        scale: scenario.scale,
        config_digest: scenario.digest.clone(),
        regimes,
        best_w,
        best_action,
        best_action_tail_occupancy,
    }
}

fn window_summary(log: &RunLog, start: u64, end: u64) -> RegimeSummary {
    let slice = &log.records[start as usize..end as usize];
    let mean = |rows: &[crate::learner::RoundRecord]| {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.welfare).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let quarter = (slice.len() - slice.len() / 4).min(slice.len().saturating_sub(1));
    let (mut best_w, mut best_action) = (f64::NEG_INFINITY, Vec::new());
    for r in slice {
        if let Some(w) = r.welfare {
            if w > best_w {
                best_w = w;
                best_action = r.action.0.clone();
            }
        }
    }
    RegimeSummary {
        start,
        end,
        mean_w: mean(slice),
        final_quarter_mean_w: mean(&slice[quarter..]),
        best_w,
        best_action,
    }
}
