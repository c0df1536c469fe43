//! Dense table-backed games. These are the workhorse for chain analysis and
//! for reducing sensor scenarios to something exhaustively checkable.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::definition::{
    GameDefinition, GlobalObjective, UtilityOracle, JOINT_ENUMERATION_LIMIT, SCALING_MARGIN,
};
use crate::game::space::{ActionSpace, JointAction};

/// A game with utilities stored densely per joint action. `phi` holds the
/// welfare table when known, and `baselines[i]` the null-participation
/// welfare over the co-players' joint actions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableGame {
    space: ActionSpace,
    utilities: Vec<Vec<f64>>,
    phi: Option<Vec<f64>>,
    baselines: Option<Vec<Vec<f64>>>,
}

impl TableGame {
    /// Builds a marginal-contribution game from a welfare table and optional
    /// per-player baselines (defaulting to zero).
    pub fn from_welfare(
        space: ActionSpace,
        phi: Vec<f64>,
        baselines: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let total = checked_total(&space)?;
        if phi.len() != total {
            return Err(Error::BadParameter(format!(
                "welfare table has {} entries, expected {}",
                phi.len(),
                total
            )));
        }
        let n = space.players();
        if let Some(b) = &baselines {
            if b.len() != n {
                return Err(Error::BadParameter(format!(
                    "expected {} baseline tables, got {}",
                    n,
                    b.len()
                )));
            }
            for (i, t) in b.iter().enumerate() {
                let expect = total / space.action_count(i).max(1);
                if t.len() != expect {
                    return Err(Error::BadParameter(format!(
                        "baseline table for player {i} has {} entries, expected {expect}",
                        t.len()
                    )));
                }
            }
        }
        let mut utilities = vec![vec![0.0; total]; n];
        for rank in 0..total {
            let a = space.unrank(rank);
            for i in 0..n {
                let base = match &baselines {
                    Some(b) => b[i][rank_without(&space, i, &a)],
                    None => 0.0,
                };
                utilities[i][rank] = phi[rank] - base;
            }
        }
        Ok(TableGame {
            space,
            utilities,
            phi: Some(phi),
            baselines,
        })
    }

    /// Materializes any game definition into tables. Welfare is copied when
    /// the definition carries its objective.
    pub fn from_definition(def: &GameDefinition, limit: u128) -> Result<Self> {
        let size = def.space().joint_count().unwrap_or(u128::MAX);
        if size > limit {
            return Err(Error::SizeGuard {
                what: "table reduction",
                size,
                limit,
            });
        }
        let space = def.space().clone();
        let total = size as usize;
        let n = space.players();
        let mut utilities = vec![vec![0.0; total]; n];
        let mut phi = def.objective().map(|_| vec![0.0; total]);
        for rank in 0..total {
            let a = space.unrank(rank);
            for (i, table) in utilities.iter_mut().enumerate() {
                table[rank] = def.utility(i, &a);
            }
            if let Some(phi) = &mut phi {
                phi[rank] = def.global(&a).unwrap();
            }
        }
        Ok(TableGame {
            space,
            utilities,
            phi,
            baselines: None,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn players(&self) -> usize {
        self.space.players()
    }

    pub fn utility_at(&self, player: usize, rank: usize) -> f64 {
        self.utilities[player][rank]
    }

    pub fn utility(&self, player: usize, a: &JointAction) -> f64 {
        self.utilities[player][self.space.rank(a)]
    }

    pub fn phi(&self) -> Option<&[f64]> {
        self.phi.as_deref()
    }

    pub fn phi_at(&self, rank: usize) -> Option<f64> {
        self.phi.as_ref().map(|t| t[rank])
    }

    /// Ranks of the joint actions maximizing the welfare table, with exact
    /// float ties all included.
    pub fn argmax_phi(&self) -> Option<Vec<usize>> {
        let phi = self.phi.as_ref()?;
        let best = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(
            phi.iter()
                .enumerate()
                .filter(|(_, &v)| v == best)
                .map(|(r, _)| r)
                .collect(),
        )
    }

    /// Largest `|ΔU|` over every feasible unilateral deviation.
    pub fn max_unilateral_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for rank in 0..self.utilities[0].len() {
            let a = self.space.unrank(rank);
            for i in 0..self.players() {
                let here = self.utilities[i][rank];
                for &b in self.space.constraint_set(i, a[i]) {
                    if b == a[i] {
                        continue;
                    }
                    let mut moved = a.clone();
                    moved.0[i] = b;
                    let there = self.utilities[i][self.space.rank(&moved)];
                    worst = worst.max((there - here).abs());
                }
            }
        }
        worst
    }

    /// Multiplies every table by `factor`.
    pub fn scale(&self, factor: f64) -> TableGame {
        TableGame {
            space: self.space.clone(),
            utilities: self
                .utilities
                .iter()
                .map(|t| t.iter().map(|v| v * factor).collect())
                .collect(),
            phi: self
                .phi
                .as_ref()
                .map(|t| t.iter().map(|v| v * factor).collect()),
            baselines: self
                .baselines
                .as_ref()
                .map(|bs| {
                    bs.iter()
                        .map(|t| t.iter().map(|v| v * factor).collect())
                        .collect()
                }),
        }
    }

    /// Table analogue of [`GameDefinition::scale_to_assumption3`].
    pub fn scale_to_assumption3(&self) -> (TableGame, f64) {
        let ceiling = 0.5 - SCALING_MARGIN;
        let worst = self.max_unilateral_deviation();
        let factor = if worst <= ceiling { 1.0 } else { ceiling / worst };
        if factor == 1.0 {
            (self.clone(), 1.0)
        } else {
            (self.scale(factor), factor)
        }
    }

    /// Wraps the tables in a [`GameDefinition`]; the objective is attached
    /// when both welfare and baselines are stored.
    pub fn to_definition(&self) -> GameDefinition {
        let shared = Arc::new(self.clone());
        if shared.phi.is_some() && shared.baselines.is_some() {
            GameDefinition::from_objective(self.space.clone(), shared)
        } else {
            GameDefinition::new(self.space.clone(), shared)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::BadParameter(format!("serialize game: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let game: TableGame = serde_json::from_str(&text)
            .map_err(|e| Error::BadParameter(format!("parse game file: {e}")))?;
        checked_total(&game.space)?;
        Ok(game)
    }
}

impl UtilityOracle for TableGame {
    fn utility(&self, player: usize, action: &JointAction) -> f64 {
        TableGame::utility(self, player, action)
    }
}

impl GlobalObjective for TableGame {
    fn value(&self, action: &JointAction) -> f64 {
        self.phi.as_ref().expect("welfare table missing")[self.space.rank(action)]
    }

    fn value_without(&self, player: usize, action: &JointAction) -> f64 {
        match &self.baselines {
            Some(b) => b[player][rank_without(&self.space, player, action)],
            None => 0.0,
        }
    }

    fn deviation_bound(&self) -> Option<f64> {
        let phi = self.phi.as_ref()?;
        let max = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
        Some(max - min)
    }
}

fn checked_total(space: &ActionSpace) -> Result<usize> {
    let size = space.joint_count().unwrap_or(u128::MAX);
    if size > JOINT_ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            what: "dense game table",
            size,
            limit: JOINT_ENUMERATION_LIMIT,
        });
    }
    Ok(size as usize)
}

/// Mixed-radix rank of `a` restricted to all players except `skip`.
pub fn rank_without(space: &ActionSpace, skip: usize, a: &JointAction) -> usize {
    let mut r = 0usize;
    for i in 0..space.players() {
        if i == skip {
            continue;
        }
        r = r * space.action_count(i) + a[i];
    }
    r
}
