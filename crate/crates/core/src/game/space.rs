//! Per-player action sets and the feasibility structure linking successive
//! actions. Each player's constraint map doubles as an undirected graph whose
//! connectivity and degree properties the rest of the crate relies on.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One action per player, indexed by player order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JointAction(pub Vec<usize>);

impl JointAction {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for JointAction {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl fmt::Debug for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{:?}", self.0)
    }
}

/// A violation found while checking the constraint-map assumptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceViolation {
    /// `b` is reachable from `a` but not vice versa.
    Asymmetric { player: usize, from: usize, to: usize },
    /// An action references itself or a peer outside `0..action_count`.
    OutOfRange { player: usize, from: usize, to: usize },
    /// The action is missing from its own constraint set.
    MissingSelf { player: usize, action: usize },
    /// Fewer than three feasible successors (counting the action itself).
    TooFewOptions {
        player: usize,
        action: usize,
        count: usize,
    },
    /// The constraint graph splits into more than one component.
    Disconnected {
        player: usize,
        reachable: usize,
        total: usize,
    },
}

impl fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceViolation::Asymmetric { player, from, to } => write!(
                f,
                "player {player}: action {to} is reachable from {from} but {from} is not reachable from {to}"
            ),
            SpaceViolation::OutOfRange { player, from, to } => write!(
                f,
                "player {player}: action {from} references out-of-range action {to}"
            ),
            SpaceViolation::MissingSelf { player, action } => write!(
                f,
                "player {player}: action {action} is not contained in its own constraint set"
            ),
            SpaceViolation::TooFewOptions {
                player,
                action,
                count,
            } => write!(
                f,
                "player {player}: action {action} offers {count} feasible options, need at least 3"
            ),
            SpaceViolation::Disconnected {
                player,
                reachable,
                total,
            } => write!(
                f,
                "player {player}: constraint graph is disconnected ({reachable} of {total} actions reachable from action 0)"
            ),
        }
    }
}

/// Action sets plus the per-action constraint sets `C_i(a)`.
///
/// Stored as `constraints[player][action] -> sorted feasible actions`,
/// always including the action itself (staying put is feasible).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    constraints: Vec<Vec<Vec<usize>>>,
}

impl ActionSpace {
    /// Builds a space from raw constraint sets. Entries are sorted and
    /// deduplicated; validity is checked separately via [`validate`].
    ///
    /// [`validate`]: ActionSpace::validate
    pub fn new(mut constraints: Vec<Vec<Vec<usize>>>) -> Self {
        for player in &mut constraints {
            for set in player.iter_mut() {
                set.sort_unstable();
                set.dedup();
            }
        }
        ActionSpace { constraints }
    }

    /// Complete constraint graph: every action reachable from every other.
    pub fn complete(action_counts: &[usize]) -> Self {
        let constraints = action_counts
            .iter()
            .map(|&n| {
                let all: Vec<usize> = (0..n).collect();
                vec![all; n]
            })
            .collect();
        ActionSpace { constraints }
    }

    pub fn players(&self) -> usize {
        self.constraints.len()
    }

    pub fn action_count(&self, player: usize) -> usize {
        self.constraints[player].len()
    }

    /// `C_i(a)`, sorted ascending.
    pub fn constraint_set(&self, player: usize, action: usize) -> &[usize] {
        &self.constraints[player][action]
    }

    /// Largest `|C_i(a)|` over all players and actions.
    pub fn max_constraint_size(&self) -> usize {
        self.constraints
            .iter()
            .flat_map(|p| p.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Number of joint actions, `None` on overflow.
    pub fn joint_count(&self) -> Option<u128> {
        self.constraints
            .iter()
            .try_fold(1u128, |acc, p| acc.checked_mul(p.len() as u128))
    }

    /// Mixed-radix rank of a joint action; the last player varies fastest.
    pub fn rank(&self, a: &JointAction) -> usize {
        debug_assert_eq!(a.len(), self.players());
        let mut r = 0usize;
        for (i, &ai) in a.0.iter().enumerate() {
            debug_assert!(ai < self.action_count(i));
            r = r * self.action_count(i) + ai;
        }
        r
    }

    pub fn unrank(&self, mut rank: usize) -> JointAction {
        let n = self.players();
        let mut out = vec![0usize; n];
        for i in (0..n).rev() {
            let c = self.action_count(i);
            out[i] = rank % c;
            rank /= c;
        }
        JointAction(out)
    }

    /// Iterates every joint action in rank order. Callers must apply their
    /// own size guard first.
    pub fn joint_actions(&self) -> impl Iterator<Item = JointAction> + '_ {
        let total = self
            .joint_count()
            .expect("joint space overflows usize")
            .min(usize::MAX as u128) as usize;
        (0..total).map(move |r| self.unrank(r))
    }

    /// Checks symmetry, self-membership, connectivity, and the three-option
    /// minimum. All violations are collected rather than short-circuited.
    pub fn validate(&self) -> Vec<SpaceViolation> {
        let mut out = Vec::new();
        for (player, sets) in self.constraints.iter().enumerate() {
            let n = sets.len();
            for (from, set) in sets.iter().enumerate() {
                for &to in set {
                    if to >= n {
                        out.push(SpaceViolation::OutOfRange { player, from, to });
                    } else if !sets[to].contains(&from) {
                        out.push(SpaceViolation::Asymmetric { player, from, to });
                    }
                }
                if !set.contains(&from) {
                    out.push(SpaceViolation::MissingSelf {
                        player,
                        action: from,
                    });
                }
                if set.len() < 3 {
                    out.push(SpaceViolation::TooFewOptions {
                        player,
                        action: from,
                        count: set.len(),
                    });
                }
            }
            if n > 0 {
                let reachable = self.bfs_distances(player, 0).iter().filter(|d| d.is_some()).count();
                if reachable < n {
                    out.push(SpaceViolation::Disconnected {
                        player,
                        reachable,
                        total: n,
                    });
                }
            }
        }
        out
    }

    fn bfs_distances(&self, player: usize, start: usize) -> Vec<Option<usize>> {
        let sets = &self.constraints[player];
        let mut dist = vec![None; sets.len()];
        let mut queue = VecDeque::new();
        dist[start] = Some(0);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &sets[v] {
                if w != v && w < sets.len() && dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Constraint-graph diameter per player and the overall maximum `D`.
    ///
    /// Transition steps follow `C_i(a) \ {a}`; a player with a single action
    /// or a disconnected graph has no defined diameter.
    pub fn diameters(&self) -> Result<(usize, Vec<usize>)> {
        let mut per_player = Vec::with_capacity(self.players());
        for player in 0..self.players() {
            let n = self.action_count(player);
            if n < 2 {
                return Err(Error::InvalidActionSpace(format!(
                    "player {player} has {n} action(s); diameter undefined"
                )));
            }
            let mut diameter = 0usize;
            for start in 0..n {
                for (to, d) in self.bfs_distances(player, start).iter().enumerate() {
                    match d {
                        Some(d) => diameter = diameter.max(*d),
                        None => {
                            let _ = to;
                            return Err(Error::DisconnectedConstraints { player });
                        }
                    }
                }
            }
            per_player.push(diameter);
        }
        let overall = per_player.iter().copied().max().unwrap_or(0);
        Ok((overall, per_player))
    }
}
