//! The settled-state resistance graph and its minimal trees.
//!
//! Nodes are the settled states (a, a); the weight of l → l′ is the minimal
//! path resistance between them through the full pair space. The stochastic
//! potential of a node is the weight of the cheapest spanning tree directed
//! into it; the nodes minimizing that potential are exactly the states that
//! keep probability mass as exploration vanishes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{GameDefinition, JointAction};

use super::arborescence::min_in_tree;
use super::routes::{resistance_distances, single_deviator};
use super::transition::TransitionModel;

/// Cap on the number of settled states for tree computations.
pub const DIAG_LIMIT: u128 = 10_000;

/// Stochastic potentials within this margin of the minimum count as tied.
pub const POTENTIAL_TIE_TOL: f64 = 1e-9;

/// One weighted edge between settled states. `straight` marks pairs one
/// constrained single-sensor hop apart, whose weight is realized by the
/// explore-then-settle route.
#[derive(Clone, Copy, Debug)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub straight: bool,
}

/// Complete weighted digraph over the settled states.
pub struct ResistanceGraph {
    actions: Vec<JointAction>,
    weights: Vec<Vec<f64>>,
    straight: Vec<Vec<bool>>,
}

impl ResistanceGraph {
    pub fn build(game: &GameDefinition, kappa: f64) -> Result<Self> {
        // Probabilities are irrelevant here; resistances do not depend on ε.
        let model = TransitionModel::build(game, 0.5, kappa)?;
        Self::from_model(&model)
    }

    pub fn from_model(model: &TransitionModel) -> Result<Self> {
        let pairs = model.pairs();
        let space = pairs.space();
        let n = pairs.joint_len();
        if n as u128 > DIAG_LIMIT {
            return Err(Error::SizeGuard {
                what: "resistance graph",
                size: n as u128,
                limit: DIAG_LIMIT,
            });
        }
        let actions: Vec<JointAction> = (0..n).map(|r| space.unrank(r)).collect();
        let diag = pairs.diag_states();
        let mut weights = vec![vec![f64::INFINITY; n]; n];
        let mut straight = vec![vec![false; n]; n];
        for from in 0..n {
            let dist = resistance_distances(model, diag[from]);
            for to in 0..n {
                if to != from {
                    weights[from][to] = dist[diag[to]];
                    straight[from][to] =
                        single_deviator(space, &actions[from], &actions[to]).is_some();
                }
            }
        }
        Ok(ResistanceGraph {
            actions,
            weights,
            straight,
        })
    }

    /// Number of settled states.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Settled-state actions in rank order; node i is `actions()[i]`.
    pub fn actions(&self) -> &[JointAction] {
        &self.actions
    }

    /// Minimal path resistance from node `from` to node `to`.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from][to]
    }

    /// Whether (from, to) is a single-sensor hop.
    pub fn is_straight(&self, from: usize, to: usize) -> bool {
        self.straight[from][to]
    }

    /// All finite edges, row by row.
    pub fn edges(&self) -> Vec<GraphEdge> {
        let mut out = Vec::new();
        for from in 0..self.len() {
            for to in 0..self.len() {
                if from != to && self.weights[from][to].is_finite() {
                    out.push(GraphEdge {
                        from,
                        to,
                        weight: self.weights[from][to],
                        straight: self.straight[from][to],
                    });
                }
            }
        }
        out
    }

    /// Cheapest spanning tree directed into `root`: total resistance plus
    /// the chosen `(from, to)` edges.
    pub fn minimal_tree(&self, root: usize) -> Option<(f64, Vec<(usize, usize)>)> {
        let edges: Vec<(usize, usize, f64)> = self
            .edges()
            .into_iter()
            .map(|e| (e.from, e.to, e.weight))
            .collect();
        min_in_tree(self.len(), &edges, root)
    }

    /// Stochastic potential of every settled state; infinite entries mean
    /// some state cannot reach that root at all.
    pub fn potentials(&self) -> Vec<f64> {
        (0..self.len())
            .map(|root| self.minimal_tree(root).map_or(f64::INFINITY, |(w, _)| w))
            .collect()
    }

    /// Nodes whose stochastic potential ties the minimum.
    pub fn stable_roots(&self) -> Vec<usize> {
        let pots = self.potentials();
        let best = pots.iter().copied().fold(f64::INFINITY, f64::min);
        pots.iter()
            .enumerate()
            .filter(|(_, &p)| p <= best + POTENTIAL_TIE_TOL)
            .map(|(i, _)| i)
            .collect()
    }

    /// Trivial graph text: `id label` lines, a `#` separator, then
    /// `from to weight tag` lines with tag `s` for single-hop edges and `d`
    /// otherwise.
    pub fn to_tgf(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.actions.iter().enumerate() {
            let _ = writeln!(out, "{i} {a:?}");
        }
        out.push_str("#\n");
        for e in self.edges() {
            let _ = writeln!(
                out,
                "{} {} {:.6} {}",
                e.from,
                e.to,
                e.weight,
                if e.straight { "s" } else { "d" }
            );
        }
        out
    }

    /// Same node section as [`to_tgf`], but only the given tree edges.
    ///
    /// [`to_tgf`]: ResistanceGraph::to_tgf
    pub fn tree_to_tgf(&self, edges: &[(usize, usize)]) -> String {
        let mut out = String::new();
        for (i, a) in self.actions.iter().enumerate() {
            let _ = writeln!(out, "{i} {a:?}");
        }
        out.push_str("#\n");
        for &(from, to) in edges {
            let _ = writeln!(out, "{from} {to} {:.6}", self.weights[from][to]);
        }
        out
    }
}

/// Stochastic potential of each settled state, in rank order.
pub fn stochastic_potentials(game: &GameDefinition, kappa: f64) -> Result<Vec<f64>> {
    Ok(ResistanceGraph::build(game, kappa)?.potentials())
}

/// The settled states with minimal stochastic potential (all ties reported).
/// For marginal-contribution games under the deviation ceiling these are
/// welfare maximizers.
pub fn stochastically_stable_states(
    game: &GameDefinition,
    kappa: f64,
) -> Result<Vec<JointAction>> {
    let graph = ResistanceGraph::build(game, kappa)?;
    Ok(graph
        .stable_roots()
        .into_iter()
        .map(|i| graph.actions[i].clone())
        .collect())
}
