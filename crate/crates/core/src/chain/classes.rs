//! Recurrent communication classes of the unperturbed process P⁰.
//!
//! At ε = 0 each sensor's move is forced: keep the latest action if it did
//! not lose payoff, otherwise return to the remembered one (standing still
//! counts as keeping). The recurrent classes are the closed strongly
//! connected components of that support graph; for marginal-contribution
//! games they collapse to the settled states (a, a).

use crate::error::Result;
use crate::game::GameDefinition;

use super::state::{ChainState, PairSpace};
use super::transition::{row_targets, utility_grid};

/// Closed communication classes of P⁰, each a sorted list of states,
/// ordered by their smallest member.
pub fn recurrent_classes(game: &GameDefinition) -> Result<Vec<Vec<ChainState>>> {
    let pairs = PairSpace::enumerate(game.space())?;
    let classes = recurrent_indices(&pairs, game);
    Ok(classes
        .into_iter()
        .map(|c| c.into_iter().map(|i| pairs.state(i)).collect())
        .collect())
}

/// Index form of [`recurrent_classes`] against an existing enumeration.
pub(super) fn recurrent_indices(pairs: &PairSpace, game: &GameDefinition) -> Vec<Vec<usize>> {
    let grid = utility_grid(game);
    let succ: Vec<Vec<usize>> = (0..pairs.len())
        .map(|from| {
            row_targets(pairs, &grid, from, 0.0, 0.0)
                .into_iter()
                .map(|t| t.to)
                .collect()
        })
        .collect();
    let component = strongly_connected(&succ);
    let count = component.iter().copied().max().map_or(0, |m| m + 1);

    let mut closed = vec![true; count];
    for (v, targets) in succ.iter().enumerate() {
        for &w in targets {
            if component[w] != component[v] {
                closed[component[v]] = false;
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &c) in component.iter().enumerate() {
        if closed[c] {
            classes[c].push(v);
        }
    }
    let mut out: Vec<Vec<usize>> = classes.into_iter().filter(|c| !c.is_empty()).collect();
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Iterative Tarjan; returns the component id of every node. Ids are
/// assigned in completion order, which callers must not rely on.
pub(super) fn strongly_connected(succ: &[Vec<usize>]) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNSET; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components = 0usize;

    // Work items: (node, next child position).
    let mut work: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        work.push((root, 0));
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            if *child == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = succ[v].get(*child) {
                *child += 1;
                if index[w] == UNSET {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    component[w] = components;
                    if w == v {
                        break;
                    }
                }
                components += 1;
            }
        }
    }
    component
}
