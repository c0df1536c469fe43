//! Pair state space of the learning process: consecutive joint actions
//! (a, a') where each sensor's second action is reachable from its first.
//! Every exact computation downstream — transition rows, resistances,
//! recurrent classes, stationary solves — indexes against this enumeration.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::game::{ActionSpace, JointAction};

/// Hard cap on |B| for exhaustive chain work.
pub const CHAIN_STATE_LIMIT: u128 = 100_000;

/// One state of the pair process: previous and current joint action.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChainState {
    pub prev: JointAction,
    pub curr: JointAction,
}

impl ChainState {
    pub fn new(prev: JointAction, curr: JointAction) -> Self {
        ChainState { prev, curr }
    }

    /// The settled state (a, a).
    pub fn diagonal(a: JointAction) -> Self {
        ChainState {
            prev: a.clone(),
            curr: a,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.prev == self.curr
    }
}

impl fmt::Debug for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?} -> {:?})", self.prev, self.curr)
    }
}

/// Enumeration of B with constant-time lookups in both directions.
///
/// States are ordered first by the rank of the previous action, then by the
/// successor's position in the mixed-radix sweep of the constraint sets, so
/// the layout is deterministic and diagonal states are cheap to locate.
#[derive(Clone, Debug)]
pub struct PairSpace {
    space: ActionSpace,
    states: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    diag: Vec<usize>,
}

impl PairSpace {
    pub fn enumerate(space: &ActionSpace) -> Result<Self> {
        if space.players() == 0 {
            return Err(Error::InvalidActionSpace(
                "pair space needs at least one player".into(),
            ));
        }
        let joint = space.joint_count().unwrap_or(u128::MAX);
        if joint > CHAIN_STATE_LIMIT {
            return Err(Error::SizeGuard {
                what: "chain state space",
                size: joint,
                limit: CHAIN_STATE_LIMIT,
            });
        }
        let mut size: u128 = 0;
        for a in space.joint_actions() {
            let mut prod: u128 = 1;
            for i in 0..space.players() {
                prod *= space.constraint_set(i, a[i]).len() as u128;
            }
            size += prod;
            if size > CHAIN_STATE_LIMIT {
                return Err(Error::SizeGuard {
                    what: "chain state space",
                    size,
                    limit: CHAIN_STATE_LIMIT,
                });
            }
        }

        let mut states = Vec::with_capacity(size as usize);
        let mut index = HashMap::with_capacity(size as usize);
        for a in space.joint_actions() {
            let from = space.rank(&a);
            for_each_successor(space, &a, |b| {
                let key = (from, space.rank(b));
                index.insert(key, states.len());
                states.push(key);
            });
        }

        let mut diag = Vec::with_capacity(joint as usize);
        for r in 0..joint as usize {
            match index.get(&(r, r)) {
                Some(&i) => diag.push(i),
                None => {
                    return Err(Error::InvalidActionSpace(format!(
                        "action {:?} is missing from its own constraint set",
                        space.unrank(r)
                    )))
                }
            }
        }

        Ok(PairSpace {
            space: space.clone(),
            states,
            index,
            diag,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of joint actions, equal to the number of diagonal states.
    pub fn joint_len(&self) -> usize {
        self.diag.len()
    }

    pub fn state(&self, idx: usize) -> ChainState {
        let (p, c) = self.states[idx];
        ChainState::new(self.space.unrank(p), self.space.unrank(c))
    }

    /// Joint-action ranks `(rank(prev), rank(curr))` of a state.
    pub fn ranks(&self, idx: usize) -> (usize, usize) {
        self.states[idx]
    }

    pub fn index_of(&self, z: &ChainState) -> Result<usize> {
        if z.prev.len() != self.space.players() || z.curr.len() != self.space.players() {
            return Err(Error::BadChainState(format!(
                "{z:?} has the wrong number of players"
            )));
        }
        let key = (self.space.rank(&z.prev), self.space.rank(&z.curr));
        self.index
            .get(&key)
            .copied()
            .ok_or_else(|| Error::BadChainState(format!("{z:?} violates the constraint sets")))
    }

    pub fn contains(&self, z: &ChainState) -> bool {
        self.index_of(z).is_ok()
    }

    /// State index of (a, a) for the action with the given rank.
    pub fn diag_of_rank(&self, rank: usize) -> usize {
        self.diag[rank]
    }

    /// State indices of all diagonal states, in rank order of the action.
    pub fn diag_states(&self) -> &[usize] {
        &self.diag
    }

    pub fn is_diag(&self, idx: usize) -> bool {
        let (p, c) = self.states[idx];
        p == c
    }
}

/// Visits every feasible successor of `a` in mixed-radix order (last player
/// fastest) over the sorted constraint sets.
pub(super) fn for_each_successor(
    space: &ActionSpace,
    a: &JointAction,
    mut f: impl FnMut(&JointAction),
) {
    let n = space.players();
    let sets: Vec<&[usize]> = (0..n).map(|i| space.constraint_set(i, a[i])).collect();
    if sets.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut pos = vec![0usize; n];
    let mut cur = JointAction(sets.iter().map(|s| s[0]).collect());
    loop {
        f(&cur);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pos[i] + 1 < sets[i].len() {
                pos[i] += 1;
                cur.0[i] = sets[i][pos[i]];
                break;
            }
            pos[i] = 0;
            cur.0[i] = sets[i][0];
        }
    }
}
