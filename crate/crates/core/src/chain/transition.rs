//! One-step law of the pair process and its small-ε exponents.
//!
//! For a transition (a⁰, a¹) → (a¹, a²) each sensor contributes one factor,
//! decided by whether its latest move paid off and where its next action
//! lands: keep (1−ε), explore ε/(feasible targets), reluctantly stay
//! (1−ε)·κ·ε^Δ, or return (1−ε)·(1−κ·ε^Δ), with Δ the payoff drop. The
//! resistance of the transition is the total ε-order of those factors.

use crate::error::{Error, Result};
use crate::game::GameDefinition;

use super::state::{ChainState, PairSpace};

/// One feasible transition out of a state: target, probability at the
/// model's (ε, κ), and the ε-exponent of that probability.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub to: usize,
    pub prob: f64,
    pub resistance: f64,
}

/// Sparse row-stochastic matrix P^ε over a [`PairSpace`], with the
/// resistance of every stored transition.
///
/// The support of P^ε does not depend on ε ∈ (0, 1): a transition is either
/// impossible at every ε or stored with a finite resistance. Only κ = 0
/// removes entries (the reluctant-stay branch disappears).
pub struct TransitionModel {
    pairs: PairSpace,
    eps: f64,
    kappa: f64,
    utilities: Vec<Vec<f64>>,
    rows: Vec<Vec<Transition>>,
}

impl TransitionModel {
    pub fn build(game: &GameDefinition, eps: f64, kappa: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadParameter(format!(
                "exploration rate must lie in (0, 1), got {eps}"
            )));
        }
        check_kappa(kappa)?;
        let pairs = PairSpace::enumerate(game.space())?;
        let utilities = utility_grid(game);
        let rows = (0..pairs.len())
            .map(|from| row_targets(&pairs, &utilities, from, eps, kappa))
            .collect();
        Ok(TransitionModel {
            pairs,
            eps,
            kappa,
            utilities,
            rows,
        })
    }

    pub fn pairs(&self) -> &PairSpace {
        &self.pairs
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn row(&self, from: usize) -> &[Transition] {
        &self.rows[from]
    }

    /// Stored utility of `player` at the joint action with the given rank.
    pub fn utility_at(&self, player: usize, rank: usize) -> f64 {
        self.utilities[player][rank]
    }

    pub fn probability(&self, from: usize, to: usize) -> f64 {
        match self.rows[from].binary_search_by_key(&to, |t| t.to) {
            Ok(i) => self.rows[from][i].prob,
            Err(_) => 0.0,
        }
    }

    pub fn resistance(&self, from: usize, to: usize) -> Option<f64> {
        match self.rows[from].binary_search_by_key(&to, |t| t.to) {
            Ok(i) => Some(self.rows[from][i].resistance),
            Err(_) => None,
        }
    }

    /// Worst |row sum − 1| over the whole matrix. Zero up to float noise
    /// whenever every constraint set offers at least three options; spaces
    /// below that minimum leave exploration stranded and the rows short.
    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().map(|t| t.prob).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

pub(super) fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::BadParameter(format!(
            "return gain must lie in [0, 1], got {kappa}"
        )));
    }
    Ok(())
}

/// Dense utility table U[player][joint rank]; the chain evaluates each joint
/// action exactly once.
pub(super) fn utility_grid(game: &GameDefinition) -> Vec<Vec<f64>> {
    let space = game.space();
    let total = space.joint_count().expect("guarded by PairSpace") as usize;
    let n = game.players();
    let mut grid = vec![vec![0.0; total]; n];
    for rank in 0..total {
        let a = space.unrank(rank);
        for (i, row) in grid.iter_mut().enumerate() {
            row[rank] = game.utility(i, &a);
        }
    }
    grid
}

/// Probability factor and resistance exponent of one sensor's move, or
/// `None` when the move is impossible at every ε ∈ (0, 1).
///
/// `options` is C_i(a1), sorted; `u0`/`u1` are the payoffs remembered for
/// `a0`/`a1`. When the sensor stood still and still lost payoff (a0 = a1),
/// staying collects both the reluctant-stay and the return branch, which is
/// why that case keeps the full (1−ε) and pays no ε order.
fn sensor_factor(
    options: &[usize],
    a0: usize,
    a1: usize,
    a2: usize,
    u0: f64,
    u1: f64,
    eps: f64,
    kappa: f64,
) -> Option<(f64, f64)> {
    if !options.contains(&a2) {
        return None;
    }
    if u1 >= u0 || a0 == a1 {
        if a2 == a1 {
            Some((1.0 - eps, 0.0))
        } else {
            Some((eps / (options.len() - 1) as f64, 1.0))
        }
    } else {
        let delta = u0 - u1;
        if a2 == a1 {
            if kappa == 0.0 {
                None
            } else {
                Some(((1.0 - eps) * kappa * eps.powf(delta), delta))
            }
        } else if a2 == a0 {
            Some(((1.0 - eps) * (1.0 - kappa * eps.powf(delta)), 0.0))
        } else {
            Some((eps / (options.len() - 2) as f64, 1.0))
        }
    }
}

/// All transitions out of `from` with positive probability, sorted by target
/// index. The candidate targets are exactly the constrained successors of
/// the current action; each picks up one factor per sensor.
pub(super) fn row_targets(
    pairs: &PairSpace,
    utilities: &[Vec<f64>],
    from: usize,
    eps: f64,
    kappa: f64,
) -> Vec<Transition> {
    let space = pairs.space();
    let (r0, r1) = pairs.ranks(from);
    let a0 = space.unrank(r0);
    let a1 = space.unrank(r1);
    let n = space.players();

    // Per-sensor menu of (target, factor, exponent).
    let mut menus: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let options = space.constraint_set(i, a1[i]);
        let menu: Vec<(usize, f64, f64)> = options
            .iter()
            .filter_map(|&a2| {
                sensor_factor(options, a0[i], a1[i], a2, utilities[i][r0], utilities[i][r1], eps, kappa)
                    .filter(|&(p, _)| p > 0.0)
                    .map(|(p, chi)| (a2, p, chi))
            })
            .collect();
        menus.push(menu);
    }
    if menus.iter().any(|m| m.is_empty()) {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut pos = vec![0usize; n];
    let mut target = a1.clone();
    loop {
        let mut prob = 1.0;
        let mut chi = 0.0;
        for (i, &p) in pos.iter().enumerate() {
            let (a2, f, c) = menus[i][p];
            target.0[i] = a2;
            prob *= f;
            chi += c;
        }
        let key = (r1, space.rank(&target));
        let to = pairs
            .index_of(&ChainState::new(a1.clone(), target.clone()))
            .expect("constrained successor is always a valid pair");
        debug_assert_eq!(pairs.ranks(to), key);
        out.push(Transition {
            to,
            prob,
            resistance: chi,
        });

        let mut i = n;
        loop {
            if i == 0 {
                out.sort_by_key(|t| t.to);
                return out;
            }
            i -= 1;
            if pos[i] + 1 < menus[i].len() {
                pos[i] += 1;
                break;
            }
            pos[i] = 0;
        }
    }
}

fn both_in_space(game: &GameDefinition, z1: &ChainState, z2: &ChainState) -> bool {
    let space = game.space();
    let feasible = |z: &ChainState| {
        z.prev.len() == space.players()
            && z.curr.len() == space.players()
            && (0..space.players())
                .all(|i| space.constraint_set(i, z.prev[i]).contains(&z.curr[i]))
    };
    feasible(z1) && feasible(z2)
}

/// Probability of the one-step transition z1 → z2 at the given rates.
/// Infeasible pairs (including a mismatch between z1's current and z2's
/// previous action) have probability zero. `eps` may be zero, which yields
/// the unperturbed chain.
pub fn transition_probability(
    game: &GameDefinition,
    z1: &ChainState,
    z2: &ChainState,
    eps: f64,
    kappa: f64,
) -> f64 {
    if z1.curr != z2.prev || !both_in_space(game, z1, z2) {
        return 0.0;
    }
    let mut prob = 1.0;
    for i in 0..game.players() {
        let options = game.space().constraint_set(i, z1.curr[i]);
        let u0 = game.utility(i, &z1.prev);
        let u1 = game.utility(i, &z1.curr);
        match sensor_factor(options, z1.prev[i], z1.curr[i], z2.curr[i], u0, u1, eps, kappa) {
            Some((p, _)) => prob *= p,
            None => return 0.0,
        }
    }
    prob
}

/// Resistance (ε-exponent) of z1 → z2: explorations count 1 each, reluctant
/// stays count their payoff drop, keeps and returns are free. `None` when
/// the transition has probability zero for every ε ∈ (0, 1).
pub fn transition_resistance(
    game: &GameDefinition,
    z1: &ChainState,
    z2: &ChainState,
    kappa: f64,
) -> Option<f64> {
    if z1.curr != z2.prev || !both_in_space(game, z1, z2) {
        return None;
    }
    let mut chi = 0.0;
    for i in 0..game.players() {
        let options = game.space().constraint_set(i, z1.curr[i]);
        let u0 = game.utility(i, &z1.prev);
        let u1 = game.utility(i, &z1.curr);
        let (_, c) = sensor_factor(
            options,
            z1.prev[i],
            z1.curr[i],
            z2.curr[i],
            u0,
            u1,
            0.5,
            kappa,
        )?;
        chi += c;
    }
    Some(chi)
}

/// Least-squares slope of ln P^ε against ln ε over ε ∈ {1e-2, 1e-3, 1e-4};
/// the independent check that probabilities decay with the claimed
/// exponent. `None` when any of the three probabilities vanishes.
pub fn fitted_resistance(
    game: &GameDefinition,
    z1: &ChainState,
    z2: &ChainState,
    kappa: f64,
) -> Option<f64> {
    let mut xs = [0.0; 3];
    let mut ys = [0.0; 3];
    for (k, eps) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let p = transition_probability(game, z1, z2, eps, kappa);
        if p <= 0.0 {
            return None;
        }
        xs[k] = eps.ln();
        ys[k] = p.ln();
    }
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..3 {
        num += (xs[k] - xm) * (ys[k] - ym);
        den += (xs[k] - xm) * (xs[k] - xm);
    }
    Some(num / den)
}
