//! Stationary distributions of the perturbed chain.
//!
//! For ε > 0 the chain is irreducible and aperiodic, so μP = μ, Σμ = 1 has
//! one solution. Small spaces get a dense linear solve (one balance
//! equation swapped for the normalization, plus iterative refinement);
//! larger ones fall back to power iteration, which inherits the chain's
//! mixing speed and gives up with an error rather than returning a sloppy
//! vector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::GameDefinition;

use super::transition::TransitionModel;

/// Largest |B| handled by the dense direct solve.
pub const DIRECT_SOLVE_LIMIT: usize = 2_048;

/// Power-iteration sweep cap before giving up.
pub const POWER_ITERATION_CAP: usize = 500_000;

/// Defining residual ‖μP − μ‖∞ required of any returned vector.
pub const STATIONARY_RESIDUAL: f64 = 1e-12;

/// Stationary distribution over the pair space at the given rates.
pub fn stationary_distribution(game: &GameDefinition, eps: f64, kappa: f64) -> Result<Vec<f64>> {
    let model = TransitionModel::build(game, eps, kappa)?;
    stationary_of_model(&model)
}

/// Same, against a prebuilt model (cheaper in ε sweeps).
pub fn stationary_of_model(model: &TransitionModel) -> Result<Vec<f64>> {
    let row_error = model.max_row_sum_error();
    if row_error > 1e-10 {
        return Err(Error::BadParameter(format!(
            "transition rows leak {row_error:.3e} probability; every constraint set \
             needs at least three options for the chain to be stochastic"
        )));
    }
    let n = model.pairs().len();
    let mu = if n <= DIRECT_SOLVE_LIMIT {
        direct_solve(model)?
    } else {
        power_iteration(model)?
    };
    let residual = residual_inf(model, &mu);
    if residual > STATIONARY_RESIDUAL {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(mu)
}

/// μ ← μP using the sparse rows.
fn apply(model: &TransitionModel, mu: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (from, &mass) in mu.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for t in model.row(from) {
            out[t.to] += mass * t.prob;
        }
    }
}

fn residual_inf(model: &TransitionModel, mu: &[f64]) -> f64 {
    let mut next = vec![0.0; mu.len()];
    apply(model, mu, &mut next);
    mu.iter()
        .zip(&next)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solves (Pᵀ − I)x = 0 with the last balance equation replaced by Σx = 1,
/// then runs a few rounds of iterative refinement on the factored system.
fn direct_solve(model: &TransitionModel) -> Result<Vec<f64>> {
    let n = model.pairs().len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for from in 0..n {
        for t in model.row(from) {
            m[(t.to, from)] += t.prob;
        }
    }
    for i in 0..n {
        m[(i, i)] -= 1.0;
    }
    for c in 0..n {
        m[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;

    let lu = m.clone().lu();
    let mut x = lu
        .solve(&b)
        .ok_or(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        })?;
    for _ in 0..3 {
        let r = &b - &m * &x;
        match lu.solve(&r) {
            Some(d) => x += d,
            None => break,
        }
    }

    let mut mu: Vec<f64> = x.iter().copied().collect();
    let floor = -1e-9;
    for v in &mut mu {
        if *v < 0.0 {
            if *v < floor {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    residual: v.abs(),
                });
            }
            *v = 0.0;
        }
    }
    let total: f64 = mu.iter().sum();
    for v in &mut mu {
        *v /= total;
    }
    Ok(mu)
}

fn power_iteration(model: &TransitionModel) -> Result<Vec<f64>> {
    let n = model.pairs().len();
    let mut mu = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut step = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        apply(model, &mu, &mut next);
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        step = mu
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut mu, &mut next);
        if step <= STATIONARY_RESIDUAL {
            return Ok(mu);
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        residual: step,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::game::gen::{random_marginal_game, random_separated_game, random_space};
    use crate::game::ActionSpace;

    use super::*;

    #[test]
    fn solves_to_the_defining_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..4 {
            let space = random_space(&mut rng, 2, 3, 4, 0.4);
            let game = random_marginal_game(&mut rng, &space, false)
                .scale_to_assumption3()
                .0
                .to_definition();
            let model = TransitionModel::build(&game, 0.05, 0.12).unwrap();
            let mu = stationary_of_model(&model).unwrap();
            assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(mu.iter().all(|&v| v >= 0.0));
            assert!(residual_inf(&model, &mu) <= STATIONARY_RESIDUAL);
        }
    }

    #[test]
    fn power_iteration_agrees_with_the_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let space = random_space(&mut rng, 2, 3, 3, 0.3);
        let game = random_marginal_game(&mut rng, &space, false)
            .scale_to_assumption3()
            .0
            .to_definition();
        // A healthy ε keeps the spectral gap wide enough for the iterative
        // path to hit 1e-12 quickly.
        let model = TransitionModel::build(&game, 0.2, 0.12).unwrap();
        let direct = direct_solve(&model).unwrap();
        let power = power_iteration(&model).unwrap();
        for (a, b) in direct.iter().zip(&power) {
            assert!((a - b).abs() < 1e-9, "direct {a} vs power {b}");
        }
    }

    #[test]
    fn shrinking_exploration_concentrates_mass_on_the_peak() {
        // Competing settled states keep relative mass ~ ε^(potential gap),
        // so modestly separated games concentrate slowly; the monotone
        // climb is the claim here, not a sharp threshold.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..3 {
            let space = random_space(&mut rng, 2, 3, 3, 0.2);
            let table = random_separated_game(&mut rng, &space, 0.02);
            let best = table.argmax_phi().unwrap()[0];
            let game = table.to_definition();
            let mut masses = Vec::new();
            for eps in [0.05, 0.02, 0.01, 0.005] {
                let model = TransitionModel::build(&game, eps, 0.12).unwrap();
                let mu = stationary_of_model(&model).unwrap();
                masses.push(mu[model.pairs().diag_of_rank(best)]);
            }
            for pair in masses.windows(2) {
                assert!(
                    pair[1] > pair[0],
                    "mass at the peak fell from {} to {}",
                    pair[0],
                    pair[1]
                );
            }
            assert!(masses[3] > 0.4, "final peak mass {}", masses[3]);
        }
    }

    #[test]
    fn two_option_spaces_are_rejected() {
        let space = ActionSpace::complete(&[2, 2]);
        let game = crate::game::TableGame::from_welfare(space, vec![0.3, 0.1, 0.2, 0.4], None)
            .unwrap()
            .to_definition();
        match stationary_distribution(&game, 0.05, 0.12) {
            Err(Error::BadParameter(msg)) => assert!(msg.contains("three options")),
            other => panic!("expected a stochasticity complaint, got {other:?}"),
        }
    }
}
