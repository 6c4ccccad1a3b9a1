//! Full-batch adaptive gradient ascent on the variational log-parameters.

use crate::hypercore::IncidenceStructure;
use crate::vi::elbo::elbo_with_grad;
use crate::vi::state::{FitConfig, PriorSpec, VariationalState, LOG_PARAM_BOUND};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("objective became non-finite at iteration {iter}")]
    NonFinite { iter: usize, last_state: VariationalState },
    #[error("empty hypergraph: stage 1 needs at least one node")]
    EmptyInput,
    #[error("invalid prior: all hyperparameters must be positive")]
    InvalidPrior,
}

/// Trace of one optimization run.
#[derive(Debug, Clone)]
pub struct FitTrace {
    pub initial_elbo: f64,
    pub final_elbo: f64,
    pub iterations: usize,
}

/// Maximizes the tractable objective with per-coordinate moment-accumulating
/// ascent (Adam-style) in log-parameter space. Returns the best state seen,
/// so the final objective never falls below the initial one.
pub fn fit_variational(
    h: &IncidenceStructure,
    prior: &PriorSpec,
    config: &FitConfig,
) -> Result<(VariationalState, FitTrace), FitError> {
    if h.n() == 0 {
        return Err(FitError::EmptyInput);
    }
    if !prior.is_valid() {
        return Err(FitError::InvalidPrior);
    }
    let (n, m, k) = (h.n(), h.m(), config.k);
    let state = VariationalState::init_random(n, m, k, config.seed);
    let mut params = state.to_flat();
    let dim = params.len();

    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut m1 = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];

    let mut current = VariationalState::from_flat(n, m, k, &params).expect("layout");
    let (initial_elbo, _) = elbo_with_grad(&current, h, prior, config.estimator, false);
    // the first in-loop evaluation happens at the initial state, so the
    // previous value must not start there or convergence fires immediately
    let mut prev_elbo = f64::INFINITY;
    let mut best_elbo = initial_elbo;
    let mut best_params = params.clone();
    let mut iterations = 0;

    for iter in 1..=config.max_iters {
        iterations = iter;
        let (value, grad) = elbo_with_grad(&current, h, prior, config.estimator, true);
        let grad = grad.expect("gradient requested");
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(FitError::NonFinite { iter, last_state: current });
        }
        if value > best_elbo {
            best_elbo = value;
            best_params.copy_from_slice(&params);
        }

        let bc1 = 1.0 - beta1.powi(iter as i32);
        let bc2 = 1.0 - beta2.powi(iter as i32);
        for d in 0..dim {
            m1[d] = beta1 * m1[d] + (1.0 - beta1) * grad[d];
            m2[d] = beta2 * m2[d] + (1.0 - beta2) * grad[d] * grad[d];
            let step = config.learning_rate * (m1[d] / bc1) / ((m2[d] / bc2).sqrt() + eps);
            params[d] = (params[d] + step).clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND);
        }
        current = VariationalState::from_flat(n, m, k, &params).expect("layout");

        if (value - prev_elbo).abs() < config.tolerance * value.abs().max(1e-300) {
            break;
        }
        prev_elbo = value;
    }

    // evaluate the last iterate too
    let (last_value, _) = elbo_with_grad(&current, h, prior, config.estimator, false);
    if last_value.is_finite() && last_value > best_elbo {
        best_elbo = last_value;
        best_params.copy_from_slice(&params);
    }
    let best = VariationalState::from_flat(n, m, k, &best_params).expect("layout");
    Ok((
        best,
        FitTrace { initial_elbo, final_elbo: best_elbo, iterations },
    ))
}
