//! Stage 1: mean-field Gamma variational inference over the Poisson-link
//! incidence model.

mod checkpoint;
mod elbo;
mod fit;
mod state;

pub use checkpoint::{load_state, save_state, CheckpointError, LoadedState};
pub use elbo::{
    elbo, elbo_gradient, expected_intensity, intensity_variance, term_i_lower_bound,
    term_i_taylor, TAYLOR_INTENSITY_FLOOR, TAYLOR_SENTINEL,
};
pub use fit::{fit_variational, FitError, FitTrace};
pub use state::{
    Estimator, FitConfig, GammaFactor, LatentVector, PriorSpec, StateError, VariationalState,
    LOG_PARAM_BOUND,
};
