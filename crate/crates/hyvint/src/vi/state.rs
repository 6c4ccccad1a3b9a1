//! Variational Gamma factors and the mean-field state over a hypergraph.

use crate::numkit::{digamma, log_gamma, trigamma, Rng};
use thiserror::Error;

/// Log-parameters are clamped to this band after every optimizer step to
/// keep the Gamma special functions well away from overflow.
pub const LOG_PARAM_BOUND: f64 = 12.0;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("shape and rate must be positive, got shape={shape}, rate={rate}")]
    NonPositive { shape: f64, rate: f64 },
    #[error("flat parameter vector has length {actual}, expected {expected}")]
    BadFlatLength { expected: usize, actual: usize },
    #[error("latent vector has length {actual}, expected {expected}")]
    BadLatentLength { expected: usize, actual: usize },
}

/// One Gamma(shape, rate) variational factor. Positivity is enforced by
/// storing the log-shape and log-rate, which are also the free optimization
/// variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    log_shape: f64,
    log_rate: f64,
}

impl GammaFactor {
    pub fn new(shape: f64, rate: f64) -> Result<Self, StateError> {
        if !(shape > 0.0 && rate > 0.0) {
            return Err(StateError::NonPositive { shape, rate });
        }
        Ok(GammaFactor { log_shape: shape.ln(), log_rate: rate.ln() })
    }

    pub fn from_logs(log_shape: f64, log_rate: f64) -> Self {
        GammaFactor { log_shape, log_rate }
    }

    pub fn log_shape(&self) -> f64 {
        self.log_shape
    }

    pub fn log_rate(&self) -> f64 {
        self.log_rate
    }

    pub fn shape(&self) -> f64 {
        self.log_shape.exp()
    }

    pub fn rate(&self) -> f64 {
        self.log_rate.exp()
    }

    /// E[X] = a/b
    pub fn mean(&self) -> f64 {
        (self.log_shape - self.log_rate).exp()
    }

    /// E[log X] = ψ(a) − ln b
    pub fn mean_log(&self) -> f64 {
        digamma(self.shape()).expect("positive shape") - self.log_rate
    }

    /// E[X²] = a(a+1)/b²
    pub fn second_moment(&self) -> f64 {
        let a = self.shape();
        a * (a + 1.0) / (2.0 * self.log_rate).exp()
    }

    /// Differential entropy a − ln b + ln Γ(a) + (1−a)ψ(a).
    pub fn entropy(&self) -> f64 {
        let a = self.shape();
        a - self.log_rate
            + log_gamma(a).expect("positive shape")
            + (1.0 - a) * digamma(a).expect("positive shape")
    }

    /// d E[log X] / d log-shape = a·ψ'(a); the log-rate derivative is −1.
    pub fn mean_log_dshape(&self) -> f64 {
        let a = self.shape();
        a * trigamma(a).expect("positive shape")
    }
}

/// Fixed Gamma prior hyperparameters, one shape/rate pair per factor role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub a_theta: f64,
    pub b_theta: f64,
    pub a_rho: f64,
    pub b_rho: f64,
    pub a_beta: f64,
    pub b_beta: f64,
}

impl PriorSpec {
    /// All eight hyperparameters set to the same scale.
    pub fn uniform(scale: f64) -> Self {
        PriorSpec {
            a_alpha: scale,
            b_alpha: scale,
            a_theta: scale,
            b_theta: scale,
            a_rho: scale,
            b_rho: scale,
            a_beta: scale,
            b_beta: scale,
        }
    }

    pub fn is_valid(&self) -> bool {
        [
            self.a_alpha,
            self.b_alpha,
            self.a_theta,
            self.b_theta,
            self.a_rho,
            self.b_rho,
            self.a_beta,
            self.b_beta,
        ]
        .iter()
        .all(|&x| x > 0.0)
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec::uniform(0.1)
    }
}

/// Which estimator stands in for the intractable positive-incidence term
/// of the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Auxiliary-distribution lower bound (the default pipeline).
    LowerBound,
    /// Second-order Taylor expansion of log(1−e^{−λ}) at the mean intensity.
    Taylor,
}

/// Stage-1 optimization settings.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub k: usize,
    pub max_iters: usize,
    pub learning_rate: f64,
    pub tolerance: f64,
    pub estimator: Estimator,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            k: 2,
            max_iters: 10_000,
            learning_rate: 1e-3,
            tolerance: 1e-8,
            estimator: Estimator::LowerBound,
            seed: 42,
        }
    }
}

/// The z_j ∈ R^{2K+2} log-parameter encoding of one hyperedge's variational
/// factors: [log a_ρ, log b_ρ, {log a_βk, log b_βk}_k].
pub type LatentVector = Vec<f64>;

/// Full mean-field state: per-node activity and embedding factors, per-edge
/// activity and embedding factors.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    n: usize,
    m: usize,
    k: usize,
    pub node_activity: Vec<GammaFactor>,
    /// row-major n×K
    pub node_embed: Vec<GammaFactor>,
    pub edge_activity: Vec<GammaFactor>,
    /// row-major m×K
    pub edge_embed: Vec<GammaFactor>,
}

impl VariationalState {
    pub fn unit(n: usize, m: usize, k: usize) -> Self {
        let one = GammaFactor::from_logs(0.0, 0.0);
        VariationalState {
            n,
            m,
            k,
            node_activity: vec![one; n],
            node_embed: vec![one; n * k],
            edge_activity: vec![one; m],
            edge_embed: vec![one; m * k],
        }
    }

    /// Seed-controlled initialization: log-parameters i.i.d. Gaussian with
    /// small variance around log(1.0) = 0.
    pub fn init_random(n: usize, m: usize, k: usize, seed: u64) -> Self {
        let mut rng = Rng::stream(seed, 0x5441);
        let mut draw = |count: usize| -> Vec<GammaFactor> {
            (0..count)
                .map(|_| {
                    let u = 0.1 * rng.sample_gaussian();
                    let v = 0.1 * rng.sample_gaussian();
                    GammaFactor::from_logs(u, v)
                })
                .collect()
        };
        VariationalState {
            n,
            m,
            k,
            node_activity: draw(n),
            node_embed: draw(n * k),
            edge_activity: draw(m),
            edge_embed: draw(m * k),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta(&self, i: usize, k: usize) -> &GammaFactor {
        &self.node_embed[i * self.k + k]
    }

    pub fn beta(&self, j: usize, k: usize) -> &GammaFactor {
        &self.edge_embed[j * self.k + k]
    }

    pub fn num_params(&self) -> usize {
        2 * (self.n + self.m + self.k * (self.n + self.m))
    }

    /// Flattens to the optimizer layout: for each factor a (log-shape,
    /// log-rate) pair, ordered node_activity, node_embed, edge_activity,
    /// edge_embed.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for group in [&self.node_activity, &self.node_embed, &self.edge_activity, &self.edge_embed] {
            for f in group.iter() {
                out.push(f.log_shape());
                out.push(f.log_rate());
            }
        }
        out
    }

    pub fn from_flat(n: usize, m: usize, k: usize, flat: &[f64]) -> Result<Self, StateError> {
        let expected = 2 * (n + m + k * (n + m));
        if flat.len() != expected {
            return Err(StateError::BadFlatLength { expected, actual: flat.len() });
        }
        let mut it = flat.chunks_exact(2).map(|c| GammaFactor::from_logs(c[0], c[1]));
        let node_activity: Vec<_> = it.by_ref().take(n).collect();
        let node_embed: Vec<_> = it.by_ref().take(n * k).collect();
        let edge_activity: Vec<_> = it.by_ref().take(m).collect();
        let edge_embed: Vec<_> = it.by_ref().take(m * k).collect();
        Ok(VariationalState { n, m, k, node_activity, node_embed, edge_activity, edge_embed })
    }

    /// Per-edge latent encodings in the diffusion training order:
    /// ρ shape, ρ rate, then per k the β shape and rate.
    pub fn export_latents(&self) -> Vec<LatentVector> {
        (0..self.m)
            .map(|j| {
                let mut z = Vec::with_capacity(2 * self.k + 2);
                z.push(self.edge_activity[j].log_shape());
                z.push(self.edge_activity[j].log_rate());
                for k in 0..self.k {
                    z.push(self.beta(j, k).log_shape());
                    z.push(self.beta(j, k).log_rate());
                }
                z
            })
            .collect()
    }
}
