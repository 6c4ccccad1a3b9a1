//! Nonnegative factorization baseline: B is factored as U Z^T by
//! multiplicative updates, a diffusion model is trained over the rows of Z,
//! and sampled rows are decoded through a monotone squashing of u^T z.

use ndarray::Array2;

use crate::baselines::{BaselineConfig, BaselineError};
use crate::diffusion::{reverse_sample, train_denoiser};
use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use crate::pipeline::GeneratedHypergraph;

#[derive(Debug, Clone)]
pub struct NmfConfig {
    pub k: usize,
    pub iters: usize,
    /// l1 penalty weight on both factors
    pub lambda: f64,
    /// squash u.z through a logistic instead of clamping to [0, 1]
    pub logistic_squash: bool,
    pub seed: u64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        NmfConfig { k: 2, iters: 500, lambda: 0.0, logistic_squash: false, seed: 42 }
    }
}

fn objective(b: &Array2<f64>, u: &Array2<f64>, z: &Array2<f64>, lambda: f64) -> f64 {
    let recon = u.dot(&z.t());
    let fit = (b - &recon).mapv(|d| d * d).sum();
    fit + lambda * (u.sum() + z.sum())
}

/// Multiplicative-update factorization of a nonnegative matrix; returns the
/// factors and the per-sweep objective trace, which is checked to be
/// non-increasing up to a small slack.
pub fn nmf_fit(
    b: &Array2<f64>,
    config: &NmfConfig,
) -> Result<(Array2<f64>, Array2<f64>, Vec<f64>), BaselineError> {
    if config.k < 1 {
        return Err(BaselineError::BadNmfConfig);
    }
    let (n, m) = b.dim();
    let mut rng = Rng::stream(config.seed, 0x4e4d);
    let mut u = Array2::from_shape_fn((n, config.k), |_| 0.1 + 0.9 * rng.uniform());
    let mut z = Array2::from_shape_fn((m, config.k), |_| 0.1 + 0.9 * rng.uniform());

    const EPS: f64 = 1e-12;
    let mut trace = vec![objective(b, &u, &z, config.lambda)];
    for _ in 0..config.iters {
        // U <- U * (B Z) / (U Zt Z + lambda/2)
        let numer = b.dot(&z);
        let denom = u.dot(&z.t().dot(&z));
        for ((i, k), val) in u.indexed_iter_mut() {
            *val *= numer[[i, k]] / (denom[[i, k]] + 0.5 * config.lambda + EPS);
        }
        let numer = b.t().dot(&u);
        let denom = z.dot(&u.t().dot(&u));
        for ((j, k), val) in z.indexed_iter_mut() {
            *val *= numer[[j, k]] / (denom[[j, k]] + 0.5 * config.lambda + EPS);
        }
        let obj = objective(b, &u, &z, config.lambda);
        let prev = *trace.last().expect("nonempty");
        if obj > prev * (1.0 + 1e-9) + 1e-9 {
            return Err(BaselineError::NmfDiverged { previous: prev, current: obj });
        }
        trace.push(obj);
    }
    Ok((u, z, trace))
}

pub fn squash(x: f64, logistic: bool) -> f64 {
    if logistic {
        1.0 / (1.0 + (-x).exp())
    } else {
        x.clamp(0.0, 1.0)
    }
}

pub fn nmfdiff_generate(
    h: &IncidenceStructure,
    config: &BaselineConfig,
    nmf: &NmfConfig,
) -> Result<GeneratedHypergraph, BaselineError> {
    if h.m() == 0 {
        return Err(BaselineError::EmptyInput);
    }
    let (u, z, _) = nmf_fit(&h.dense(), nmf)?;
    let rows: Vec<Vec<f64>> = (0..h.m()).map(|j| z.row(j).to_vec()).collect();
    let (model, _) = train_denoiser(&rows, &config.diffusion)?;
    let mut rng = Rng::stream(config.seed, 0x4e47);
    let sampled = reverse_sample(&model, config.m_tilde.unwrap_or(h.m()), &mut rng);
    let probs: Vec<Vec<f64>> = sampled
        .iter()
        .map(|zrow| {
            (0..h.n())
                .map(|i| {
                    let dot: f64 = u.row(i).iter().zip(zrow).map(|(a, b)| a * b).sum();
                    squash(dot, nmf.logistic_squash)
                })
                .collect()
        })
        .collect();
    crate::baselines::assemble_from_probs(h.n(), &probs, config)
}
