//! Denoiser training: per-example random step and fresh noise, squared-error
//! objective on the predicted noise, AdamW updates.

use ndarray::Array2;
use thiserror::Error;

use crate::diffusion::net::{time_embedding, AdamW, Mlp, TIME_EMBED_DIM};
use crate::diffusion::schedule::{forward_marginal_sample, linear_schedule, NoiseSchedule};
use crate::numkit::Rng;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training latents supplied")]
    EmptyInput,
    #[error("latent vectors have inconsistent dimensions")]
    RaggedInput,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFinite { epoch: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub seed: u64,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            epochs: 1000,
            batch_size: 64,
            lr: 1e-3,
            weight_decay: 1e-4,
            hidden_dim: 512,
            num_layers: 4,
            dropout: 0.1,
            steps: 200,
            beta_start: 1e-4,
            beta_end: 0.02,
            seed: 42,
        }
    }
}

/// Trained noise predictor plus everything needed to sample: the schedule and
/// the per-dimension standardization applied to the training latents.
#[derive(Debug, Clone)]
pub struct DenoisingModel {
    pub net: Mlp,
    pub schedule: NoiseSchedule,
    pub data_dim: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    /// mean minibatch loss per epoch
    pub epoch_losses: Vec<f64>,
}

const STD_FLOOR: f64 = 1e-8;

pub fn standardize_stats(latents: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let dim = latents[0].len();
    let count = latents.len() as f64;
    let mut mean = vec![0.0; dim];
    for z in latents {
        for (m, &v) in mean.iter_mut().zip(z) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut std = vec![0.0; dim];
    for z in latents {
        for d in 0..dim {
            let c = z[d] - mean[d];
            std[d] += c * c;
        }
    }
    for s in &mut std {
        *s = (*s / count).sqrt().max(STD_FLOOR);
    }
    (mean, std)
}

pub fn train_denoiser(
    latents: &[Vec<f64>],
    config: &DiffusionConfig,
) -> Result<(DenoisingModel, TrainTrace), TrainError> {
    if latents.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    let dim = latents[0].len();
    if dim == 0 || latents.iter().any(|z| z.len() != dim) {
        return Err(TrainError::RaggedInput);
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(TrainError::InvalidConfig("epochs and batch_size must be positive".into()));
    }
    let schedule = linear_schedule(config.steps, config.beta_start, config.beta_end)
        .map_err(|e| TrainError::InvalidConfig(e.to_string()))?;

    let (mean, std) = standardize_stats(latents);
    let scaled: Vec<Vec<f64>> = latents
        .iter()
        .map(|z| z.iter().enumerate().map(|(d, &v)| (v - mean[d]) / std[d]).collect())
        .collect();

    let mut init_rng = Rng::stream(config.seed, 0x4e45);
    let mut net = Mlp::new(
        dim + TIME_EMBED_DIM,
        config.hidden_dim,
        config.num_layers,
        dim,
        config.dropout,
        &mut init_rng,
    );
    let mut opt = AdamW::new(net.param_count(), config.lr, config.weight_decay);
    let mut rng = Rng::stream(config.seed, 0x5452);

    let count = scaled.len();
    let mut order: Vec<usize> = (0..count).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    // exponential moving average of the weights; the averaged parameters are
    // what the returned model uses, which removes the noise of wherever the
    // optimizer happened to stop. The decay ramps up so short runs average
    // over a proportionally shorter window.
    let mut ema = net.flat_params();
    let mut opt_steps = 0usize;

    for epoch in 0..config.epochs {
        // Fisher-Yates
        for i in (1..count).rev() {
            let j = rng.gen_index(i + 1);
            order.swap(i, j);
        }
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let b = chunk.len();
            let mut x = Array2::zeros((b, dim + TIME_EMBED_DIM));
            let mut target = Array2::zeros((b, dim));
            for (row, &idx) in chunk.iter().enumerate() {
                let t = 1 + rng.gen_index(config.steps);
                let (zt, eps) = forward_marginal_sample(&scaled[idx], t, &schedule, &mut rng)
                    .expect("t in range");
                for d in 0..dim {
                    x[[row, d]] = zt[d];
                    target[[row, d]] = eps[d];
                }
                for (d, &e) in time_embedding(t, TIME_EMBED_DIM).iter().enumerate() {
                    x[[row, dim + d]] = e;
                }
            }
            let (pred, cache) = net.forward_train(&x, &mut rng);
            let diff = &pred - &target;
            let loss = diff.mapv(|d| d * d).sum() / (b * dim) as f64;
            if !loss.is_finite() {
                return Err(TrainError::NonFinite { epoch });
            }
            loss_sum += loss;
            batches += 1;
            let grad_out = diff.mapv(|d| 2.0 * d / (b * dim) as f64);
            let (gw, gb) = net.backward(&cache, &grad_out);
            let grads = net.flatten_grads(&gw, &gb);
            let mut params = net.flat_params();
            opt.update(&mut params, &grads);
            net.set_flat_params(&params);
            opt_steps += 1;
            let decay = (opt_steps as f64 / (opt_steps as f64 + 10.0)).min(0.999);
            for (e, &p) in ema.iter_mut().zip(&params) {
                *e = decay * *e + (1.0 - decay) * p;
            }
        }
        epoch_losses.push(loss_sum / batches as f64);
    }
    net.set_flat_params(&ema);

    Ok((
        DenoisingModel { net, schedule, data_dim: dim, mean, std },
        TrainTrace { epoch_losses },
    ))
}
