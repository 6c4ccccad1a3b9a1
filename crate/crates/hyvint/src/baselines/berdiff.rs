//! Bernoulli bit-flip diffusion over membership vectors: each coordinate is
//! independently flipped with a per-step probability, a network predicts the
//! clean bits from a corrupted vector, and the reverse chain mixes the
//! prediction through the exact two-state posterior.

use ndarray::Array2;

use crate::baselines::{BaselineConfig, BaselineError};
use crate::diffusion::{time_embedding, AdamW, Mlp, TIME_EMBED_DIM};
use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use crate::pipeline::GeneratedHypergraph;

#[derive(Debug, Clone, PartialEq)]
pub struct FlipSchedule {
    pub steps: usize,
    pub beta: Vec<f64>,
    /// running product of (1 - 2 beta_s); alpha_bar[t-1] is the t-step value
    pub alpha_bar: Vec<f64>,
}

impl FlipSchedule {
    pub fn from_beta(beta: Vec<f64>) -> Result<Self, BaselineError> {
        if beta.is_empty() || beta.iter().any(|&b| !(0.0 < b && b < 0.5)) {
            return Err(BaselineError::BadFlipSchedule);
        }
        let mut alpha_bar = Vec::with_capacity(beta.len());
        let mut prod = 1.0;
        for &b in &beta {
            prod *= 1.0 - 2.0 * b;
            alpha_bar.push(prod);
        }
        Ok(FlipSchedule { steps: beta.len(), beta, alpha_bar })
    }

    pub fn linear(steps: usize, beta_start: f64, beta_end: f64) -> Result<Self, BaselineError> {
        if steps == 0 {
            return Err(BaselineError::BadFlipSchedule);
        }
        let beta = if steps == 1 {
            vec![beta_start]
        } else {
            (0..steps)
                .map(|i| beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64)
                .collect()
        };
        FlipSchedule::from_beta(beta)
    }

    /// alpha_bar at step t with the t = 0 convention of 1 (no corruption).
    pub fn alpha_bar_at(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    pub fn beta_at(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }
}

/// Closed-form marginal P(x_t = 1 | x_0) = 1/2 + (x_0 - 1/2) alpha_bar_t.
pub fn berdiff_marginal_prob(x0: f64, t: usize, schedule: &FlipSchedule) -> f64 {
    0.5 + (x0 - 0.5) * schedule.alpha_bar_at(t)
}

/// Samples the t-step marginal for a whole bit vector.
pub fn berdiff_forward(
    x0: &[f64],
    t: usize,
    schedule: &FlipSchedule,
    rng: &mut Rng,
) -> Result<Vec<f64>, BaselineError> {
    if t < 1 || t > schedule.steps {
        return Err(BaselineError::BadFlipSchedule);
    }
    Ok(x0
        .iter()
        .map(|&b| {
            if rng.uniform() < berdiff_marginal_prob(b, t, schedule) {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Single forward step: flip each bit independently with probability beta_t.
pub fn berdiff_step(x: &[f64], t: usize, schedule: &FlipSchedule, rng: &mut Rng) -> Vec<f64> {
    let beta = schedule.beta_at(t);
    x.iter()
        .map(|&b| if rng.uniform() < beta { 1.0 - b } else { b })
        .collect()
}

/// Mean entrywise binary cross-entropy of logits against bit targets.
pub fn bce_loss(logits: &Array2<f64>, targets: &Array2<f64>) -> f64 {
    let mut sum = 0.0;
    for (&z, &y) in logits.iter().zip(targets.iter()) {
        // -[y log sigma(z) + (1-y) log(1-sigma(z))] = softplus(z) - y z
        let softplus = if z > 30.0 { z } else { z.exp().ln_1p() };
        sum += softplus - y * z;
    }
    sum / logits.len() as f64
}

pub struct BerDiffModel {
    pub net: Mlp,
    pub schedule: FlipSchedule,
    pub n: usize,
}

pub fn berdiff_train(
    h: &IncidenceStructure,
    config: &BaselineConfig,
) -> Result<BerDiffModel, BaselineError> {
    if h.m() == 0 {
        return Err(BaselineError::EmptyInput);
    }
    let d = &config.diffusion;
    let schedule = FlipSchedule::linear(d.steps, d.beta_start, d.beta_end)?;
    let n = h.n();
    let columns: Vec<Vec<f64>> = {
        let dense = h.dense();
        (0..h.m()).map(|j| dense.column(j).to_vec()).collect()
    };

    let mut init_rng = Rng::stream(d.seed, 0x4245);
    let mut net = Mlp::new(n + TIME_EMBED_DIM, d.hidden_dim, d.num_layers, n, d.dropout, &mut init_rng);
    let mut opt = AdamW::new(net.param_count(), d.lr, d.weight_decay);
    let mut rng = Rng::stream(d.seed, 0x4254);

    let count = columns.len();
    let mut order: Vec<usize> = (0..count).collect();
    for epoch in 0..d.epochs {
        for i in (1..count).rev() {
            let j = rng.gen_index(i + 1);
            order.swap(i, j);
        }
        for chunk in order.chunks(d.batch_size) {
            let b = chunk.len();
            let mut x = Array2::zeros((b, n + TIME_EMBED_DIM));
            let mut target = Array2::zeros((b, n));
            for (row, &idx) in chunk.iter().enumerate() {
                let t = 1 + rng.gen_index(d.steps);
                let xt = berdiff_forward(&columns[idx], t, &schedule, &mut rng)?;
                for i in 0..n {
                    x[[row, i]] = xt[i];
                    target[[row, i]] = columns[idx][i];
                }
                for (i, &e) in time_embedding(t, TIME_EMBED_DIM).iter().enumerate() {
                    x[[row, n + i]] = e;
                }
            }
            let (logits, cache) = net.forward_train(&x, &mut rng);
            let loss = bce_loss(&logits, &target);
            if !loss.is_finite() {
                return Err(BaselineError::NonFinite { epoch });
            }
            // d loss / d logit = (sigma(z) - y) / count
            let grad_out = Array2::from_shape_fn(logits.dim(), |idx| {
                let z = logits[idx];
                let s = 1.0 / (1.0 + (-z).exp());
                (s - target[idx]) / logits.len() as f64
            });
            let (gw, gb) = net.backward(&cache, &grad_out);
            let grads = net.flatten_grads(&gw, &gb);
            let mut params = net.flat_params();
            opt.update(&mut params, &grads);
            net.set_flat_params(&params);
        }
    }
    Ok(BerDiffModel { net, schedule, n })
}

/// Reverse chain: start from fair coin flips, repeatedly predict the clean
/// bits and sample the exact per-coordinate two-state posterior.
pub fn berdiff_sample(model: &BerDiffModel, count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = model.n;
    let schedule = &model.schedule;
    let mut x = Array2::from_shape_fn((count, n), |_| if rng.uniform() < 0.5 { 1.0 } else { 0.0 });

    for t in (1..=schedule.steps).rev() {
        let mut input = Array2::zeros((count, n + TIME_EMBED_DIM));
        input.slice_mut(ndarray::s![.., ..n]).assign(&x);
        let emb = time_embedding(t, TIME_EMBED_DIM);
        for row in 0..count {
            for (i, &e) in emb.iter().enumerate() {
                input[[row, n + i]] = e;
            }
        }
        let logits = model.net.forward(&input);
        let beta = schedule.beta_at(t);
        let ab_prev = schedule.alpha_bar_at(t - 1);
        for row in 0..count {
            for i in 0..n {
                let p0 = 1.0 / (1.0 + (-logits[[row, i]]).exp());
                // marginal P(x_{t-1} = 1) under the predicted clean bit
                let q1 = 0.5 + (p0 - 0.5) * ab_prev;
                let xt = x[[row, i]];
                let like = |v: f64| if xt == v { 1.0 - beta } else { beta };
                let w1 = like(1.0) * q1;
                let w0 = like(0.0) * (1.0 - q1);
                let p = w1 / (w1 + w0);
                x[[row, i]] = if rng.uniform() < p { 1.0 } else { 0.0 };
            }
        }
    }
    (0..count).map(|row| x.row(row).to_vec()).collect()
}

pub fn berdiff_generate(
    h: &IncidenceStructure,
    config: &BaselineConfig,
) -> Result<GeneratedHypergraph, BaselineError> {
    let model = berdiff_train(h, config)?;
    let mut rng = Rng::stream(config.seed, 0x4247);
    let vectors = berdiff_sample(&model, config.m_tilde.unwrap_or(h.m()), &mut rng);
    crate::baselines::assemble(h.n(), &vectors, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_bar_products_and_marginal() {
        let s = FlipSchedule::from_beta(vec![0.1, 0.1]).unwrap();
        assert_relative_eq!(s.alpha_bar_at(2), 0.64, epsilon = 1e-15);
        assert_relative_eq!(berdiff_marginal_prob(1.0, 2, &s), 0.82, epsilon = 1e-15);
        // full mixing and no flips
        assert_eq!(berdiff_marginal_prob(0.0, 0, &s), 0.0);
        assert_eq!(berdiff_marginal_prob(1.0, 0, &s), 1.0);
    }

    #[test]
    fn invalid_schedules_rejected() {
        assert!(FlipSchedule::from_beta(vec![]).is_err());
        assert!(FlipSchedule::from_beta(vec![0.0]).is_err());
        assert!(FlipSchedule::from_beta(vec![0.5]).is_err());
        assert!(FlipSchedule::linear(0, 0.1, 0.2).is_err());
    }

    #[test]
    fn marginal_matches_stepwise_simulation() {
        // simulate the T-step chain bit by bit and compare frequencies with
        // the closed form
        let s = FlipSchedule::linear(8, 0.02, 0.3).unwrap();
        let mut rng = Rng::seeded(17);
        let nmc = 10_000;
        for &x0 in &[0.0, 1.0] {
            let mut ones = 0usize;
            for _ in 0..nmc {
                let mut x = vec![x0];
                for t in 1..=s.steps {
                    x = berdiff_step(&x, t, &s, &mut rng);
                }
                if x[0] == 1.0 {
                    ones += 1;
                }
            }
            let p = berdiff_marginal_prob(x0, s.steps, &s);
            let se = (p * (1.0 - p) / nmc as f64).sqrt();
            let freq = ones as f64 / nmc as f64;
            assert!((freq - p).abs() < 3.0 * se, "x0={x0}: freq={freq} p={p}");
        }
    }

    #[test]
    fn bce_at_matched_logits_equals_bit_entropy() {
        // constant dataset with bit frequency p: the optimal constant logit
        // ln(p/(1-p)) attains the entropy of the bits
        let p = 0.3f64;
        let logit = (p / (1.0 - p)).ln();
        let targets = Array2::from_shape_fn((10, 1), |(r, _)| if r < 3 { 1.0 } else { 0.0 });
        let logits = Array2::from_elem((10, 1), logit);
        let entropy = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
        assert_relative_eq!(bce_loss(&logits, &targets), entropy, epsilon = 1e-12);
        // any other constant logit does worse
        let worse = Array2::from_elem((10, 1), logit + 1.0);
        assert!(bce_loss(&worse, &targets) > entropy);
    }

    fn tiny_config() -> BaselineConfig {
        BaselineConfig {
            diffusion: crate::diffusion::DiffusionConfig {
                epochs: 5,
                batch_size: 8,
                hidden_dim: 16,
                num_layers: 2,
                steps: 10,
                dropout: 0.0,
                ..Default::default()
            },
            m_tilde: Some(12),
            min_edge_size: 0,
            seed: 3,
        }
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let h = IncidenceStructure::new(6, vec![vec![0, 1, 2], vec![2, 3], vec![1, 4, 5]]).unwrap();
        let cfg = tiny_config();
        let a = berdiff_generate(&h, &cfg).unwrap();
        let b = berdiff_generate(&h, &cfg).unwrap();
        assert_eq!(a.structure, b.structure);
        assert_eq!(a.structure.m() + a.filtered_edges, 12);
        assert_eq!(a.structure.n(), 6);
    }
}
