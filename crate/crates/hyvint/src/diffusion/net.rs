//! Multilayer perceptron with SiLU activations, inverted dropout, and a
//! sinusoidal time embedding concatenated to the input. Forward and backward
//! passes are explicit so gradients can be checked against finite
//! differences.

use ndarray::{Array1, Array2, Axis};

use crate::numkit::Rng;

pub const TIME_EMBED_DIM: usize = 32;

/// Sinusoidal embedding of an integer diffusion step.
pub fn time_embedding(t: usize, dim: usize) -> Vec<f64> {
    let mut emb = vec![0.0; dim];
    let half = dim / 2;
    for i in 0..half {
        let freq = (-(2.0 * i as f64 / dim as f64) * 10_000f64.ln()).exp();
        emb[2 * i] = (t as f64 * freq).sin();
        emb[2 * i + 1] = (t as f64 * freq).cos();
    }
    emb
}

fn silu(x: f64) -> f64 {
    x / (1.0 + (-x).exp())
}

fn silu_deriv(x: f64) -> f64 {
    let s = 1.0 / (1.0 + (-x).exp());
    s * (1.0 + x * (1.0 - s))
}

/// Noise-prediction network: input dim = data dim + time-embedding width,
/// `num_layers` hidden layers of `hidden_dim` units, output = data dim.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub dropout: f64,
}

/// Per-layer intermediates kept for the backward pass.
pub struct ForwardCache {
    /// inputs to each linear layer
    inputs: Vec<Array2<f64>>,
    /// pre-activations of hidden layers
    pre_acts: Vec<Array2<f64>>,
    /// dropout masks (already scaled) for hidden layers, empty in eval mode
    masks: Vec<Option<Array2<f64>>>,
}

impl Mlp {
    pub fn new(
        input_dim: usize,
        hidden_dim: usize,
        num_layers: usize,
        output_dim: usize,
        dropout: f64,
        rng: &mut Rng,
    ) -> Self {
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat(hidden_dim).take(num_layers));
        dims.push(output_dim);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = (2.0 / (fan_in + fan_out) as f64).sqrt();
            let mat = Array2::from_shape_fn((fan_in, fan_out), |_| scale * rng.sample_gaussian());
            weights.push(mat);
            biases.push(Array1::zeros(fan_out));
        }
        Mlp { weights, biases, dropout }
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("nonempty").ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.first().expect("nonempty").nrows()
    }

    /// Eval-mode forward (no dropout).
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_impl(x, None).0
    }

    /// Training-mode forward with fresh dropout masks; returns the cache
    /// needed by `backward`.
    pub fn forward_train(&self, x: &Array2<f64>, rng: &mut Rng) -> (Array2<f64>, ForwardCache) {
        self.forward_impl(x, Some(rng))
    }

    fn forward_impl(&self, x: &Array2<f64>, mut rng: Option<&mut Rng>) -> (Array2<f64>, ForwardCache) {
        let last = self.weights.len() - 1;
        let mut h = x.clone();
        let mut cache = ForwardCache { inputs: Vec::new(), pre_acts: Vec::new(), masks: Vec::new() };
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            cache.inputs.push(h.clone());
            let mut z = h.dot(w);
            z += &b.view().insert_axis(Axis(0));
            if l < last {
                cache.pre_acts.push(z.clone());
                h = z.mapv(silu);
                let mask = match rng.as_deref_mut() {
                    Some(rng) if self.dropout > 0.0 => {
                        let keep = 1.0 - self.dropout;
                        let mask = Array2::from_shape_fn(h.dim(), |_| {
                            if rng.uniform() < keep {
                                1.0 / keep
                            } else {
                                0.0
                            }
                        });
                        h *= &mask;
                        Some(mask)
                    }
                    _ => None,
                };
                cache.masks.push(mask);
            } else {
                h = z;
            }
        }
        (h, cache)
    }

    /// Backpropagates `grad_out` (dL/d output) through the cached forward
    /// pass; returns per-parameter gradients in the same shapes as the
    /// weights/biases.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_out: &Array2<f64>,
    ) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let last = self.weights.len() - 1;
        let mut grad_w: Vec<Array2<f64>> = self.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
        let mut grad_b: Vec<Array1<f64>> = self.biases.iter().map(|b| Array1::zeros(b.dim())).collect();

        let mut g = grad_out.clone();
        for l in (0..=last).rev() {
            grad_w[l] = cache.inputs[l].t().dot(&g);
            grad_b[l] = g.sum_axis(Axis(0));
            if l > 0 {
                let mut gh = g.dot(&self.weights[l].t());
                if let Some(mask) = &cache.masks[l - 1] {
                    gh *= mask;
                }
                let dz = cache.pre_acts[l - 1].mapv(silu_deriv);
                gh *= &dz;
                g = gh;
            }
        }
        (grad_w, grad_b)
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for w in &self.weights {
            out.extend(w.iter());
        }
        for b in &self.biases {
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut idx = 0;
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v = flat[idx];
                idx += 1;
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v = flat[idx];
                idx += 1;
            }
        }
        assert_eq!(idx, flat.len());
    }

    pub fn flatten_grads(&self, grad_w: &[Array2<f64>], grad_b: &[Array1<f64>]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for w in grad_w {
            out.extend(w.iter());
        }
        for b in grad_b {
            out.extend(b.iter());
        }
        out
    }
}

/// Adam with decoupled weight decay over a flat parameter vector.
pub struct AdamW {
    pub lr: f64,
    pub weight_decay: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m1: Vec<f64>,
    m2: Vec<f64>,
    step: usize,
}

impl AdamW {
    pub fn new(dim: usize, lr: f64, weight_decay: f64) -> Self {
        AdamW {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m1: vec![0.0; dim],
            m2: vec![0.0; dim],
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m1[i] = self.beta1 * self.m1[i] + (1.0 - self.beta1) * grads[i];
            self.m2[i] = self.beta2 * self.m2[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let step = self.lr * (self.m1[i] / bc1) / ((self.m2[i] / bc2).sqrt() + self.eps);
            params[i] -= step + self.lr * self.weight_decay * params[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backprop_matches_finite_differences() {
        // 2-layer toy net, MSE head, no dropout
        let mut rng = Rng::seeded(21);
        let mut net = Mlp::new(3, 5, 2, 3, 0.0, &mut rng);
        let x = Array2::from_shape_fn((4, 3), |_| rng.sample_gaussian());
        let target = Array2::from_shape_fn((4, 3), |_| rng.sample_gaussian());

        let loss_of = |net: &Mlp| -> f64 {
            let out = net.forward(&x);
            (&out - &target).mapv(|d| d * d).sum() / (out.len() as f64)
        };

        let (out, cache) = net.forward_train(&x, &mut rng);
        let grad_out = (&out - &target).mapv(|d| 2.0 * d / (out.len() as f64));
        let (gw, gb) = net.backward(&cache, &grad_out);
        let analytic = net.flatten_grads(&gw, &gb);

        let mut params = net.flat_params();
        let h = 1e-5;
        for idx in (0..params.len()).step_by(7) {
            let orig = params[idx];
            params[idx] = orig + h;
            net.set_flat_params(&params);
            let up = loss_of(&net);
            params[idx] = orig - h;
            net.set_flat_params(&params);
            let down = loss_of(&net);
            params[idx] = orig;
            net.set_flat_params(&params);
            let fd = (up - down) / (2.0 * h);
            let denom = fd.abs().max(analytic[idx].abs()).max(1e-8);
            assert!(
                (fd - analytic[idx]).abs() / denom < 1e-4,
                "param {idx}: fd={fd} analytic={}",
                analytic[idx]
            );
        }
    }

    #[test]
    fn dropout_zeroes_and_rescales() {
        let mut rng = Rng::seeded(22);
        let net = Mlp::new(2, 64, 1, 2, 0.5, &mut rng);
        let x = Array2::ones((1, 2));
        let (_, cache) = net.forward_train(&x, &mut rng);
        let mask = cache.masks[0].as_ref().unwrap();
        let zeros = mask.iter().filter(|&&v| v == 0.0).count();
        let scaled = mask.iter().filter(|&&v| (v - 2.0).abs() < 1e-12).count();
        assert_eq!(zeros + scaled, mask.len());
        assert!(zeros > 5 && scaled > 5);
        // eval mode has no masks
        let out_a = net.forward(&x);
        let out_b = net.forward(&x);
        assert_eq!(out_a, out_b);
    }

    #[test]
    fn time_embedding_properties() {
        let e = time_embedding(0, TIME_EMBED_DIM);
        assert_eq!(e.len(), TIME_EMBED_DIM);
        // t = 0: sin components 0, cos components 1
        assert!(e[0].abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        let a = time_embedding(3, TIME_EMBED_DIM);
        let b = time_embedding(4, TIME_EMBED_DIM);
        assert_ne!(a, b);
    }

    #[test]
    fn flat_param_round_trip() {
        let mut rng = Rng::seeded(23);
        let mut net = Mlp::new(3, 4, 2, 3, 0.0, &mut rng);
        let flat = net.flat_params();
        let mut changed = flat.clone();
        changed[0] += 1.0;
        net.set_flat_params(&changed);
        assert_eq!(net.flat_params(), changed);
    }
}
