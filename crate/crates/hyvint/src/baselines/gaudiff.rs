//! Gaussian diffusion baseline: membership vectors mapped to {-1, +1},
//! modeled with the standard continuous denoiser, and decoded back to bits
//! by Bernoulli sampling at clamp((x + 1) / 2).

use crate::baselines::{BaselineConfig, BaselineError};
use crate::diffusion::{reverse_sample, train_denoiser};
use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use crate::pipeline::GeneratedHypergraph;

/// Per-coordinate decode probability.
pub fn decode_probability(x: f64) -> f64 {
    ((x + 1.0) / 2.0).clamp(0.0, 1.0)
}

pub fn gaudiff_generate(
    h: &IncidenceStructure,
    config: &BaselineConfig,
) -> Result<GeneratedHypergraph, BaselineError> {
    if h.m() == 0 {
        return Err(BaselineError::EmptyInput);
    }
    let dense = h.dense();
    let signed: Vec<Vec<f64>> = (0..h.m())
        .map(|j| dense.column(j).iter().map(|&b| 2.0 * b - 1.0).collect())
        .collect();
    let (model, _) = train_denoiser(&signed, &config.diffusion)?;
    let mut rng = Rng::stream(config.seed, 0x4744);
    let samples = reverse_sample(&model, config.m_tilde.unwrap_or(h.m()), &mut rng);
    let probs: Vec<Vec<f64>> = samples
        .iter()
        .map(|v| v.iter().map(|&x| decode_probability(x)).collect())
        .collect();
    crate::baselines::assemble_from_probs(h.n(), &probs, config)
}
