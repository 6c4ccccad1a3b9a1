//! Reference generators: bit-flip diffusion, Gaussian diffusion on signed
//! membership vectors, and nonnegative factorization with latent diffusion.

mod berdiff;
mod gaudiff;
mod nmf;

use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use crate::pipeline::GeneratedHypergraph;
use thiserror::Error;

pub use berdiff::{
    bce_loss, berdiff_forward, berdiff_generate, berdiff_marginal_prob, berdiff_sample,
    berdiff_step, berdiff_train, BerDiffModel, FlipSchedule,
};
pub use gaudiff::{decode_probability, gaudiff_generate};
pub use nmf::{nmf_fit, nmfdiff_generate, squash, NmfConfig};

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("flip schedule must have steps in (0, 1/2)")]
    BadFlipSchedule,
    #[error("input hypergraph has no edges")]
    EmptyInput,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("factorization needs K >= 1")]
    BadNmfConfig,
    #[error("factorization objective increased: {previous} -> {current}")]
    NmfDiverged { previous: f64, current: f64 },
    #[error("diffusion: {0}")]
    Diffusion(#[from] crate::diffusion::TrainError),
    #[error("structure: {0}")]
    Structure(#[from] crate::hypercore::HypergraphError),
}

/// Shared settings for baseline generation runs.
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub diffusion: crate::diffusion::DiffusionConfig,
    /// generated edge count; defaults to the observed count
    pub m_tilde: Option<usize>,
    pub min_edge_size: usize,
    pub seed: u64,
}

/// Turns sampled bit vectors into a filtered structure.
pub(crate) fn assemble(
    n: usize,
    vectors: &[Vec<f64>],
    config: &BaselineConfig,
) -> Result<GeneratedHypergraph, BaselineError> {
    let mut edges = Vec::with_capacity(vectors.len());
    let mut filtered = 0usize;
    for v in vectors {
        let members: Vec<usize> = v.iter().enumerate().filter(|(_, &b)| b > 0.5).map(|(i, _)| i).collect();
        if members.len() < config.min_edge_size {
            filtered += 1;
        } else {
            edges.push(members);
        }
    }
    Ok(GeneratedHypergraph {
        structure: IncidenceStructure::new(n, edges)?,
        filtered_edges: filtered,
    })
}

const DECODE_EDGE_STREAM_BASE: u64 = 0x4243_0000;

/// Bernoulli-samples bit vectors from per-coordinate probabilities, one
/// keyed substream per generated edge, then filters by size.
pub(crate) fn assemble_from_probs(
    n: usize,
    probs: &[Vec<f64>],
    config: &BaselineConfig,
) -> Result<GeneratedHypergraph, BaselineError> {
    let mut edges = Vec::with_capacity(probs.len());
    let mut filtered = 0usize;
    for (j, p) in probs.iter().enumerate() {
        let mut rng = Rng::stream(config.seed, DECODE_EDGE_STREAM_BASE + j as u64);
        let members: Vec<usize> = (0..n).filter(|&i| rng.uniform() < p[i]).collect();
        if members.len() < config.min_edge_size {
            filtered += 1;
        } else {
            edges.push(members);
        }
    }
    Ok(GeneratedHypergraph {
        structure: IncidenceStructure::new(n, edges)?,
        filtered_edges: filtered,
    })
}
