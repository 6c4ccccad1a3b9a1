//! Stage 3 and end-to-end orchestration: decode sampled latent vectors to
//! Gamma posterior means, form intensities, Bernoulli-sample incidences,
//! filter undersized edges, and assemble the generated hypergraph.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diffusion::{
    load_model, reverse_sample, save_model, train_denoiser, DenoisingModel, DiffusionConfig,
};
use crate::hypercore::IncidenceStructure;
use crate::numkit::Rng;
use crate::vi::{
    fit_variational, load_state, save_state, FitConfig, LatentVector, PriorSpec, VariationalState,
    LOG_PARAM_BOUND,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("latent vector {index} has length {actual}, expected {expected}")]
    BadLatentLength { index: usize, expected: usize, actual: usize },
    #[error("latent vector {index} has a non-finite entry")]
    NonFiniteLatent { index: usize },
    #[error("intensity must be nonnegative, got {0}")]
    NegativeIntensity(f64),
    #[error("generation spec: m_tilde must be at least 1")]
    BadSpec,
    #[error("stage 1 (variational fit): {0}")]
    Stage1(#[from] crate::vi::FitError),
    #[error("stage 2 (denoiser training): {0}")]
    Stage2(#[from] crate::diffusion::TrainError),
    #[error("checkpoint: {0}")]
    ViCheckpoint(#[from] crate::vi::CheckpointError),
    #[error("checkpoint: {0}")]
    DiffusionCheckpoint(#[from] crate::diffusion::CheckpointError),
    #[error("structure: {0}")]
    Structure(#[from] crate::hypercore::HypergraphError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("latent table parse error: {0}")]
    LatentParse(String),
}

/// Stage-3 sampling settings.
#[derive(Debug, Clone)]
pub struct GenerationSpec {
    pub m_tilde: usize,
    pub min_edge_size: usize,
    pub seed: u64,
}

impl GenerationSpec {
    pub fn new(m_tilde: usize, min_edge_size: usize, seed: u64) -> Result<Self, PipelineError> {
        if m_tilde < 1 {
            return Err(PipelineError::BadSpec);
        }
        Ok(GenerationSpec { m_tilde, min_edge_size, seed })
    }
}

/// Posterior means for one sampled hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedEdge {
    pub rho_star: f64,
    pub beta_star: Vec<f64>,
}

/// Inverts the log-parameter encoding back to Gamma shapes/rates and takes
/// posterior means. Shapes and rates are clamped to [e^-12, e^12] first so a
/// wild diffusion sample cannot produce an overflowing ratio.
pub fn decode_latents(zs: &[LatentVector], k: usize) -> Result<Vec<DecodedEdge>, PipelineError> {
    let expected = 2 * k + 2;
    zs.iter()
        .enumerate()
        .map(|(index, z)| {
            if z.len() != expected {
                return Err(PipelineError::BadLatentLength { index, expected, actual: z.len() });
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(PipelineError::NonFiniteLatent { index });
            }
            let val = |log: f64| log.clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND).exp();
            let rho_star = val(z[0]) / val(z[1]);
            let beta_star = (0..k).map(|kk| val(z[2 + 2 * kk]) / val(z[3 + 2 * kk])).collect();
            Ok(DecodedEdge { rho_star, beta_star })
        })
        .collect()
}

/// Node-edge intensity: activity product times embedding dot product.
pub fn intensity(alpha_hat: f64, theta_hat: &[f64], rho_star: f64, beta_star: &[f64]) -> f64 {
    let dot: f64 = theta_hat.iter().zip(beta_star).map(|(t, b)| t * b).sum();
    alpha_hat * rho_star * dot
}

/// Incidence probability 1 - e^{-lambda}, stable for tiny lambda.
pub fn incidence_probability(lambda: f64) -> Result<f64, PipelineError> {
    if !(lambda >= 0.0) {
        return Err(PipelineError::NegativeIntensity(lambda));
    }
    Ok(-(-lambda).exp_m1())
}

/// Output of stage 3: the surviving structure and how many raw edges fell
/// under the size filter.
#[derive(Debug, Clone)]
pub struct GeneratedHypergraph {
    pub structure: IncidenceStructure,
    pub filtered_edges: usize,
}

const EDGE_STREAM_BASE: u64 = 0x4544_0000;
const SAMPLE_STREAM: u64 = 0x5331;

/// Bernoulli-samples incidences for each decoded edge against the fitted node
/// posteriors, then drops edges below the size threshold. Each hyperedge uses
/// an independent substream keyed by (seed, edge index), and a uniform is
/// drawn for every node whether or not it is included, so raising any
/// intensity at a fixed seed can only add members.
pub fn sample_incidences(
    alpha_hat: &[f64],
    theta_hat: &[Vec<f64>],
    decoded: &[DecodedEdge],
    spec: &GenerationSpec,
) -> Result<GeneratedHypergraph, PipelineError> {
    let n = alpha_hat.len();
    let mut edges = Vec::with_capacity(decoded.len());
    let mut filtered = 0usize;
    for (j, edge) in decoded.iter().enumerate() {
        let mut rng = Rng::stream(spec.seed, EDGE_STREAM_BASE + j as u64);
        let mut members = Vec::new();
        for i in 0..n {
            let lambda = intensity(alpha_hat[i], &theta_hat[i], edge.rho_star, &edge.beta_star);
            let p = incidence_probability(lambda)?;
            if rng.uniform() < p {
                members.push(i);
            }
        }
        if members.len() < spec.min_edge_size {
            filtered += 1;
        } else {
            edges.push(members);
        }
    }
    Ok(GeneratedHypergraph { structure: IncidenceStructure::new(n, edges)?, filtered_edges: filtered })
}

/// Full stage 3: reverse-sample m_tilde latent vectors, decode them, and
/// Bernoulli-sample the incidence structure.
pub fn generate(
    state: &VariationalState,
    model: &DenoisingModel,
    spec: &GenerationSpec,
) -> Result<GeneratedHypergraph, PipelineError> {
    if spec.m_tilde < 1 {
        return Err(PipelineError::BadSpec);
    }
    let mut rng = Rng::stream(spec.seed, SAMPLE_STREAM);
    let zs = reverse_sample(model, spec.m_tilde, &mut rng);
    let decoded = decode_latents(&zs, state.k())?;
    let alpha_hat: Vec<f64> = state.node_activity.iter().map(|f| f.mean()).collect();
    let theta_hat: Vec<Vec<f64>> = (0..state.n())
        .map(|i| (0..state.k()).map(|kk| state.theta(i, kk).mean()).collect())
        .collect();
    sample_incidences(&alpha_hat, &theta_hat, &decoded, spec)
}

/// Paths of everything persisted by a full run.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub vi_checkpoint: PathBuf,
    pub latent_table: PathBuf,
    pub diffusion_checkpoint: PathBuf,
    pub generated_edges: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug)]
pub struct RunOutput {
    pub generated: GeneratedHypergraph,
    pub artifacts: Artifacts,
}

pub fn save_latents(path: &Path, latents: &[LatentVector]) -> Result<(), PipelineError> {
    let dim = latents.first().map_or(0, |z| z.len());
    let mut out = String::new();
    let _ = writeln!(out, "# hyvint latent table v1");
    let _ = writeln!(out, "# m={} dim={}", latents.len(), dim);
    for z in latents {
        let row = z.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{row}");
    }
    fs::write(path, out).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_latents(path: &Path) -> Result<Vec<LatentVector>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| PipelineError::LatentParse(format!("bad value {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    if let Some(first) = rows.first() {
        let dim = first.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(PipelineError::LatentParse("ragged rows".into()));
        }
    }
    Ok(rows)
}

/// Runs the three stages in order on one observed hypergraph and persists the
/// variational checkpoint, latent table, denoiser checkpoint, generated
/// structure, and a plain-text manifest under `out_dir`. When `m_tilde` is
/// unset the generated edge count matches the observed one.
pub fn run_hyvint(
    h: &IncidenceStructure,
    prior: &PriorSpec,
    fit_config: &FitConfig,
    diffusion_config: &DiffusionConfig,
    m_tilde: Option<usize>,
    min_edge_size: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<RunOutput, PipelineError> {
    fs::create_dir_all(out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let artifacts = Artifacts {
        vi_checkpoint: out_dir.join("variational.ckpt"),
        latent_table: out_dir.join("latents.tsv"),
        diffusion_checkpoint: out_dir.join("denoiser.ckpt"),
        generated_edges: out_dir.join("generated.edges"),
        manifest: out_dir.join("manifest.txt"),
    };

    let (state, trace) = fit_variational(h, prior, fit_config)?;
    save_state(&artifacts.vi_checkpoint, &state, fit_config.seed, prior)?;
    let latents = state.export_latents();
    save_latents(&artifacts.latent_table, &latents)?;

    let (model, _) = train_denoiser(&latents, diffusion_config)?;
    save_model(&artifacts.diffusion_checkpoint, &model)?;

    let spec = GenerationSpec::new(m_tilde.unwrap_or(h.m()), min_edge_size, seed)?;
    let generated = generate(&state, &model, &spec)?;
    generated.structure.write_edge_lines(&artifacts.generated_edges)?;

    let mut manifest = String::new();
    let _ = writeln!(manifest, "vi_checkpoint={}", artifacts.vi_checkpoint.display());
    let _ = writeln!(manifest, "latent_table={}", artifacts.latent_table.display());
    let _ = writeln!(manifest, "diffusion_checkpoint={}", artifacts.diffusion_checkpoint.display());
    let _ = writeln!(manifest, "generated_edges={}", artifacts.generated_edges.display());
    let _ = writeln!(manifest, "fit_seed={}", fit_config.seed);
    let _ = writeln!(manifest, "diffusion_seed={}", diffusion_config.seed);
    let _ = writeln!(manifest, "generation_seed={}", spec.seed);
    let _ = writeln!(manifest, "k={}", fit_config.k);
    let _ = writeln!(manifest, "m_tilde={}", spec.m_tilde);
    let _ = writeln!(manifest, "min_edge_size={}", spec.min_edge_size);
    let _ = writeln!(manifest, "fit_iterations={}", trace.iterations);
    let _ = writeln!(manifest, "final_objective={:e}", trace.final_elbo);
    let _ = writeln!(manifest, "filtered_edges={}", generated.filtered_edges);
    fs::write(&artifacts.manifest, manifest).map_err(|source| PipelineError::Io {
        path: artifacts.manifest.display().to_string(),
        source,
    })?;

    Ok(RunOutput { generated, artifacts })
}

/// Stage 3 only, from persisted stage-1 and stage-2 checkpoints.
pub fn resume_generate(
    vi_checkpoint: &Path,
    diffusion_checkpoint: &Path,
    spec: &GenerationSpec,
) -> Result<GeneratedHypergraph, PipelineError> {
    let loaded = load_state(vi_checkpoint)?;
    let model = load_model(diffusion_checkpoint)?;
    generate(&loaded.state, &model, spec)
}
