//! Denoiser checkpoint file: architecture/schedule header, standardization
//! rows, then one flat parameter per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diffusion::net::{Mlp, TIME_EMBED_DIM};
use crate::diffusion::schedule::linear_schedule;
use crate::diffusion::train::DenoisingModel;
use crate::numkit::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint parse error: {0}")]
    Parse(String),
}

pub fn save_model(path: &Path, model: &DenoisingModel) -> Result<(), CheckpointError> {
    let hidden_dim = model.net.weights[0].ncols();
    let num_layers = model.net.weights.len() - 1;
    let mut out = String::new();
    let _ = writeln!(out, "# hyvint denoiser checkpoint v1");
    let _ = writeln!(
        out,
        "# data_dim={} hidden_dim={} num_layers={} steps={} dropout={:e}",
        model.data_dim, hidden_dim, num_layers, model.schedule.steps, model.net.dropout
    );
    let _ = writeln!(
        out,
        "# beta_start={:e} beta_end={:e}",
        model.schedule.kappa_at(1),
        model.schedule.kappa_at(model.schedule.steps)
    );
    let joined = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "# mean={}", joined(&model.mean));
    let _ = writeln!(out, "# std={}", joined(&model.std));
    for p in model.net.flat_params() {
        let _ = writeln!(out, "{p:e}");
    }
    fs::write(path, out).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<DenoisingModel, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut data_dim = None;
    let mut hidden_dim = None;
    let mut num_layers = None;
    let mut steps = None;
    let mut dropout = 0.0;
    let mut beta_start = None;
    let mut beta_end = None;
    let mut mean: Option<Vec<f64>> = None;
    let mut std: Option<Vec<f64>> = None;
    let mut params = Vec::new();

    let parse_f64s = |s: &str| -> Result<Vec<f64>, CheckpointError> {
        s.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| CheckpointError::Parse(format!("bad value {t:?}"))))
            .collect()
    };

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("mean=") {
                mean = Some(parse_f64s(v)?);
            } else if let Some(v) = rest.strip_prefix("std=") {
                std = Some(parse_f64s(v)?);
            } else if rest.contains('=') {
                for tok in rest.split_whitespace() {
                    let Some((key, val)) = tok.split_once('=') else { continue };
                    let f: f64 = val
                        .parse()
                        .map_err(|_| CheckpointError::Parse(format!("bad header value {val:?}")))?;
                    match key {
                        "data_dim" => data_dim = Some(f as usize),
                        "hidden_dim" => hidden_dim = Some(f as usize),
                        "num_layers" => num_layers = Some(f as usize),
                        "steps" => steps = Some(f as usize),
                        "dropout" => dropout = f,
                        "beta_start" => beta_start = Some(f),
                        "beta_end" => beta_end = Some(f),
                        _ => {}
                    }
                }
            }
            continue;
        }
        params.push(
            line.parse::<f64>()
                .map_err(|_| CheckpointError::Parse(format!("bad parameter line {line:?}")))?,
        );
    }

    let missing = |name: &str| CheckpointError::Parse(format!("missing header field {name}"));
    let data_dim = data_dim.ok_or_else(|| missing("data_dim"))?;
    let hidden_dim = hidden_dim.ok_or_else(|| missing("hidden_dim"))?;
    let num_layers = num_layers.ok_or_else(|| missing("num_layers"))?;
    let steps = steps.ok_or_else(|| missing("steps"))?;
    let beta_start = beta_start.ok_or_else(|| missing("beta_start"))?;
    let beta_end = beta_end.ok_or_else(|| missing("beta_end"))?;
    let mean = mean.ok_or_else(|| missing("mean"))?;
    let std = std.ok_or_else(|| missing("std"))?;
    if mean.len() != data_dim || std.len() != data_dim {
        return Err(CheckpointError::Parse("standardization length mismatch".into()));
    }

    let mut scratch = Rng::seeded(0);
    let mut net = Mlp::new(
        data_dim + TIME_EMBED_DIM,
        hidden_dim,
        num_layers,
        data_dim,
        dropout,
        &mut scratch,
    );
    if params.len() != net.param_count() {
        return Err(CheckpointError::Parse(format!(
            "expected {} parameters, got {}",
            net.param_count(),
            params.len()
        )));
    }
    net.set_flat_params(&params);
    let schedule = linear_schedule(steps, beta_start, beta_end)
        .map_err(|e| CheckpointError::Parse(e.to_string()))?;
    Ok(DenoisingModel { net, schedule, data_dim, mean, std })
}
