//! Fitted-state checkpoint file: a flat text table of
//! `role index k log_shape log_rate` rows under a header carrying
//! (n, m, K, seed, prior).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::vi::state::{GammaFactor, PriorSpec, VariationalState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn save_state(
    path: &Path,
    state: &VariationalState,
    seed: u64,
    prior: &PriorSpec,
) -> Result<(), CheckpointError> {
    let mut out = String::new();
    let _ = writeln!(out, "# hyvint variational checkpoint v1");
    let _ = writeln!(out, "# n={} m={} k={} seed={}", state.n(), state.m(), state.k(), seed);
    let _ = writeln!(
        out,
        "# prior={:e} {:e} {:e} {:e} {:e} {:e} {:e} {:e}",
        prior.a_alpha,
        prior.b_alpha,
        prior.a_theta,
        prior.b_theta,
        prior.a_rho,
        prior.b_rho,
        prior.a_beta,
        prior.b_beta
    );
    let _ = writeln!(out, "# role index k log_shape log_rate");
    let mut row = |role: &str, index: usize, k: usize, f: &GammaFactor| {
        let _ = writeln!(out, "{role} {index} {k} {:e} {:e}", f.log_shape(), f.log_rate());
    };
    for (i, f) in state.node_activity.iter().enumerate() {
        row("node_activity", i, 0, f);
    }
    for i in 0..state.n() {
        for k in 0..state.k() {
            row("node_embed", i, k, state.theta(i, k));
        }
    }
    for (j, f) in state.edge_activity.iter().enumerate() {
        row("edge_activity", j, 0, f);
    }
    for j in 0..state.m() {
        for k in 0..state.k() {
            row("edge_embed", j, k, state.beta(j, k));
        }
    }
    fs::write(path, out).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub struct LoadedState {
    pub state: VariationalState,
    pub seed: u64,
    pub prior: PriorSpec,
}

pub fn load_state(path: &Path) -> Result<LoadedState, CheckpointError> {
    let text = fs::read_to_string(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut n = None;
    let mut m = None;
    let mut k = None;
    let mut seed = 0u64;
    let mut prior = PriorSpec::default();
    let mut rows: Vec<(String, usize, usize, f64, f64)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CheckpointError::Parse { line: lineno + 1, message };
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest.starts_with("n=") {
                for tok in rest.split_whitespace() {
                    let (key, val) = tok.split_once('=').ok_or_else(|| err(format!("bad header token {tok:?}")))?;
                    let parsed: u64 = val.parse().map_err(|_| err(format!("bad header value {val:?}")))?;
                    match key {
                        "n" => n = Some(parsed as usize),
                        "m" => m = Some(parsed as usize),
                        "k" => k = Some(parsed as usize),
                        "seed" => seed = parsed,
                        _ => {}
                    }
                }
            } else if let Some(vals) = rest.strip_prefix("prior=") {
                let parts: Vec<f64> = vals
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad prior value {t:?}"))))
                    .collect::<Result<_, _>>()?;
                if parts.len() != 8 {
                    return Err(err("prior header needs 8 values".into()));
                }
                prior = PriorSpec {
                    a_alpha: parts[0],
                    b_alpha: parts[1],
                    a_theta: parts[2],
                    b_theta: parts[3],
                    a_rho: parts[4],
                    b_rho: parts[5],
                    a_beta: parts[6],
                    b_beta: parts[7],
                };
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(err(format!("expected 5 fields, got {}", parts.len())));
        }
        let index: usize = parts[1].parse().map_err(|_| err(format!("bad index {:?}", parts[1])))?;
        let kk: usize = parts[2].parse().map_err(|_| err(format!("bad k {:?}", parts[2])))?;
        let ls: f64 = parts[3].parse().map_err(|_| err(format!("bad log_shape {:?}", parts[3])))?;
        let lr: f64 = parts[4].parse().map_err(|_| err(format!("bad log_rate {:?}", parts[4])))?;
        rows.push((parts[0].to_string(), index, kk, ls, lr));
    }

    let n = n.ok_or(CheckpointError::Parse { line: 0, message: "missing n header".into() })?;
    let m = m.ok_or(CheckpointError::Parse { line: 0, message: "missing m header".into() })?;
    let k = k.ok_or(CheckpointError::Parse { line: 0, message: "missing k header".into() })?;

    let mut state = VariationalState::unit(n, m, k);
    for (role, index, kk, ls, lr) in rows {
        let f = GammaFactor::from_logs(ls, lr);
        let bad = || CheckpointError::Parse {
            line: 0,
            message: format!("row ({role} {index} {kk}) out of range for n={n} m={m} k={k}"),
        };
        match role.as_str() {
            "node_activity" => *state.node_activity.get_mut(index).ok_or_else(bad)? = f,
            "node_embed" => {
                if index >= n || kk >= k {
                    return Err(bad());
                }
                state.node_embed[index * k + kk] = f;
            }
            "edge_activity" => *state.edge_activity.get_mut(index).ok_or_else(bad)? = f,
            "edge_embed" => {
                if index >= m || kk >= k {
                    return Err(bad());
                }
                state.edge_embed[index * k + kk] = f;
            }
            other => {
                return Err(CheckpointError::Parse {
                    line: 0,
                    message: format!("unknown role {other:?}"),
                })
            }
        }
    }
    Ok(LoadedState { state, seed, prior })
}
