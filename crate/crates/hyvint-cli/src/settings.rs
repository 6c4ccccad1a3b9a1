//! Resolved run settings: built from defaults, overlaid by an optional
//! key=value config file, then by explicit command-line flags. Every run
//! writes the resolved settings back out as a manifest, which is itself a
//! valid config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hyvint::diffusion::DiffusionConfig;
use hyvint::synthdata::{Link, RhoRange};
use hyvint::vi::{Estimator, FitConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Hyvint,
    HyvintTaylor,
    BerDiff,
    GauDiff,
    NmfDiff,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Hyvint => "hyvint",
            Method::HyvintTaylor => "hyvint-taylor",
            Method::BerDiff => "ber-diff",
            Method::GauDiff => "gau-diff",
            Method::NmfDiff => "nmf-diff",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "hyvint" => Ok(Method::Hyvint),
            "hyvint-taylor" => Ok(Method::HyvintTaylor),
            "ber-diff" => Ok(Method::BerDiff),
            "gau-diff" => Ok(Method::GauDiff),
            "nmf-diff" => Ok(Method::NmfDiff),
            other => Err(CliError::Usage(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
    pub t: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub rho: RhoRange,
    pub link: Link,
    pub method: Method,
    pub m_tilde: Option<usize>,
    pub min_edge_size: usize,
    pub dedup: bool,
    pub max_iters: usize,
    pub vi_lr: f64,
    pub tolerance: f64,
    pub nmf_iters: usize,
    pub nmf_lambda: f64,
    pub nmf_logistic: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 42,
            k: 2,
            n: 200,
            m: 200,
            epochs: 1000,
            batch_size: 64,
            lr: 1e-3,
            weight_decay: 1e-4,
            hidden_dim: 512,
            num_layers: 4,
            dropout: 0.1,
            t: 200,
            beta_start: 1e-4,
            beta_end: 0.02,
            rho: RhoRange::Unit,
            link: Link::Poisson,
            method: Method::Hyvint,
            m_tilde: None,
            min_edge_size: 2,
            dedup: false,
            max_iters: 2000,
            vi_lr: 1e-2,
            tolerance: 1e-8,
            nmf_iters: 500,
            nmf_lambda: 0.0,
            nmf_logistic: false,
        }
    }
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key=value, got {line:?}", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key {key}: bad value {value:?}")))
}

impl Settings {
    /// Overlays values from a parsed config map. Unknown keys are rejected
    /// so typos fail loudly; bench-only keys are skipped by the caller.
    pub fn apply_map(&mut self, map: &BTreeMap<String, String>, ignore: &[&str]) -> Result<(), CliError> {
        for (key, value) in map {
            if ignore.contains(&key.as_str()) {
                continue;
            }
            match key.as_str() {
                "seed" => self.seed = parse_as(key, value)?,
                "K" => self.k = parse_as(key, value)?,
                "n" => self.n = parse_as(key, value)?,
                "m" => self.m = parse_as(key, value)?,
                "epochs" => self.epochs = parse_as(key, value)?,
                "batch_size" => self.batch_size = parse_as(key, value)?,
                "lr" => self.lr = parse_as(key, value)?,
                "weight_decay" => self.weight_decay = parse_as(key, value)?,
                "hidden_dim" => self.hidden_dim = parse_as(key, value)?,
                "num_layers" => self.num_layers = parse_as(key, value)?,
                "dropout" => self.dropout = parse_as(key, value)?,
                "T" => self.t = parse_as(key, value)?,
                "beta_start" => self.beta_start = parse_as(key, value)?,
                "beta_end" => self.beta_end = parse_as(key, value)?,
                "rho" => {
                    self.rho = match value.as_str() {
                        "unit" => RhoRange::Unit,
                        "shifted" => RhoRange::Shifted,
                        other => {
                            return Err(CliError::Usage(format!("rho must be unit|shifted, got {other:?}")))
                        }
                    }
                }
                "link" => {
                    self.link = match value.as_str() {
                        "poisson" => Link::Poisson,
                        "sigmoid" => Link::Sigmoid,
                        other => {
                            return Err(CliError::Usage(format!("link must be poisson|sigmoid, got {other:?}")))
                        }
                    }
                }
                "method" => self.method = Method::parse(value)?,
                "m_tilde" => self.m_tilde = Some(parse_as(key, value)?),
                "min_edge_size" => self.min_edge_size = parse_as(key, value)?,
                "dedup" => self.dedup = parse_as(key, value)?,
                "max_iters" => self.max_iters = parse_as(key, value)?,
                "vi_lr" => self.vi_lr = parse_as(key, value)?,
                "tolerance" => self.tolerance = parse_as(key, value)?,
                "nmf_iters" => self.nmf_iters = parse_as(key, value)?,
                "nmf_lambda" => self.nmf_lambda = parse_as(key, value)?,
                "nmf_logistic" => self.nmf_logistic = parse_as(key, value)?,
                other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path, ignore: &[&str]) -> Result<(), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("config {}: {e}", path.display())))?;
        self.apply_map(&parse_key_values(&text)?, ignore)
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "K={}", self.k);
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "m={}", self.m);
        let _ = writeln!(out, "epochs={}", self.epochs);
        let _ = writeln!(out, "batch_size={}", self.batch_size);
        let _ = writeln!(out, "lr={:e}", self.lr);
        let _ = writeln!(out, "weight_decay={:e}", self.weight_decay);
        let _ = writeln!(out, "hidden_dim={}", self.hidden_dim);
        let _ = writeln!(out, "num_layers={}", self.num_layers);
        let _ = writeln!(out, "dropout={:e}", self.dropout);
        let _ = writeln!(out, "T={}", self.t);
        let _ = writeln!(out, "beta_start={:e}", self.beta_start);
        let _ = writeln!(out, "beta_end={:e}", self.beta_end);
        let _ = writeln!(out, "rho={}", match self.rho {
            RhoRange::Unit => "unit",
            RhoRange::Shifted => "shifted",
        });
        let _ = writeln!(out, "link={}", match self.link {
            Link::Poisson => "poisson",
            Link::Sigmoid => "sigmoid",
        });
        let _ = writeln!(out, "method={}", self.method.name());
        if let Some(mt) = self.m_tilde {
            let _ = writeln!(out, "m_tilde={mt}");
        }
        let _ = writeln!(out, "min_edge_size={}", self.min_edge_size);
        let _ = writeln!(out, "dedup={}", self.dedup);
        let _ = writeln!(out, "max_iters={}", self.max_iters);
        let _ = writeln!(out, "vi_lr={:e}", self.vi_lr);
        let _ = writeln!(out, "tolerance={:e}", self.tolerance);
        let _ = writeln!(out, "nmf_iters={}", self.nmf_iters);
        let _ = writeln!(out, "nmf_lambda={:e}", self.nmf_lambda);
        let _ = writeln!(out, "nmf_logistic={}", self.nmf_logistic);
        out
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            k: self.k,
            max_iters: self.max_iters,
            learning_rate: self.vi_lr,
            tolerance: self.tolerance,
            estimator: match self.method {
                Method::HyvintTaylor => Estimator::Taylor,
                _ => Estimator::LowerBound,
            },
            seed: self.seed,
        }
    }

    pub fn diffusion_config(&self) -> DiffusionConfig {
        DiffusionConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
            weight_decay: self.weight_decay,
            hidden_dim: self.hidden_dim,
            num_layers: self.num_layers,
            dropout: self.dropout,
            steps: self.t,
            beta_start: self.beta_start,
            beta_end: self.beta_end,
            seed: self.seed,
        }
    }
}

/// Writes the manifest: resolved settings plus provenance lines. The
/// settings block can be fed back through --config to reproduce the run.
pub fn write_manifest(path: &Path, settings: &Settings, extra: &[(&str, String)]) -> Result<(), CliError> {
    let mut out = String::new();
    let _ = writeln!(out, "# run manifest; pass to --config to reproduce");
    let _ = writeln!(out, "# version={}", git_describe());
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(&settings.to_key_values());
    fs::write(path, out).map_err(|e| CliError::Data(format!("manifest {}: {e}", path.display())))
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}
