//! Experiment harness for hypergraph generative modeling: synthetic data,
//! variational fitting, generation, evaluation, and multi-seed benchmarks.

mod bench;
mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_eval, cmd_fit, cmd_generate, cmd_synth, EvalMeta, GenerateArgs};
use crate::settings::{Method, Settings};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

/// Hyperparameter flags; names follow the simulation defaults table.
#[derive(Debug, Args)]
struct HyperFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "batch_size")]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long = "weight_decay")]
    weight_decay: Option<f64>,
    #[arg(long = "hidden_dim")]
    hidden_dim: Option<usize>,
    #[arg(long = "num_layers")]
    num_layers: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long = "beta_start")]
    beta_start: Option<f64>,
    #[arg(long = "beta_end")]
    beta_end: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long = "m_tilde")]
    m_tilde: Option<usize>,
    #[arg(long = "min_edge_size")]
    min_edge_size: Option<usize>,
    /// drop duplicate hyperedges on load
    #[arg(long)]
    dedup: bool,
    #[arg(long = "max_iters")]
    max_iters: Option<usize>,
    /// learning rate for the stage-1 variational fit
    #[arg(long = "vi_lr")]
    vi_lr: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// key=value config file; explicit flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
}

impl HyperFlags {
    fn resolve(&self, extra_rho: Option<&str>, extra_link: Option<&str>) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path, &["methods", "seeds", "dataset"])?;
        }
        macro_rules! over {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { s.$field = v; })*
            };
        }
        over!(seed, k, n, m, epochs, batch_size, lr, weight_decay, hidden_dim, num_layers, dropout, t, beta_start, beta_end, max_iters, vi_lr, tolerance);
        if let Some(m) = self.method {
            s.method = m;
        }
        if let Some(mt) = self.m_tilde {
            s.m_tilde = Some(mt);
        }
        if let Some(ms) = self.min_edge_size {
            s.min_edge_size = ms;
        }
        if self.dedup {
            s.dedup = true;
        }
        if let Some(rho) = extra_rho {
            s.apply_map(
                &[("rho".to_string(), rho.to_string())].into_iter().collect(),
                &[],
            )?;
        }
        if let Some(link) = extra_link {
            s.apply_map(
                &[("link".to_string(), link.to_string())].into_iter().collect(),
                &[],
            )?;
        }
        Ok(s)
    }
}

#[derive(Parser)]
#[command(name = "hyvint", version, about = "hypergraph generative modeling harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic hypergraph and its ground-truth latents
    Synth {
        #[command(flatten)]
        hyper: HyperFlags,
        /// per-edge activity range: unit ([0,1]) or shifted ([1,2])
        #[arg(long, default_value = "unit")]
        rho: String,
        /// incidence link: poisson (1 - e^-lambda) or sigmoid
        #[arg(long, default_value = "poisson")]
        link: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit the variational posterior and persist checkpoints
    Fit {
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "edge-lines")]
        format: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a hypergraph with the selected method
    Generate {
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "edge-lines")]
        format: String,
        #[arg(long = "vi_checkpoint")]
        vi_checkpoint: Option<PathBuf>,
        #[arg(long = "denoiser_checkpoint")]
        denoiser_checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare a generated hypergraph against a reference
    Eval {
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        generated: PathBuf,
        #[arg(long, default_value = "synth")]
        dataset: String,
        #[arg(long = "filtered_edges", default_value_t = 0)]
        filtered_edges: usize,
        #[arg(long = "runtime_s", default_value_t = 0.0)]
        runtime_s: f64,
        /// append a row to this CSV (created with header if missing)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a (method x seed) sweep and aggregate the metrics
    Bench {
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { hyper, rho, link, out } => {
            let settings = hyper.resolve(Some(&rho), Some(&link))?;
            cmd_synth(&settings, &out)
        }
        Command::Fit { hyper, input, format, out } => {
            let settings = hyper.resolve(None, None)?;
            cmd_fit(&settings, &input, &format, &out)
        }
        Command::Generate { hyper, input, format, vi_checkpoint, denoiser_checkpoint, out } => {
            let settings = hyper.resolve(None, None)?;
            cmd_generate(
                &settings,
                &GenerateArgs {
                    input: input.as_deref(),
                    format: &format,
                    vi_checkpoint: vi_checkpoint.as_deref(),
                    denoiser_checkpoint: denoiser_checkpoint.as_deref(),
                    out_dir: &out,
                },
            )
            .map(|_| ())
        }
        Command::Eval { hyper, reference, generated, dataset, filtered_edges, runtime_s, csv } => {
            let settings = hyper.resolve(None, None)?;
            let report = cmd_eval(
                &settings,
                &reference,
                &generated,
                &EvalMeta {
                    dataset: &dataset,
                    filtered_edges,
                    runtime_s,
                    csv: csv.as_deref(),
                },
            )?;
            print!("{}", report.to_key_values());
            Ok(())
        }
        Command::Bench { hyper, preset, workers, out } => {
            let config = hyper.config.clone();
            let settings = hyper.resolve(None, None)?;
            let plan = bench::plan_from_sources(settings, config.as_deref(), preset.as_deref())?;
            bench::cmd_bench(&plan, workers, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, flag errors are usage
            // failures with exit code 1
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
