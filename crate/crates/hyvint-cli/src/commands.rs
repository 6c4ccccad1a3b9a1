//! Implementations of the synth, fit, generate, and eval subcommands.

use std::fs;
use std::path::Path;

use hyvint::baselines::{
    berdiff_generate, gaudiff_generate, nmfdiff_generate, BaselineConfig, BaselineError, NmfConfig,
};
use hyvint::hypercore::{load_hypergraph, HypergraphFormat, IncidenceStructure};
use hyvint::metrics::{compute_report, MetricsReport};
use hyvint::pipeline::{
    resume_generate, run_hyvint, save_latents, GeneratedHypergraph, GenerationSpec, PipelineError,
};
use hyvint::synthdata::{generate_synthetic, save_ground_truth, SynthConfig};
use hyvint::vi::{fit_variational, save_state, FitError, PriorSpec};

use crate::settings::{write_manifest, Method, Settings};
use crate::CliError;

pub fn map_fit_error(e: FitError) -> CliError {
    match e {
        FitError::NonFinite { iter, .. } => {
            CliError::Numeric(format!("objective became non-finite at iteration {iter}"))
        }
        other => CliError::Data(other.to_string()),
    }
}

pub fn map_pipeline_error(e: PipelineError) -> CliError {
    match e {
        PipelineError::Stage1(inner) => map_fit_error(inner),
        PipelineError::Stage2(hyvint::diffusion::TrainError::NonFinite { epoch }) => {
            CliError::Numeric(format!("denoiser loss became non-finite at epoch {epoch}"))
        }
        other => CliError::Data(other.to_string()),
    }
}

pub fn map_baseline_error(e: BaselineError) -> CliError {
    match e {
        BaselineError::NonFinite { epoch } => {
            CliError::Numeric(format!("loss became non-finite at epoch {epoch}"))
        }
        BaselineError::NmfDiverged { previous, current } => {
            CliError::Numeric(format!("factorization objective increased: {previous} -> {current}"))
        }
        BaselineError::Diffusion(hyvint::diffusion::TrainError::NonFinite { epoch }) => {
            CliError::Numeric(format!("denoiser loss became non-finite at epoch {epoch}"))
        }
        other => CliError::Data(other.to_string()),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

pub fn load_input(path: &Path, format: &str, dedup: bool) -> Result<IncidenceStructure, CliError> {
    let fmt = match format {
        "edge-lines" => HypergraphFormat::EdgeLines,
        "benson" => HypergraphFormat::BensonPair,
        other => return Err(CliError::Usage(format!("unknown format {other:?}"))),
    };
    let loaded = load_hypergraph(path, fmt).map_err(|e| CliError::Data(e.to_string()))?;
    let structure = if dedup { loaded.structure.dedup_edges() } else { loaded.structure };
    Ok(structure)
}

pub fn cmd_synth(settings: &Settings, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    let cfg = SynthConfig {
        k: settings.k,
        n: settings.n,
        m: settings.m,
        rho_range: settings.rho,
        link: settings.link,
        seed: settings.seed,
    };
    let (structure, truth) = generate_synthetic(&cfg).map_err(|e| CliError::Data(e.to_string()))?;
    structure
        .write_edge_lines(&out_dir.join("dataset.edges"))
        .map_err(|e| CliError::Data(e.to_string()))?;
    save_ground_truth(&out_dir.join("truth.tsv"), &truth).map_err(|e| CliError::Data(e.to_string()))?;
    write_manifest(&out_dir.join("manifest.txt"), settings, &[("command", "synth".into())])?;
    Ok(())
}

pub fn cmd_fit(settings: &Settings, input: &Path, format: &str, out_dir: &Path) -> Result<(), CliError> {
    ensure_dir(out_dir)?;
    if !matches!(settings.method, Method::Hyvint | Method::HyvintTaylor) {
        return Err(CliError::Usage(format!(
            "fit applies to the variational methods, not {}",
            settings.method.name()
        )));
    }
    let h = load_input(input, format, settings.dedup)?;
    let prior = PriorSpec::default();
    let (state, trace) = fit_variational(&h, &prior, &settings.fit_config()).map_err(map_fit_error)?;
    save_state(&out_dir.join("variational.ckpt"), &state, settings.seed, &prior)
        .map_err(|e| CliError::Data(e.to_string()))?;
    save_latents(&out_dir.join("latents.tsv"), &state.export_latents())
        .map_err(|e| CliError::Data(e.to_string()))?;
    write_manifest(
        &out_dir.join("manifest.txt"),
        settings,
        &[
            ("command", "fit".into()),
            ("input", input.display().to_string()),
            ("fit_iterations", trace.iterations.to_string()),
            ("final_objective", format!("{:e}", trace.final_elbo)),
        ],
    )?;
    Ok(())
}

pub struct GenerateArgs<'a> {
    pub input: Option<&'a Path>,
    pub format: &'a str,
    pub vi_checkpoint: Option<&'a Path>,
    pub denoiser_checkpoint: Option<&'a Path>,
    pub out_dir: &'a Path,
}

pub fn cmd_generate(settings: &Settings, args: &GenerateArgs) -> Result<GeneratedHypergraph, CliError> {
    ensure_dir(args.out_dir)?;
    let generated = match settings.method {
        Method::Hyvint | Method::HyvintTaylor => {
            match (args.vi_checkpoint, args.denoiser_checkpoint) {
                (Some(vi), Some(dn)) => {
                    let m_tilde = settings.m_tilde.ok_or_else(|| {
                        CliError::Usage("--m_tilde is required when resuming from checkpoints".into())
                    })?;
                    let spec = GenerationSpec::new(m_tilde, settings.min_edge_size, settings.seed)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    let out = resume_generate(vi, dn, &spec).map_err(map_pipeline_error)?;
                    out.structure
                        .write_edge_lines(&args.out_dir.join("generated.edges"))
                        .map_err(|e| CliError::Data(e.to_string()))?;
                    out
                }
                (None, None) => {
                    let input = args.input.ok_or_else(|| {
                        CliError::Usage("--input is required unless both checkpoints are given".into())
                    })?;
                    let h = load_input(input, args.format, settings.dedup)?;
                    let out = run_hyvint(
                        &h,
                        &PriorSpec::default(),
                        &settings.fit_config(),
                        &settings.diffusion_config(),
                        settings.m_tilde,
                        settings.min_edge_size,
                        settings.seed,
                        args.out_dir,
                    )
                    .map_err(map_pipeline_error)?;
                    out.generated
                }
                _ => {
                    return Err(CliError::Usage(
                        "pass both --vi_checkpoint and --denoiser_checkpoint, or neither".into(),
                    ))
                }
            }
        }
        baseline => {
            let input = args.input.ok_or_else(|| {
                CliError::Usage("--input is required for baseline methods".into())
            })?;
            let h = load_input(input, args.format, settings.dedup)?;
            let cfg = BaselineConfig {
                diffusion: settings.diffusion_config(),
                m_tilde: settings.m_tilde,
                min_edge_size: settings.min_edge_size,
                seed: settings.seed,
            };
            let out = match baseline {
                Method::BerDiff => berdiff_generate(&h, &cfg),
                Method::GauDiff => gaudiff_generate(&h, &cfg),
                Method::NmfDiff => {
                    let nmf = NmfConfig {
                        k: settings.k,
                        iters: settings.nmf_iters,
                        lambda: settings.nmf_lambda,
                        logistic_squash: settings.nmf_logistic,
                        seed: settings.seed,
                    };
                    nmfdiff_generate(&h, &cfg, &nmf)
                }
                _ => unreachable!("variational methods handled above"),
            }
            .map_err(map_baseline_error)?;
            out.structure
                .write_edge_lines(&args.out_dir.join("generated.edges"))
                .map_err(|e| CliError::Data(e.to_string()))?;
            out
        }
    };
    write_manifest(
        &args.out_dir.join("manifest.txt"),
        settings,
        &[
            ("command", "generate".into()),
            ("filtered_edges", generated.filtered_edges.to_string()),
        ],
    )?;
    Ok(generated)
}

/// Reads an edge-lines file without node-id remapping so two files over the
/// same node universe stay aligned.
pub fn read_edge_lines_raw(path: &Path) -> Result<Vec<Vec<usize>>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut members = Vec::new();
        for tok in line.split_whitespace() {
            let v: usize = tok.parse().map_err(|_| {
                CliError::Data(format!("{} line {}: bad node id {tok:?}", path.display(), lineno + 1))
            })?;
            members.push(v);
        }
        members.sort_unstable();
        members.dedup();
        edges.push(members);
    }
    Ok(edges)
}

pub struct EvalMeta<'a> {
    pub dataset: &'a str,
    pub filtered_edges: usize,
    pub runtime_s: f64,
    pub csv: Option<&'a Path>,
}

pub fn cmd_eval(
    settings: &Settings,
    reference: &Path,
    generated: &Path,
    meta: &EvalMeta,
) -> Result<MetricsReport, CliError> {
    let ref_edges = read_edge_lines_raw(reference)?;
    let gen_edges = read_edge_lines_raw(generated)?;
    let max_id = ref_edges
        .iter()
        .chain(&gen_edges)
        .flat_map(|e| e.iter().copied())
        .max()
        .ok_or_else(|| CliError::Data("both hypergraphs are empty".into()))?;
    let n = max_id + 1;
    let build = |edges: Vec<Vec<usize>>, path: &Path| {
        IncidenceStructure::new(n, edges)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    };
    let h_ref = build(ref_edges, reference)?;
    let h_gen = build(gen_edges, generated)?;
    let report = compute_report(&h_ref, &h_gen).map_err(|e| CliError::Data(e.to_string()))?;

    if let Some(csv) = meta.csv {
        let row = report.csv_row(
            meta.dataset,
            settings.method.name(),
            settings.k,
            h_ref.n(),
            h_ref.m(),
            settings.seed,
            meta.filtered_edges,
            meta.runtime_s,
        );
        append_csv_row(csv, &row)?;
    }
    Ok(report)
}

pub fn append_csv_row(csv: &Path, row: &str) -> Result<(), CliError> {
    let mut content = if csv.exists() {
        fs::read_to_string(csv).map_err(|e| CliError::Data(format!("{}: {e}", csv.display())))?
    } else {
        format!("{}\n", MetricsReport::csv_header())
    };
    content.push_str(row);
    content.push('\n');
    fs::write(csv, content).map_err(|e| CliError::Data(format!("{}: {e}", csv.display())))
}
