//! Multi-seed benchmark sweeps: (method x seed) jobs over one synthetic
//! grid cell, run on a small worker pool, aggregated into mean/std tables
//! and per-metric plot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use hyvint::metrics::MetricsReport;

use crate::commands::{cmd_eval, cmd_generate, cmd_synth, EvalMeta, GenerateArgs};
use crate::settings::{parse_key_values, write_manifest, Method, Settings};
use crate::CliError;

pub struct BenchPlan {
    pub settings: Settings,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub dataset: String,
}

const BENCH_ONLY_KEYS: &[&str] = &["methods", "seeds", "dataset"];

pub fn plan_from_sources(
    base: Settings,
    config: Option<&Path>,
    preset: Option<&str>,
) -> Result<BenchPlan, CliError> {
    let mut settings = base;
    let mut methods = vec![settings.method];
    let mut seeds = vec![settings.seed];
    let mut dataset = "synth".to_string();

    let apply_text = |settings: &mut Settings,
                          methods: &mut Vec<Method>,
                          seeds: &mut Vec<u64>,
                          dataset: &mut String,
                          text: &str|
     -> Result<(), CliError> {
        let map = parse_key_values(text)?;
        if let Some(v) = map.get("methods") {
            *methods = v
                .split(',')
                .map(|t| Method::parse(t.trim()))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = map.get("seeds") {
            *seeds = v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad seed {t:?}")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = map.get("dataset") {
            *dataset = v.clone();
        }
        settings.apply_map(&map, BENCH_ONLY_KEYS)
    };

    if let Some(name) = preset {
        let text = preset_text(name)?;
        apply_text(&mut settings, &mut methods, &mut seeds, &mut dataset, text)?;
    }
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("config {}: {e}", path.display())))?;
        apply_text(&mut settings, &mut methods, &mut seeds, &mut dataset, &text)?;
    }
    if methods.is_empty() || seeds.is_empty() {
        return Err(CliError::Usage("bench needs at least one method and one seed".into()));
    }
    Ok(BenchPlan { settings, methods, seeds, dataset })
}

fn preset_text(name: &str) -> Result<&'static str, CliError> {
    match name {
        // desk-scale cell: K=2, n=m=200, sparse activity regime, short
        // training budget sized for a single CPU core
        "paper-k2-small" => Ok("dataset=paper-k2-small\n\
             methods=hyvint\n\
             seeds=42,43,44,45,46\n\
             K=2\n\
             n=200\n\
             m=200\n\
             rho=unit\n\
             link=poisson\n\
             epochs=300\n\
             hidden_dim=256\n\
             max_iters=1500\n"),
        other => Err(CliError::Usage(format!("unknown preset {other:?}"))),
    }
}

struct JobResult {
    method: Method,
    seed: u64,
    report: MetricsReport,
    filtered_edges: usize,
    runtime_s: f64,
    n: usize,
    m: usize,
}

pub fn cmd_bench(plan: &BenchPlan, workers: usize, out_dir: &Path) -> Result<(), CliError> {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;

    // one dataset per seed, shared by every method
    for &seed in &plan.seeds {
        let mut s = plan.settings.clone();
        s.seed = seed;
        cmd_synth(&s, &out_dir.join(format!("data_seed{seed}")))?;
    }

    let jobs: Vec<(Method, u64)> = plan
        .methods
        .iter()
        .flat_map(|&m| plan.seeds.iter().map(move |&s| (m, s)))
        .collect();

    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<JobResult, String>>>> =
        jobs.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers.min(jobs.len()) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= jobs.len() {
                    break;
                }
                let (method, seed) = jobs[idx];
                let outcome = run_job(plan, method, seed, out_dir);
                *results[idx].lock().expect("poisoned") = Some(outcome.map_err(|e| e.to_string()));
            });
        }
    });

    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (idx, slot) in results.into_iter().enumerate() {
        let (method, seed) = jobs[idx];
        match slot.into_inner().expect("poisoned").expect("job ran") {
            Ok(r) => done.push(r),
            Err(msg) => failures.push(format!("{} seed {}: {}", method.name(), seed, msg)),
        }
    }
    done.sort_by_key(|r| (r.method.name(), r.seed));

    let mut csv = format!("{}\n", MetricsReport::csv_header());
    for r in &done {
        let mut s = plan.settings.clone();
        s.seed = r.seed;
        s.method = r.method;
        let row = r.report.csv_row(
            &plan.dataset,
            r.method.name(),
            s.k,
            r.n,
            r.m,
            r.seed,
            r.filtered_edges,
            r.runtime_s,
        );
        let _ = writeln!(csv, "{row}");
    }
    fs::write(out_dir.join("results.csv"), csv)
        .map_err(|e| CliError::Data(format!("results.csv: {e}")))?;

    if !failures.is_empty() {
        eprintln!("warning: {} of {} jobs failed; aggregating the rest", failures.len(), jobs.len());
        fs::write(out_dir.join("failures.txt"), failures.join("\n") + "\n")
            .map_err(|e| CliError::Data(format!("failures.txt: {e}")))?;
    }

    write_aggregates(&done, plan, out_dir)?;
    write_manifest(
        &out_dir.join("manifest.txt"),
        &plan.settings,
        &[
            ("command", "bench".into()),
            ("dataset", plan.dataset.clone()),
            (
                "methods",
                plan.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
            ),
            (
                "seeds",
                plan.seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","),
            ),
        ],
    )?;
    Ok(())
}

fn run_job(plan: &BenchPlan, method: Method, seed: u64, out_dir: &Path) -> Result<JobResult, CliError> {
    let mut settings = plan.settings.clone();
    settings.method = method;
    settings.seed = seed;
    let data_dir = out_dir.join(format!("data_seed{seed}"));
    let job_dir = out_dir.join(format!("job_{}_{seed}", method.name()));
    let input = data_dir.join("dataset.edges");

    let start = Instant::now();
    let generated = cmd_generate(
        &settings,
        &GenerateArgs {
            input: Some(&input),
            format: "edge-lines",
            vi_checkpoint: None,
            denoiser_checkpoint: None,
            out_dir: &job_dir,
        },
    )?;
    let runtime_s = start.elapsed().as_secs_f64();

    let report = cmd_eval(
        &settings,
        &input,
        &job_dir.join("generated.edges"),
        &EvalMeta {
            dataset: &plan.dataset,
            filtered_edges: generated.filtered_edges,
            runtime_s,
            csv: None,
        },
    )?;
    Ok(JobResult {
        method,
        seed,
        report,
        filtered_edges: generated.filtered_edges,
        runtime_s,
        n: plan.settings.n,
        m: plan.settings.m,
    })
}

const METRIC_NAMES: [&str; 11] = [
    "rmse_mean",
    "rmse_cov",
    "l_deg",
    "l_size",
    "l_spec",
    "l_cent_c",
    "l_cent_h",
    "l_cent_b",
    "uhr",
    "nhr",
    "pjd",
];

fn metric_values(r: &MetricsReport) -> [f64; 11] {
    [
        r.rmse_mean,
        r.rmse_cov,
        r.l_deg,
        r.l_size,
        r.l_spec,
        r.l_cent_closeness,
        r.l_cent_harmonic,
        r.l_cent_betweenness,
        r.uhr,
        r.nhr,
        r.pjd,
    ]
}

fn write_aggregates(done: &[JobResult], plan: &BenchPlan, out_dir: &Path) -> Result<(), CliError> {
    let mut agg = String::from("method,metric,mean,std,count\n");
    let mut plots: Vec<String> = METRIC_NAMES.iter().map(|_| String::from("x\ty\terr\n")).collect();
    for &method in &plan.methods {
        let rows: Vec<&JobResult> = done.iter().filter(|r| r.method == method).collect();
        if rows.is_empty() {
            continue;
        }
        for (mi, name) in METRIC_NAMES.iter().enumerate() {
            let vals: Vec<f64> = rows.iter().map(|r| metric_values(&r.report)[mi]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            let std = var.sqrt();
            let _ = writeln!(agg, "{},{name},{mean:e},{std:e},{}", method.name(), vals.len());
            let _ = writeln!(plots[mi], "{}\t{mean:e}\t{std:e}", method.name());
        }
    }
    fs::write(out_dir.join("aggregate.csv"), agg)
        .map_err(|e| CliError::Data(format!("aggregate.csv: {e}")))?;
    for (mi, name) in METRIC_NAMES.iter().enumerate() {
        fs::write(out_dir.join(format!("plot_{name}.tsv")), &plots[mi])
            .map_err(|e| CliError::Data(format!("plot_{name}.tsv: {e}")))?;
    }
    Ok(())
}
