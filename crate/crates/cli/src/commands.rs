//! Subcommands. Each writes deterministic result files plus a manifest into
//! its output directory; wall-clock time goes to a separate `timing.json`.

use crate::error::{CliError, Result};
use crate::ingest::{ingest_csv, ingest_profiles, write_dataset_csv};
use crate::output::{
    create_dir, fmt_f64, fmt_opt, read_json, read_samples, write_json, write_samples, write_trace_summaries,
    write_windows, write_weights,
};
use clap::Args;
use cwvsmix::engine::AcceptanceLog;
use cwvsmix::inference::{
    decide_windows_with, select_weights_with, summarize_chain, summarize_trace, Thresholds, TraceSummary,
    WindowDecision,
};
use cwvsmix::sim::{generate_dataset, run_study, ExposureSource, Method, SimScenario, StudyConfig, StudyResult};
use cwvsmix::{run_chain, Priors, RngStream, SweepConfig, WeightMode};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

pub const MANIFEST: &str = "manifest.json";
pub const TIMING: &str = "timing.json";

#[derive(Serialize)]
struct Manifest<'a, S: Serialize> {
    tool: &'static str,
    cli_version: &'static str,
    core_version: &'static str,
    command: &'static str,
    seed: u64,
    inputs: BTreeMap<&'static str, String>,
    settings: &'a S,
    outputs: Vec<&'static str>,
}

#[derive(Serialize)]
struct Timing {
    command: &'static str,
    wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
}

fn write_manifest<S: Serialize>(
    out: &Path,
    command: &'static str,
    seed: u64,
    inputs: BTreeMap<&'static str, String>,
    settings: &S,
    outputs: Vec<&'static str>,
) -> Result<()> {
    let manifest = Manifest {
        tool: "cwvsmix",
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: cwvsmix::VERSION,
        command,
        seed,
        inputs,
        settings,
        outputs,
    };
    write_json(&out.join(MANIFEST), &manifest)
}

fn write_timing(out: &Path, command: &'static str, start: Instant, workers: Option<usize>) -> Result<()> {
    let timing = Timing {
        command,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        workers,
    };
    write_json(&out.join(TIMING), &timing)
}

fn check_thresholds(window: f64, main: f64, interaction: f64) -> Result<Thresholds> {
    let t = Thresholds {
        window,
        main,
        interaction,
    };
    t.validate()?;
    Ok(t)
}

#[derive(Args, Clone, Debug)]
pub struct FitArgs {
    /// Dataset CSV with `y`, covariates and `z_<pollutant>_<period>` columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub burn: usize,
    #[arg(long, default_value_t = 10_000)]
    pub keep: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    /// Credible level of the odds-ratio intervals.
    #[arg(long, default_value_t = 0.9)]
    pub ci: f64,
    /// `cwvsmix` estimates the weights, `ew` fixes them equal.
    #[arg(long, default_value = "cwvsmix")]
    pub method: Method,
    /// Use exposures as given instead of IQR-standardizing them.
    #[arg(long)]
    pub no_standardize: bool,
    /// Disable step-size adaptation during burn-in.
    #[arg(long)]
    pub no_adapt: bool,
    /// Prior standard deviation of the regression coefficients.
    #[arg(long, default_value_t = 100.0)]
    pub sigma_beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub window_threshold: f64,
    #[arg(long, default_value_t = 0.5)]
    pub main_threshold: f64,
    #[arg(long, default_value_t = 0.125)]
    pub interaction_threshold: f64,
}

#[derive(Serialize)]
struct FitSettings {
    method: Method,
    standardized: bool,
    n: usize,
    p: usize,
    m: usize,
    q: usize,
    covariates: Vec<String>,
    pollutants: Vec<String>,
    priors: Priors,
    sweep: SweepConfig,
    ci_level: f64,
    thresholds: Thresholds,
    rng_stream: u64,
    acceptance: AcceptanceLog,
}

#[derive(Debug)]
pub struct FitReport {
    pub decisions: Vec<WindowDecision>,
    pub out: PathBuf,
}

pub fn fit(args: &FitArgs) -> Result<FitReport> {
    let start = Instant::now();
    let thresholds = check_thresholds(args.window_threshold, args.main_threshold, args.interaction_threshold)?;
    let priors = Priors::default().with_sigma_beta_sd(args.sigma_beta);
    priors.validate()?;
    let mut sweep = SweepConfig::application().with_counts(args.burn, args.keep, args.thin);
    sweep.adapt = !args.no_adapt;
    let sweep = sweep.with_weight_mode(match args.method {
        Method::CwvsMix => WeightMode::Estimated,
        Method::Ew => WeightMode::Equal,
    });
    sweep.validate()?;
    if !(args.ci > 0.0 && args.ci < 1.0) {
        return Err(CliError::Input(format!("--ci {} must lie in (0, 1)", args.ci)));
    }

    let mut data = ingest_csv(&args.data)?;
    if !args.no_standardize {
        data = data.standardized()?;
    }
    create_dir(&args.out)?;

    let rng = RngStream::new(args.seed, 0);
    let samples = run_chain(&data, &priors, &sweep, rng)?;
    let decisions = decide_windows_with(&samples, args.ci, &thresholds)?;
    let selection = select_weights_with(&samples, &thresholds);
    let summaries = summarize_chain(&samples);

    let out = &args.out;
    write_windows(&out.join("windows.csv"), &decisions)?;
    write_weights(&out.join("weights.csv"), &data.component_names(), &selection, &samples)?;
    write_trace_summaries(&out.join("chain_summary.csv"), &summaries)?;
    write_samples(&out.join("samples.csv"), &samples)?;
    let mut outputs = vec!["windows.csv", "weights.csv", "chain_summary.csv", "samples.csv"];
    if let Some(scaling) = data.scaling() {
        let rows = (0..scaling.m).flat_map(|t| {
            let names = data.pollutant_names();
            (0..scaling.q).map(move |j| {
                [
                    (t + 1).to_string(),
                    names[j].clone(),
                    fmt_f64(scaling.median[t * scaling.q + j]),
                    fmt_f64(scaling.iqr[t * scaling.q + j]),
                ]
            })
        });
        crate::output::write_table(&out.join("scaling.csv"), &["period", "pollutant", "median", "iqr"], rows)?;
        outputs.push("scaling.csv");
    }
    let settings = FitSettings {
        method: args.method,
        standardized: !args.no_standardize,
        n: data.n(),
        p: data.p(),
        m: data.m(),
        q: data.q(),
        covariates: data.covariate_names().to_vec(),
        pollutants: data.pollutant_names().to_vec(),
        priors,
        sweep,
        ci_level: args.ci,
        thresholds,
        rng_stream: 0,
        acceptance: samples.acceptance.clone(),
    };
    let inputs = BTreeMap::from([("data", args.data.display().to_string())]);
    write_manifest(out, "fit", args.seed, inputs, &settings, outputs)?;
    write_timing(out, "fit", start, None)?;
    Ok(FitReport {
        decisions,
        out: out.clone(),
    })
}

/// Reads a scenario file, loading resampled exposure profiles relative to it.
pub fn load_scenario(path: &Path) -> Result<SimScenario> {
    let mut scenario: SimScenario = read_json(path)?;
    if let ExposureSource::Resample { path: profile_path, profiles } = &mut scenario.exposure {
        let resolved = path.parent().unwrap_or(Path::new(".")).join(&*profile_path);
        *profiles = Some(Arc::new(ingest_profiles(&resolved)?));
    }
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Args, Clone, Debug)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    create_dir(&args.out)?;
    let mut rng = RngStream::new(args.seed, 0);
    let (data, truth) = generate_dataset(&scenario, &mut rng)?;
    write_dataset_csv(&data, &args.out.join("data.csv"))?;
    write_json(&args.out.join("truth.json"), &truth)?;
    let inputs = BTreeMap::from([("scenario", args.scenario.display().to_string())]);
    write_manifest(&args.out, "simulate", args.seed, inputs, &scenario, vec!["data.csv", "truth.json"])?;
    write_timing(&args.out, "simulate", start, None)
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = item.parse()?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(CliError::Input("--methods lists no method".into()));
    }
    Ok(methods)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args, Clone, Debug)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub replicates: usize,
    /// Comma-separated list from `cwvsmix`, `ew`.
    #[arg(long, default_value = "cwvsmix,ew")]
    pub methods: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = default_workers())]
    pub workers: usize,
    #[arg(long, default_value_t = 10_000)]
    pub burn: usize,
    #[arg(long, default_value_t = 1_000)]
    pub keep: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 0.9)]
    pub ci: f64,
}

#[derive(Serialize)]
struct BenchmarkSettings<'a> {
    scenario: &'a SimScenario,
    replicates: usize,
    methods: &'a [Method],
    priors: Priors,
    sweep: &'a SweepConfig,
    ci_level: f64,
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<StudyResult> {
    let start = Instant::now();
    let scenario = load_scenario(&args.scenario)?;
    let methods = parse_methods(&args.methods)?;
    if args.replicates == 0 {
        return Err(CliError::Input("--replicates must be at least 1".into()));
    }
    if args.workers == 0 {
        return Err(CliError::Input("--workers must be at least 1".into()));
    }
    let config = StudyConfig {
        replicates: args.replicates,
        methods: methods.clone(),
        priors: Priors::default(),
        sweep: SweepConfig::simulation().with_counts(args.burn, args.keep, args.thin),
        ci_level: args.ci,
        master_seed: args.seed,
        workers: args.workers,
    };
    if !(args.ci > 0.0 && args.ci < 1.0) {
        return Err(CliError::Input(format!("--ci {} must lie in (0, 1)", args.ci)));
    }
    create_dir(&args.out)?;
    let result = run_study(&scenario, &config)?;
    write_replicates(&args.out.join("replicates.csv"), &result)?;
    write_study_summary(&args.out.join("summary.csv"), &result)?;
    let settings = BenchmarkSettings {
        scenario: &scenario,
        replicates: args.replicates,
        methods: &methods,
        priors: config.priors,
        sweep: &config.sweep,
        ci_level: args.ci,
    };
    let inputs = BTreeMap::from([("scenario", args.scenario.display().to_string())]);
    write_manifest(
        &args.out,
        "benchmark",
        args.seed,
        inputs,
        &settings,
        vec!["replicates.csv", "summary.csv"],
    )?;
    write_timing(&args.out, "benchmark", start, Some(args.workers))?;
    Ok(result)
}

fn write_replicates(path: &Path, result: &StudyResult) -> Result<()> {
    let opt_usize = |v: Option<usize>| v.map_or_else(|| crate::output::MISSING.to_string(), |v| v.to_string());
    crate::output::write_table(
        path,
        &[
            "replicate",
            "method",
            "data_stream",
            "chain_stream",
            "window_start",
            "window_len",
            "cw_accuracy",
            "amse_lambda_cw",
            "amse_exp_alpha",
            "main_selection",
            "interaction_selection",
            "flagged",
            "error",
        ],
        result.replicates.iter().map(|r| {
            [
                (r.replicate + 1).to_string(),
                r.method.to_string(),
                r.data_stream.to_string(),
                r.chain_stream.to_string(),
                opt_usize(r.window_start),
                opt_usize(r.window_len),
                fmt_opt(r.cw_accuracy),
                fmt_opt(r.amse_lambda_cw),
                fmt_opt(r.amse_exp_alpha),
                fmt_opt(r.main_selection),
                fmt_opt(r.interaction_selection),
                r.flagged.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )
}

fn write_study_summary(path: &Path, result: &StudyResult) -> Result<()> {
    let rows = result.summaries.iter().flat_map(|s| {
        s.metrics.iter().map(move |m| {
            [
                s.method.to_string(),
                m.name.clone(),
                m.n.to_string(),
                fmt_opt(m.mean),
                fmt_opt(m.se),
                s.succeeded.to_string(),
                s.failed.to_string(),
                s.flagged.to_string(),
            ]
        })
    });
    crate::output::write_table(
        path,
        &["method", "metric", "n", "mean", "se", "succeeded", "failed", "flagged"],
        rows,
    )
}

#[derive(Args, Clone, Debug)]
pub struct DiagnoseArgs {
    /// A `samples.csv` file or a fit output directory containing one.
    #[arg(long)]
    pub samples: PathBuf,
    /// Where to write `diagnostics.csv`; defaults to the samples directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<Vec<TraceSummary>> {
    let file = if args.samples.is_dir() {
        args.samples.join("samples.csv")
    } else {
        args.samples.clone()
    };
    let traces = read_samples(&file)?;
    let summaries: Vec<TraceSummary> = traces
        .iter()
        .filter_map(|(name, trace)| summarize_trace(name, trace))
        .collect();
    let out = match &args.out {
        Some(dir) => dir.clone(),
        None => file.parent().unwrap_or(Path::new(".")).to_path_buf(),
    };
    create_dir(&out)?;
    write_trace_summaries(&out.join("diagnostics.csv"), &summaries)?;
    Ok(summaries)
}
