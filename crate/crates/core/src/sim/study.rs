use super::{
    generate_dataset, score_amse_exp_alpha, score_amse_lambda, score_cw_accuracy, score_weight_selection, SimScenario,
};
use crate::engine::{run_chain, SweepConfig, WeightMode};
use crate::error::{Error, Result};
use crate::inference::{decide_windows, select_weights};
use crate::model::Priors;
use crate::rng::RngStream;
use crate::stats::mean_se;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    CwvsMix,
    Ew,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::CwvsMix => "cwvsmix",
            Method::Ew => "ew",
        }
    }

    /// Stream offset, fixed per method so results do not depend on list order.
    fn stream_child(self) -> u64 {
        match self {
            Method::CwvsMix => 1,
            Method::Ew => 2,
        }
    }

    fn weight_mode(self) -> WeightMode {
        match self {
            Method::CwvsMix => WeightMode::Estimated,
            Method::Ew => WeightMode::Equal,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cwvsmix" => Ok(Method::CwvsMix),
            "ew" => Ok(Method::Ew),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub priors: Priors,
    pub sweep: SweepConfig,
    pub ci_level: f64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

/// Scores of one method on one simulated dataset. Metrics are `None` when the
/// replicate failed or the metric does not apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub method: Method,
    pub seed: u64,
    pub data_stream: u64,
    pub chain_stream: u64,
    pub window_start: Option<usize>,
    pub window_len: Option<usize>,
    pub cw_accuracy: Option<f64>,
    pub amse_lambda_cw: Option<f64>,
    pub amse_exp_alpha: Option<f64>,
    pub main_selection: Option<f64>,
    pub interaction_selection: Option<f64>,
    /// A true critical period had no conditional draws.
    pub flagged: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub n: usize,
    pub mean: Option<f64>,
    /// Standard error across replicates; absent with fewer than two values.
    pub se: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub succeeded: usize,
    pub failed: usize,
    pub flagged: usize,
    pub metrics: Vec<MetricSummary>,
}

impl MethodSummary {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario: SimScenario,
    pub replicates: Vec<ReplicateResult>,
    pub summaries: Vec<MethodSummary>,
    /// Largest standard error across every reported estimate.
    pub max_se: Option<f64>,
}

impl StudyResult {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

pub const METRIC_NAMES: [&str; 5] = [
    "cw_accuracy",
    "amse_lambda_cw",
    "amse_exp_alpha",
    "main_selection",
    "interaction_selection",
];

fn metric_value(r: &ReplicateResult, name: &str) -> Option<f64> {
    match name {
        "cw_accuracy" => r.cw_accuracy,
        "amse_lambda_cw" => r.amse_lambda_cw,
        "amse_exp_alpha" => r.amse_exp_alpha,
        "main_selection" => r.main_selection,
        "interaction_selection" => r.interaction_selection,
        _ => None,
    }
}

fn run_one(scenario: &SimScenario, config: &StudyConfig, replicate: usize, method: Method) -> ReplicateResult {
    let data_rng = RngStream::new(config.master_seed, replicate as u64);
    let chain_rng = data_rng.derive(method.stream_child());
    let mut out = ReplicateResult {
        replicate,
        method,
        seed: config.master_seed,
        data_stream: data_rng.stream_id(),
        chain_stream: chain_rng.stream_id(),
        window_start: None,
        window_len: None,
        cw_accuracy: None,
        amse_lambda_cw: None,
        amse_exp_alpha: None,
        main_selection: None,
        interaction_selection: None,
        flagged: false,
        error: None,
    };
    let scored = (|| -> Result<()> {
        let mut rng = data_rng.clone();
        let (data, truth) = generate_dataset(scenario, &mut rng)?;
        out.window_start = Some(truth.window_start);
        out.window_len = Some(truth.window_len);
        let sweep = config.sweep.clone().with_weight_mode(method.weight_mode());
        let samples = run_chain(&data, &config.priors, &sweep, chain_rng.clone())?;
        let decisions = decide_windows(&samples, config.ci_level)?;
        out.cw_accuracy = Some(score_cw_accuracy(&truth, &decisions)?);
        let lam = score_amse_lambda(&truth, &samples)?;
        let ea = score_amse_exp_alpha(&truth, &samples)?;
        out.amse_lambda_cw = Some(lam.value);
        out.amse_exp_alpha = Some(ea.value);
        out.flagged = lam.flagged || ea.flagged;
        if method == Method::CwvsMix {
            let acc = score_weight_selection(&truth, &select_weights(&samples))?;
            out.main_selection = Some(acc.main);
            out.interaction_selection = acc.interaction;
        }
        Ok(())
    })();
    if let Err(e) = scored {
        out.error = Some(e.to_string());
    }
    out
}

/// Runs every method on `replicates` simulated datasets.
///
/// Replicate `k` draws its data from stream `(master_seed, k)` and each method
/// chain from a fixed child of that stream, so results are identical for any
/// worker count. A failing replicate is recorded and does not stop the study.
pub fn run_study(scenario: &SimScenario, config: &StudyConfig) -> Result<StudyResult> {
    scenario.validate()?;
    config.sweep.validate()?;
    config.priors.validate()?;
    if config.methods.is_empty() {
        return Err(Error::InvalidArgument("no methods requested".into()));
    }
    let jobs: Vec<(usize, Method)> = (0..config.replicates)
        .flat_map(|k| config.methods.iter().map(move |&m| (k, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let replicates: Vec<ReplicateResult> =
        pool.install(|| jobs.par_iter().map(|&(k, m)| run_one(scenario, config, k, m)).collect());

    let mut summaries = Vec::new();
    let mut max_se: Option<f64> = None;
    for &method in &config.methods {
        let rows: Vec<&ReplicateResult> = replicates.iter().filter(|r| r.method == method).collect();
        let ok: Vec<&&ReplicateResult> = rows.iter().filter(|r| r.error.is_none()).collect();
        let mut metrics = Vec::new();
        for name in METRIC_NAMES {
            let vals: Vec<f64> = ok.iter().filter_map(|r| metric_value(r, name)).collect();
            let (mean, se) = if vals.is_empty() {
                (None, None)
            } else {
                let (mu, se) = mean_se(&vals);
                (Some(mu), se)
            };
            if let Some(s) = se {
                max_se = Some(max_se.map_or(s, |m: f64| m.max(s)));
            }
            metrics.push(MetricSummary {
                name: name.to_string(),
                n: vals.len(),
                mean,
                se,
            });
        }
        summaries.push(MethodSummary {
            method,
            succeeded: ok.len(),
            failed: rows.len() - ok.len(),
            flagged: ok.iter().filter(|r| r.flagged).count(),
            metrics,
        });
    }
    Ok(StudyResult {
        scenario: scenario.clone(),
        replicates,
        summaries,
        max_se,
    })
}
