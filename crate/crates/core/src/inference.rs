//! Decision rules, interpretable effects and convergence diagnostics computed
//! from stored draws.

use crate::engine::ChainSamples;
use crate::error::{Error, Result};
use crate::mixture::{pairs, weighted_exposure};
use crate::stats::{mean, quantile_sorted, variance};
use serde::{Deserialize, Serialize};

/// Cut-offs of the decision rules; each must lie in (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum PIP for a critical window.
    pub window: f64,
    /// Minimum inclusion probability for a main-effect weight.
    pub main: f64,
    /// Minimum inclusion probability for an interaction weight.
    pub interaction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            window: 0.5,
            main: 0.5,
            interaction: 0.125,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("window", self.window), ("main", self.main), ("interaction", self.interaction)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidArgument(format!("{name} threshold {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Harmful,
    Protective,
    Null,
}

impl Verdict {
    pub fn is_critical(self) -> bool {
        self != Verdict::Null
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Harmful => "harmful",
            Verdict::Protective => "protective",
            Verdict::Null => "null",
        }
    }
}

/// Summary of one exposure period. Odds-ratio fields are conditional on γ(t) = 1
/// and are `None` when no draw had the period switched on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowDecision {
    /// 1-based period index.
    pub period: usize,
    pub pip: f64,
    pub conditional_draws: usize,
    pub or_mean: Option<f64>,
    pub or_lower: Option<f64>,
    pub or_upper: Option<f64>,
    pub verdict: Verdict,
}

impl WindowDecision {
    pub fn no_conditional_draws(&self) -> bool {
        self.conditional_draws == 0
    }
}

/// Harmful when PIP > 0.5 and the interval lies above 1, protective when it
/// lies below 1, null otherwise. All comparisons are strict.
pub fn classify(pip: f64, lower: f64, upper: f64) -> Verdict {
    classify_at(pip, lower, upper, Thresholds::default().window)
}

fn classify_at(pip: f64, lower: f64, upper: f64, threshold: f64) -> Verdict {
    if !(pip > threshold) {
        Verdict::Null
    } else if lower > 1.0 {
        Verdict::Harmful
    } else if upper < 1.0 {
        Verdict::Protective
    } else {
        Verdict::Null
    }
}

fn check_ci(ci_level: f64) -> Result<()> {
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::InvalidArgument(format!("credible level {ci_level} must lie in (0, 1)")));
    }
    Ok(())
}

/// Per-period inclusion probabilities and conditional odds-ratio intervals.
pub fn decide_windows(samples: &ChainSamples, ci_level: f64) -> Result<Vec<WindowDecision>> {
    decide_windows_with(samples, ci_level, &Thresholds::default())
}

pub fn decide_windows_with(samples: &ChainSamples, ci_level: f64, thresholds: &Thresholds) -> Result<Vec<WindowDecision>> {
    check_ci(ci_level)?;
    thresholds.validate()?;
    let draws = samples.len();
    let tail = 0.5 * (1.0 - ci_level);
    let mut out = Vec::with_capacity(samples.m());
    for t in 0..samples.m() {
        let mut on: Vec<f64> = (0..draws)
            .filter(|&s| samples.gamma(s)[t])
            .map(|s| samples.alpha(s)[t].exp())
            .collect();
        let pip = if draws == 0 { 0.0 } else { on.len() as f64 / draws as f64 };
        let decision = if on.is_empty() {
            WindowDecision {
                period: t + 1,
                pip,
                conditional_draws: 0,
                or_mean: None,
                or_lower: None,
                or_upper: None,
                verdict: Verdict::Null,
            }
        } else {
            on.sort_by(|a, b| a.total_cmp(b));
            let lower = quantile_sorted(&on, tail);
            let upper = quantile_sorted(&on, 1.0 - tail);
            WindowDecision {
                period: t + 1,
                pip,
                conditional_draws: on.len(),
                or_mean: Some(mean(&on)),
                or_lower: Some(lower),
                or_upper: Some(upper),
                verdict: classify_at(pip, lower, upper, thresholds.window),
            }
        };
        out.push(decision);
    }
    Ok(out)
}

/// Weight inclusion probabilities and selection flags, indexed `t * r + k`
/// with components ordered as mains then pairs `(j, k)`, `j < k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSelection {
    pub m: usize,
    pub q: usize,
    pub inclusion: Vec<f64>,
    pub selected: Vec<bool>,
}

impl WeightSelection {
    pub fn r(&self) -> usize {
        self.q * (self.q + 1) / 2
    }

    pub fn inclusion_at(&self, t: usize) -> &[f64] {
        let r = self.r();
        &self.inclusion[t * r..(t + 1) * r]
    }

    pub fn selected_at(&self, t: usize) -> &[bool] {
        let r = self.r();
        &self.selected[t * r..(t + 1) * r]
    }
}

/// Applies the selection rule to one period's inclusion probabilities:
/// mains above 0.5, interactions above 0.125 with both parents selected.
pub fn select_components(inclusion: &[f64], q: usize) -> Vec<bool> {
    select_components_with(inclusion, q, &Thresholds::default())
}

pub fn select_components_with(inclusion: &[f64], q: usize, thresholds: &Thresholds) -> Vec<bool> {
    let mut sel: Vec<bool> = inclusion[..q].iter().map(|&p| p > thresholds.main).collect();
    for (idx, (j, k)) in pairs(q).enumerate() {
        let p = inclusion[q + idx];
        let keep = p > thresholds.interaction && sel[j] && sel[k];
        sel.push(keep);
    }
    sel
}

/// Fraction of kept draws in which each weight component is positive.
pub fn select_weights(samples: &ChainSamples) -> WeightSelection {
    select_weights_with(samples, &Thresholds::default())
}

pub fn select_weights_with(samples: &ChainSamples, thresholds: &Thresholds) -> WeightSelection {
    let (m, r, draws) = (samples.m(), samples.r(), samples.len());
    let q = crate::mixture::pollutants_for_components(r).expect("r is triangular");
    let mut inclusion = vec![0.0; m * r];
    for s in 0..draws {
        for t in 0..m {
            for (k, &w) in samples.weights(s, t).iter().enumerate() {
                if w > 0.0 {
                    inclusion[t * r + k] += 1.0;
                }
            }
        }
    }
    if draws > 0 {
        inclusion.iter_mut().for_each(|v| *v /= draws as f64);
    }
    let selected = (0..m)
        .flat_map(|t| select_components_with(&inclusion[t * r..(t + 1) * r], q, thresholds))
        .collect();
    WeightSelection {
        m,
        q,
        inclusion,
        selected,
    }
}

/// Change in log odds from a one-unit increase in pollutant `j` at period `t`,
/// holding the others at `z`: `(λ_j + Σ_k λ̃_jk z_k) α`.
pub fn pollutant_effect(components: &[f64], q: usize, alpha: f64, z: &[f64], j: usize) -> f64 {
    let mut slope = components[j];
    for (idx, (a, b)) in pairs(q).enumerate() {
        let w = components[q + idx];
        if a == j {
            slope += w * z[b];
        } else if b == j {
            slope += w * z[a];
        }
    }
    slope * alpha
}

/// Change in log odds from raising every pollutant by one unit from `z`.
///
/// Equals `(1 + Σ λ̃_jk (z_j + z_k)) α` whenever the weights sum to one, and 0
/// when every weight is zero.
pub fn all_pollutant_effect(components: &[f64], q: usize, alpha: f64, z: &[f64]) -> f64 {
    let shifted: Vec<f64> = z.iter().map(|v| v + 1.0).collect();
    (weighted_exposure(components, q, &shifted) - weighted_exposure(components, q, z)) * alpha
}

/// Long-run variance `σ²` of a stationary series, so that `Var(mean) ≈ σ²/n`.
///
/// Lag-window estimate with a Parzen taper and bandwidth of 4% of the length,
/// corrected for the bias from estimating the mean.
pub fn long_run_variance(x: &[f64]) -> f64 {
    let n = x.len();
    let mu = mean(x);
    let autocov = |lag: usize| -> f64 {
        (lag..n).map(|i| (x[i] - mu) * (x[i - lag] - mu)).sum::<f64>() / n as f64
    };
    let bandwidth = ((0.04 * n as f64).round() as usize).max(1);
    let mut s = autocov(0);
    let mut window_mass = 1.0;
    for lag in 1..bandwidth {
        let u = lag as f64 / bandwidth as f64;
        let w = if u <= 0.5 {
            1.0 - 6.0 * u * u + 6.0 * u * u * u
        } else {
            2.0 * (1.0 - u).powi(3)
        };
        s += 2.0 * w * autocov(lag);
        window_mass += 2.0 * w;
    }
    // centering at the sample mean biases every autocovariance down by about σ²/n
    let correction = 1.0 - window_mass / n as f64;
    if correction > 0.0 {
        s /= correction;
    }
    s.max(0.0)
}

/// Geweke z-score comparing the first `frac_a` and last `frac_b` of a chain.
pub fn geweke_diagnostic(chain: &[f64], frac_a: f64, frac_b: f64) -> Result<f64> {
    const MIN_LEN: usize = 100;
    if chain.len() < MIN_LEN {
        return Err(Error::ChainTooShort {
            min: MIN_LEN,
            got: chain.len(),
        });
    }
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "segment fractions {frac_a} and {frac_b} must be positive and sum to at most 1"
        )));
    }
    let n = chain.len();
    let n_a = ((frac_a * n as f64).round() as usize).max(2);
    let n_b = ((frac_b * n as f64).round() as usize).max(2);
    let a = &chain[..n_a];
    let b = &chain[n - n_b..];
    let var = long_run_variance(a) / n_a as f64 + long_run_variance(b) / n_b as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean(a) - mean(b)) / var.sqrt())
}

/// Posterior summary of one scalar trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Effective sample size from the long-run variance; `None` for constant traces.
    pub ess: Option<f64>,
    pub geweke_z: Option<f64>,
}

pub fn summarize_trace(name: &str, trace: &[f64]) -> Option<TraceSummary> {
    if trace.is_empty() {
        return None;
    }
    let mut sorted = trace.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let sd = if trace.len() > 1 { variance(trace).sqrt() } else { 0.0 };
    let lrv = long_run_variance(trace);
    let ess = (lrv > 0.0 && trace.len() > 1).then(|| trace.len() as f64 * sd * sd / lrv);
    Some(TraceSummary {
        name: name.to_string(),
        mean: mean(trace),
        sd,
        q05: quantile_sorted(&sorted, 0.05),
        q50: quantile_sorted(&sorted, 0.5),
        q95: quantile_sorted(&sorted, 0.95),
        ess,
        geweke_z: geweke_diagnostic(trace, 0.1, 0.5).ok(),
    })
}

/// Summaries of every named scalar trace of a chain.
pub fn summarize_chain(samples: &ChainSamples) -> Vec<TraceSummary> {
    samples
        .named_traces()
        .iter()
        .filter_map(|(name, trace)| summarize_trace(name, trace))
        .collect()
}
