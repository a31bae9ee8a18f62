use super::SimTruth;
use crate::engine::ChainSamples;
use crate::error::{Error, Result};
use crate::inference::{WeightSelection, WindowDecision};
use serde::{Deserialize, Serialize};

/// A score built from conditional posterior means; `flagged` is set when some
/// period had no draw with γ(t) = 1 and the unconditional mean was used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalScore {
    pub value: f64,
    pub flagged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionAccuracy {
    pub main: f64,
    /// `None` when there are no interaction components (q = 1).
    pub interaction: Option<f64>,
}

fn check_periods(truth: &SimTruth, m: usize) -> Result<()> {
    if truth.m != m {
        return Err(Error::dim("periods", truth.m, m));
    }
    Ok(())
}

/// Fraction of periods whose estimated critical status matches the truth.
pub fn score_cw_accuracy(truth: &SimTruth, decisions: &[WindowDecision]) -> Result<f64> {
    check_periods(truth, decisions.len())?;
    let hits = decisions
        .iter()
        .zip(&truth.critical)
        .filter(|(d, &c)| d.verdict.is_critical() == c)
        .count();
    Ok(hits as f64 / truth.m as f64)
}

/// Posterior mean of the weight components at period `t` over draws with
/// γ(t) = 1; falls back to all draws when there are none (second value false).
pub fn conditional_weight_means(samples: &ChainSamples, t: usize) -> Result<(Vec<f64>, bool)> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws to score".into()));
    }
    let on: Vec<usize> = (0..samples.len()).filter(|&s| samples.gamma(s)[t]).collect();
    let (draws, conditional): (Vec<usize>, bool) = if on.is_empty() {
        ((0..samples.len()).collect(), false)
    } else {
        (on, true)
    };
    let mut acc = vec![0.0; samples.r()];
    for &s in &draws {
        for (a, w) in acc.iter_mut().zip(samples.weights(s, t)) {
            *a += w;
        }
    }
    acc.iter_mut().for_each(|a| *a /= draws.len() as f64);
    Ok((acc, conditional))
}

/// Mean squared error of the weight components, averaged over the true
/// critical periods and all components.
pub fn score_amse_lambda(truth: &SimTruth, samples: &ChainSamples) -> Result<ConditionalScore> {
    check_periods(truth, samples.m())?;
    let mut total = 0.0;
    let mut count = 0usize;
    let mut flagged = false;
    for t in truth.critical_periods() {
        let (est, conditional) = conditional_weight_means(samples, t)?;
        flagged |= !conditional;
        for (e, w) in est.iter().zip(truth.weights_at(t)) {
            total += (e - w).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::InvalidArgument("truth has no critical periods".into()));
    }
    Ok(ConditionalScore {
        value: total / count as f64,
        flagged,
    })
}

/// Mean squared error of exp(α(t)) over all periods, using the posterior mean
/// of exp(α(t)) given γ(t) = 1.
pub fn score_amse_exp_alpha(truth: &SimTruth, samples: &ChainSamples) -> Result<ConditionalScore> {
    check_periods(truth, samples.m())?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no posterior draws to score".into()));
    }
    let mut total = 0.0;
    let mut flagged = false;
    for t in 0..truth.m {
        let on: Vec<f64> = (0..samples.len())
            .filter(|&s| samples.gamma(s)[t])
            .map(|s| samples.alpha(s)[t].exp())
            .collect();
        let est = if on.is_empty() {
            flagged = true;
            (0..samples.len()).map(|s| samples.alpha(s)[t].exp()).sum::<f64>() / samples.len() as f64
        } else {
            on.iter().sum::<f64>() / on.len() as f64
        };
        total += (est - truth.alpha[t].exp()).powi(2);
    }
    Ok(ConditionalScore {
        value: total / truth.m as f64,
        flagged,
    })
}

/// Agreement between selected components and truly nonzero weights over the
/// true critical periods, for mains and interactions separately.
pub fn score_weight_selection(truth: &SimTruth, selection: &WeightSelection) -> Result<SelectionAccuracy> {
    check_periods(truth, selection.m)?;
    if selection.q != truth.q {
        return Err(Error::dim("pollutants", truth.q, selection.q));
    }
    let q = truth.q;
    let (mut main_hits, mut main_n, mut int_hits, mut int_n) = (0usize, 0usize, 0usize, 0usize);
    for t in truth.critical_periods() {
        let sel = selection.selected_at(t);
        for (k, &w) in truth.weights_at(t).iter().enumerate() {
            let hit = sel[k] == (w > 0.0);
            if k < q {
                main_n += 1;
                main_hits += hit as usize;
            } else {
                int_n += 1;
                int_hits += hit as usize;
            }
        }
    }
    if main_n == 0 {
        return Err(Error::InvalidArgument("truth has no critical periods".into()));
    }
    Ok(SelectionAccuracy {
        main: main_hits as f64 / main_n as f64,
        interaction: (int_n > 0).then(|| int_hits as f64 / int_n as f64),
    })
}
