//! Gibbs/Metropolis sweeps, burn-in and thinning.

pub mod conditionals;
mod prior;
mod sampler;

pub use prior::{draw_latent_field, draw_prior_state, neutral_start, simulate_outcomes};
pub use sampler::{Proposal, Proposals, Sampler};

use crate::error::{Error, Result};
use crate::mixture::component_count;
use crate::model::{ExposureDataset, Priors};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

/// Whether mixture weights are estimated or fixed at `1/r` each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Estimated,
    Equal,
}

/// Initial random-walk scales for every Metropolis step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub ln_a11: f64,
    pub a21: f64,
    pub ln_a22: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi_lambda: f64,
    pub lambda_block: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self {
            ln_a11: 0.5,
            a21: 0.5,
            ln_a22: 0.5,
            psi1: 0.5,
            psi2: 0.5,
            psi_lambda: 0.5,
            lambda_block: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_burn: usize,
    pub n_keep: usize,
    pub thin: usize,
    /// Robbins–Monro step-size adaptation during burn-in.
    pub adapt: bool,
    pub target_accept: f64,
    pub steps: StepSizes,
    pub weight_mode: WeightMode,
    /// Pins every γ(t) at 0 so the risk and weight processes sample their priors.
    #[serde(default)]
    pub force_gamma_off: bool,
    /// Sweeps between full cache audits; 0 disables auditing.
    #[serde(default)]
    pub audit_interval: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::simulation()
    }
}

impl SweepConfig {
    /// 10,000 burn-in sweeps, then 1,000 draws kept from every 10th sweep.
    pub fn simulation() -> Self {
        Self {
            n_burn: 10_000,
            n_keep: 1_000,
            thin: 10,
            adapt: true,
            target_accept: 0.35,
            steps: StepSizes::default(),
            weight_mode: WeightMode::Estimated,
            force_gamma_off: false,
            audit_interval: if cfg!(debug_assertions) { 100 } else { 0 },
        }
    }

    /// 10,000 burn-in sweeps, then 10,000 draws kept from every 10th sweep.
    pub fn application() -> Self {
        Self {
            n_keep: 10_000,
            ..Self::simulation()
        }
    }

    pub fn with_counts(mut self, n_burn: usize, n_keep: usize, thin: usize) -> Self {
        self.n_burn = n_burn;
        self.n_keep = n_keep;
        self.thin = thin;
        self
    }

    pub fn with_weight_mode(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn total_sweeps(&self) -> usize {
        self.n_burn + self.n_keep * self.thin
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be >= 1".into()));
        }
        if !(self.target_accept >= 0.2 && self.target_accept <= 0.6) {
            return Err(Error::InvalidArgument(format!(
                "target acceptance {} outside [0.20, 0.60]",
                self.target_accept
            )));
        }
        let s = &self.steps;
        for (name, v) in [
            ("ln_a11", s.ln_a11),
            ("a21", s.a21),
            ("ln_a22", s.ln_a22),
            ("psi1", s.psi1),
            ("psi2", s.psi2),
            ("psi_lambda", s.psi_lambda),
            ("lambda_block", s.lambda_block),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("step size {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Acceptance counts for one Metropolis step, split by phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRecord {
    pub name: String,
    pub burn_accepted: u64,
    pub burn_proposed: u64,
    pub accepted: u64,
    pub proposed: u64,
    pub final_step: f64,
}

impl AcceptanceRecord {
    /// Acceptance rate after adaptation stopped.
    pub fn rate(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceLog {
    pub records: Vec<AcceptanceRecord>,
}

impl AcceptanceLog {
    pub fn get(&self, name: &str) -> Option<&AcceptanceRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}

/// Thinned draws from one chain, stored flat in draw-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSamples {
    pub seed: u64,
    pub stream_id: u64,
    p: usize,
    m: usize,
    r: usize,
    draws: usize,
    beta: Vec<f64>,
    weights: Vec<f64>,
    latent: Vec<f64>,
    alpha: Vec<f64>,
    gamma: Vec<bool>,
    delta1: Vec<f64>,
    delta2: Vec<f64>,
    scalars: Vec<[f64; 7]>,
    pub acceptance: AcceptanceLog,
}

/// Names of the per-draw scalar parameters, in storage order.
pub const SCALAR_NAMES: [&str; 7] = ["phi_lambda", "phi_1", "phi_2", "A11", "A21", "A22", "log_lik"];

impl ChainSamples {
    fn with_capacity(seed: u64, stream_id: u64, p: usize, m: usize, r: usize, keep: usize) -> Self {
        Self {
            seed,
            stream_id,
            p,
            m,
            r,
            draws: 0,
            beta: Vec::with_capacity(keep * p),
            weights: Vec::with_capacity(keep * m * r),
            latent: Vec::with_capacity(keep * m * r),
            alpha: Vec::with_capacity(keep * m),
            gamma: Vec::with_capacity(keep * m),
            delta1: Vec::with_capacity(keep * m),
            delta2: Vec::with_capacity(keep * m),
            scalars: Vec::with_capacity(keep),
            acceptance: AcceptanceLog::default(),
        }
    }

    fn record(&mut self, sampler: &Sampler<'_>) {
        let s = sampler.state();
        self.beta.extend_from_slice(&s.beta);
        for t in 0..self.m {
            self.weights.extend_from_slice(s.period_weights(t));
        }
        self.latent.extend_from_slice(s.weight_field.as_slice());
        self.alpha.extend(s.risk.alpha_vec());
        self.gamma.extend_from_slice(&s.risk.gamma);
        self.delta1.extend_from_slice(&s.risk.delta1);
        self.delta2.extend_from_slice(&s.risk.delta2);
        let r = &s.risk;
        self.scalars.push([
            s.phi_lambda,
            r.phi1,
            r.phi2,
            r.a11,
            r.a21,
            r.a22,
            s.log_likelihood(sampler.data()),
        ]);
        self.draws += 1;
    }

    pub fn len(&self) -> usize {
        self.draws
    }

    pub fn is_empty(&self) -> bool {
        self.draws == 0
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn beta(&self, s: usize) -> &[f64] {
        &self.beta[s * self.p..(s + 1) * self.p]
    }

    /// Transformed weight components of draw `s`, period `t`.
    pub fn weights(&self, s: usize, t: usize) -> &[f64] {
        let o = (s * self.m + t) * self.r;
        &self.weights[o..o + self.r]
    }

    /// Latent λ* of draw `s`, period `t`.
    pub fn latent(&self, s: usize, t: usize) -> &[f64] {
        let o = (s * self.m + t) * self.r;
        &self.latent[o..o + self.r]
    }

    pub fn alpha(&self, s: usize) -> &[f64] {
        &self.alpha[s * self.m..(s + 1) * self.m]
    }

    pub fn gamma(&self, s: usize) -> &[bool] {
        &self.gamma[s * self.m..(s + 1) * self.m]
    }

    pub fn delta1(&self, s: usize) -> &[f64] {
        &self.delta1[s * self.m..(s + 1) * self.m]
    }

    pub fn delta2(&self, s: usize) -> &[f64] {
        &self.delta2[s * self.m..(s + 1) * self.m]
    }

    /// Value of scalar `name` (one of [`SCALAR_NAMES`]) at draw `s`.
    pub fn scalar(&self, s: usize, name: &str) -> Option<f64> {
        let k = SCALAR_NAMES.iter().position(|n| *n == name)?;
        Some(self.scalars[s][k])
    }

    pub fn scalar_trace(&self, name: &str) -> Option<Vec<f64>> {
        let k = SCALAR_NAMES.iter().position(|n| *n == name)?;
        Some(self.scalars.iter().map(|v| v[k]).collect())
    }

    pub fn alpha_trace(&self, t: usize) -> Vec<f64> {
        (0..self.draws).map(|s| self.alpha(s)[t]).collect()
    }

    pub fn beta_trace(&self, j: usize) -> Vec<f64> {
        (0..self.draws).map(|s| self.beta(s)[j]).collect()
    }

    pub fn weight_trace(&self, t: usize, k: usize) -> Vec<f64> {
        (0..self.draws).map(|s| self.weights(s, t)[k]).collect()
    }

    /// Every scalar trace with a stable name: `beta_j`, `alpha_t` (1-based),
    /// then the hyperparameters and log-likelihood.
    pub fn named_traces(&self) -> Vec<(String, Vec<f64>)> {
        let mut out = Vec::new();
        for j in 0..self.p {
            out.push((format!("beta_{}", j + 1), self.beta_trace(j)));
        }
        for t in 0..self.m {
            out.push((format!("alpha_{}", t + 1), self.alpha_trace(t)));
        }
        for name in SCALAR_NAMES {
            out.push((name.to_string(), self.scalar_trace(name).unwrap()));
        }
        out
    }
}

/// Runs burn-in then records `n_keep` draws, each `thin` sweeps apart.
pub fn run_chain(data: &ExposureDataset, priors: &Priors, config: &SweepConfig, rng: RngStream) -> Result<ChainSamples> {
    let (seed, stream_id) = (rng.seed(), rng.stream_id());
    let mut sampler = Sampler::new(data, *priors, config.clone(), rng)?;
    let r = component_count(data.q());
    let mut samples = ChainSamples::with_capacity(seed, stream_id, data.p(), data.m(), r, config.n_keep);
    sampler.set_adapting(config.adapt);
    for _ in 0..config.n_burn {
        sampler.sweep()?;
    }
    sampler.set_adapting(false);
    for _ in 0..config.n_keep {
        for _ in 0..config.thin {
            sampler.sweep()?;
        }
        samples.record(&sampler);
    }
    samples.acceptance = sampler.acceptance();
    Ok(samples)
}

/// The equal-weight baseline: weights frozen at `2/(q(q+1))`, λ* and φ_λ not updated.
pub fn run_ew_baseline(
    data: &ExposureDataset,
    priors: &Priors,
    config: &SweepConfig,
    rng: RngStream,
) -> Result<ChainSamples> {
    let config = config.clone().with_weight_mode(WeightMode::Equal);
    run_chain(data, priors, &config, rng)
}
