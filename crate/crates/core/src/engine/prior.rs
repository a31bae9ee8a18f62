//! Draws from the prior and from the likelihood, used for initialization and
//! for simulation-based checks of the sampler.

use super::sampler::usable_corr;
use super::{SweepConfig, WeightMode};
use crate::covariance::ExpCorrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{draw_polya_gamma, std_normal};
use crate::mixture::{component_count, LatentWeightField};
use crate::model::{ChainState, ExposureDataset, Priors, RiskProcessState};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

const MAX_PRIOR_REDRAWS: usize = 1000;

/// `L z` for the Cholesky factor `L` of `Σ`.
fn draw_correlated<R: Rng + ?Sized>(corr: &ExpCorrMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let m = corr.m();
    let l = corr.chol().lower();
    let z: Vec<f64> = (0..m).map(|_| std_normal(rng)).collect();
    (0..m).map(|t| (0..=t).map(|s| l[(t, s)] * z[s]).sum()).collect()
}

/// λ* ~ MVN(0, Σ(φ_λ) ⊗ I_r): each component is an independent correlated path.
pub fn draw_latent_field<R: Rng + ?Sized>(
    m: usize,
    q: usize,
    corr_lambda: &ExpCorrMatrix<f64>,
    rng: &mut R,
) -> LatentWeightField<f64> {
    let r = component_count(q);
    let mut values = vec![0.0; m * r];
    for k in 0..r {
        for (t, v) in draw_correlated(corr_lambda, rng).into_iter().enumerate() {
            values[t * r + k] = v;
        }
    }
    LatentWeightField::new(m, q, values).expect("field length matches m * r")
}

fn frozen_for(config: &SweepConfig, q: usize) -> Option<Vec<f64>> {
    match config.weight_mode {
        WeightMode::Estimated => None,
        WeightMode::Equal => {
            let r = component_count(q);
            Some(vec![1.0 / r as f64; r])
        }
    }
}

fn draw_pg_latents<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<()> {
    let ell = state.linear_predictor();
    for (w, l) in state.w.iter_mut().zip(ell) {
        *w = draw_polya_gamma(1, l, rng)?;
    }
    Ok(())
}

/// The neutral starting point: β = 0, δ = 0, A = I, φ = 1, with λ* and γ* from
/// their priors and w from its conditional.
pub fn neutral_start<R: Rng + ?Sized>(data: &ExposureDataset, config: &SweepConfig, rng: &mut R) -> Result<ChainState> {
    let m = data.m();
    let corr = ExpCorrMatrix::new(m, 1.0)?;
    let field = draw_latent_field(m, data.q(), &corr, rng);
    let gamma_star: Vec<f64> = (0..m).map(|_| std_normal(rng)).collect();
    let mut risk = RiskProcessState::from_parts(vec![0.0; m], vec![0.0; m], gamma_star, (1.0, 0.0, 1.0), (1.0, 1.0));
    if config.force_gamma_off {
        risk.gamma.iter_mut().for_each(|g| *g = false);
    }
    let mut state = ChainState::assemble(
        data,
        vec![0.0; data.p()],
        field,
        1.0,
        risk,
        vec![0.25; data.n()],
        frozen_for(config, data.q()),
    )?;
    draw_pg_latents(&mut state, rng)?;
    Ok(state)
}

fn draw_decay<R: Rng + ?Sized>(m: usize, priors: &Priors, rng: &mut R) -> Result<ExpCorrMatrix<f64>> {
    let gamma = Gamma::new(priors.alpha_phi, 1.0 / priors.beta_phi).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    for _ in 0..MAX_PRIOR_REDRAWS {
        if let Some(c) = usable_corr(m, gamma.sample(rng)) {
            return Ok(c);
        }
    }
    Err(Error::NotPositiveDefinite("no usable decay rate drawn from the prior".into()))
}

/// A full draw of every parameter from the prior, with w drawn from its
/// conditional given the resulting linear predictor.
///
/// Decay rates whose correlation matrix needs jitter are redrawn; the sampler
/// rejects the same values, so both sides share one effective prior.
pub fn draw_prior_state<R: Rng + ?Sized>(
    data: &ExposureDataset,
    priors: &Priors,
    config: &SweepConfig,
    rng: &mut R,
) -> Result<ChainState> {
    priors.validate()?;
    let m = data.m();
    let sd_beta = priors.sigma2_beta.sqrt();
    let beta: Vec<f64> = (0..data.p()).map(|_| sd_beta * std_normal(rng)).collect();

    let corr_lambda = draw_decay(m, priors, rng)?;
    let field = draw_latent_field(m, data.q(), &corr_lambda, rng);

    let corr1 = draw_decay(m, priors, rng)?;
    let corr2 = draw_decay(m, priors, rng)?;
    let delta1 = draw_correlated(&corr1, rng);
    let delta2 = draw_correlated(&corr2, rng);

    let sd_a = priors.sigma2_a.sqrt();
    let a11 = (sd_a * std_normal(rng)).exp();
    let a21 = sd_a * std_normal(rng);
    let a22 = (sd_a * std_normal(rng)).exp();

    let mut risk = RiskProcessState::from_parts(
        delta1,
        delta2,
        vec![0.0; m],
        (a11, a21, a22),
        (corr1.phi(), corr2.phi()),
    );
    for t in 0..m {
        risk.gamma_star[t] = risk.eta[t] + std_normal(rng);
        risk.gamma[t] = !config.force_gamma_off && risk.gamma_star[t] > 0.0;
    }

    let mut state = ChainState::assemble(
        data,
        beta,
        field,
        corr_lambda.phi(),
        risk,
        vec![0.25; data.n()],
        frozen_for(config, data.q()),
    )?;
    draw_pg_latents(&mut state, rng)?;
    Ok(state)
}

/// `Y_i ~ Bernoulli(logit⁻¹(ℓ_i))` at the state's linear predictor.
pub fn simulate_outcomes<R: Rng + ?Sized>(state: &ChainState, rng: &mut R) -> Vec<u8> {
    state
        .linear_predictor()
        .into_iter()
        .map(|l| {
            let p = 1.0 / (1.0 + (-l).exp());
            let u: f64 = rng.random();
            (u < p) as u8
        })
        .collect()
}
