use super::conditionals::{
    a11_statistics, beta_conditional, delta1_conditional, delta2_conditional, gamma_log_odds,
    lambda_block_proposal, log_target_a21, LambdaBlockProposal, log_target_ln_a11, log_target_ln_a22, log_target_psi_delta,
    log_target_psi_lambda,
};
use super::prior::neutral_start;
use super::{AcceptanceLog, AcceptanceRecord, SweepConfig, WeightMode};
use crate::covariance::ExpCorrMatrix;
use crate::error::{Error, Result};
use crate::kernels::{draw_polya_gamma, draw_truncated_normal, std_normal, Side};
use crate::mixture::component_count;
use crate::model::{ChainState, ExposureDataset, Priors};
use crate::rng::RngStream;
use rand::Rng;

/// Random-walk proposal scale with Robbins–Monro adaptation bookkeeping.
#[derive(Clone, Debug)]
pub struct Proposal {
    pub step: f64,
    adaptations: u64,
    burn: (u64, u64),
    kept: (u64, u64),
}

impl Proposal {
    fn new(step: f64) -> Self {
        Self {
            step,
            adaptations: 0,
            burn: (0, 0),
            kept: (0, 0),
        }
    }

    fn record(&mut self, accepted: bool, adapting: bool, target: f64) {
        let counts = if adapting { &mut self.burn } else { &mut self.kept };
        counts.0 += accepted as u64;
        counts.1 += 1;
        if adapting {
            self.adaptations += 1;
            let gain = (self.adaptations as f64).powf(-0.6);
            let a = if accepted { 1.0 } else { 0.0 };
            self.step *= (gain * (a - target)).exp();
        }
    }

    fn to_record(&self, name: String) -> AcceptanceRecord {
        AcceptanceRecord {
            name,
            burn_accepted: self.burn.0,
            burn_proposed: self.burn.1,
            accepted: self.kept.0,
            proposed: self.kept.1,
            final_step: self.step,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Proposals {
    pub a11: Proposal,
    pub a21: Proposal,
    pub a22: Proposal,
    pub psi1: Proposal,
    pub psi2: Proposal,
    pub psi_lambda: Proposal,
    pub lambda: Vec<Proposal>,
}

impl Proposals {
    /// Sets every proposal scale to the same value (zero freezes the Metropolis moves).
    pub fn set_all(&mut self, step: f64) {
        for p in [
            &mut self.a11,
            &mut self.a21,
            &mut self.a22,
            &mut self.psi1,
            &mut self.psi2,
            &mut self.psi_lambda,
        ] {
            p.step = step;
        }
        self.lambda.iter_mut().for_each(|p| p.step = step);
    }
}

/// One chain: owns its state, caches, proposal scales and random stream.
pub struct Sampler<'a> {
    data: &'a ExposureDataset,
    kappa: Vec<f64>,
    priors: Priors,
    config: SweepConfig,
    state: ChainState,
    corr_lambda: ExpCorrMatrix<f64>,
    corr1: ExpCorrMatrix<f64>,
    corr2: ExpCorrMatrix<f64>,
    proposals: Proposals,
    rng: RngStream,
    adapting: bool,
    sweeps: u64,
}

impl<'a> Sampler<'a> {
    /// Neutral start: β = 0, δ = 0, A = I, φ = 1, λ* and γ* from their priors.
    pub fn new(data: &'a ExposureDataset, priors: Priors, config: SweepConfig, mut rng: RngStream) -> Result<Self> {
        let state = neutral_start(data, &config, &mut rng)?;
        Self::from_state(data, priors, config, state, rng)
    }

    pub fn from_state(
        data: &'a ExposureDataset,
        priors: Priors,
        config: SweepConfig,
        state: ChainState,
        rng: RngStream,
    ) -> Result<Self> {
        priors.validate()?;
        config.validate()?;
        let m = data.m();
        let steps = &config.steps;
        let proposals = Proposals {
            a11: Proposal::new(steps.ln_a11),
            a21: Proposal::new(steps.a21),
            a22: Proposal::new(steps.ln_a22),
            psi1: Proposal::new(steps.psi1),
            psi2: Proposal::new(steps.psi2),
            psi_lambda: Proposal::new(steps.psi_lambda),
            lambda: vec![Proposal::new(steps.lambda_block); m],
        };
        let corr_lambda = ExpCorrMatrix::new(m, state.phi_lambda)?;
        let corr1 = ExpCorrMatrix::new(m, state.risk.phi1)?;
        let corr2 = ExpCorrMatrix::new(m, state.risk.phi2)?;
        let kappa = data.outcomes().iter().map(|&y| y as f64 - 0.5).collect();
        let adapting = config.adapt;
        Ok(Self {
            data,
            kappa,
            priors,
            config,
            state,
            corr_lambda,
            corr1,
            corr2,
            proposals,
            rng,
            adapting,
            sweeps: 0,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn into_state(self) -> ChainState {
        self.state
    }

    pub fn data(&self) -> &ExposureDataset {
        self.data
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn priors(&self) -> &Priors {
        &self.priors
    }

    pub fn config(&self) -> &SweepConfig {
        &self.config
    }

    pub fn rng_mut(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    pub fn proposals(&self) -> &Proposals {
        &self.proposals
    }

    pub fn proposals_mut(&mut self) -> &mut Proposals {
        &mut self.proposals
    }

    pub fn corr_lambda(&self) -> &ExpCorrMatrix<f64> {
        &self.corr_lambda
    }

    pub fn corr1(&self) -> &ExpCorrMatrix<f64> {
        &self.corr1
    }

    pub fn corr2(&self) -> &ExpCorrMatrix<f64> {
        &self.corr2
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    /// Turns proposal adaptation on or off; kept-phase counters start when it is off.
    pub fn set_adapting(&mut self, on: bool) {
        self.adapting = on;
    }

    /// Replaces the outcome vector the sampler conditions on.
    ///
    /// The Pólya-Gamma latents stay valid: given the linear predictor they are
    /// independent of the outcomes.
    pub fn set_outcomes(&mut self, y: &[u8]) -> Result<()> {
        if y.len() != self.kappa.len() {
            return Err(Error::dim("outcomes", self.kappa.len(), y.len()));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!("non-binary outcome at row {}", i + 1)));
        }
        for (k, &yi) in self.kappa.iter_mut().zip(y) {
            *k = yi as f64 - 0.5;
        }
        Ok(())
    }

    fn estimates_weights(&self) -> bool {
        self.config.weight_mode == WeightMode::Estimated
    }

    /// One full sweep in the fixed order
    /// w → β → λ* → φ_λ → δ₁ → A₁₁ → γ → γ* → δ₂ → A₂₁ → A₂₂ → φ₁ → φ₂.
    pub fn sweep(&mut self) -> Result<()> {
        self.update_pg_latents()?;
        self.update_beta()?;
        if self.estimates_weights() {
            self.update_lambda_star();
            self.update_phi_lambda()?;
        }
        self.update_delta1()?;
        self.update_a11();
        self.update_gamma();
        self.update_gamma_star()?;
        self.update_delta2()?;
        self.update_a21();
        self.update_a22();
        self.update_phi1()?;
        self.update_phi2()?;
        self.sweeps += 1;
        if self.config.audit_interval > 0 && self.sweeps % self.config.audit_interval as u64 == 0 {
            let drift = self.state.audit(self.data);
            if drift > 1e-9 {
                return Err(Error::CacheDrift(drift));
            }
        }
        Ok(())
    }

    pub fn update_pg_latents(&mut self) -> Result<()> {
        let ell = self.state.linear_predictor();
        for (w, l) in self.state.w.iter_mut().zip(ell) {
            *w = draw_polya_gamma(1, l, &mut self.rng)?;
        }
        Ok(())
    }

    pub fn update_beta(&mut self) -> Result<()> {
        let cond = beta_conditional(&self.state, self.data, &self.kappa, self.priors.sigma2_beta)?;
        self.state.beta = cond.draw(&mut self.rng);
        self.state.refresh_xb(self.data);
        Ok(())
    }

    /// Blocked random-walk Metropolis, one block of length r per period.
    pub fn update_lambda_star(&mut self) {
        let m = self.data.m();
        let r = component_count(self.data.q());
        for t in 0..m {
            let step = self.proposals.lambda[t].step;
            let block: Vec<f64> = self
                .state
                .weight_field
                .block(t)
                .iter()
                .map(|&v| v + step * std_normal(&mut self.rng))
                .collect();
            debug_assert_eq!(block.len(), r);
            let prop = lambda_block_proposal(&self.state, self.data, &self.kappa, &self.corr_lambda, t, block);
            let accepted = self.metropolis_accept(prop.log_ratio);
            if accepted {
                self.accept_lambda_block(prop);
            }
            self.proposals.lambda[t].record(accepted, self.adapting, self.config.target_accept);
        }
    }

    fn accept_lambda_block(&mut self, prop: LambdaBlockProposal) {
        let t = prop.period;
        self.state.weight_field.block_mut(t).copy_from_slice(&prop.block);
        match prop.column {
            Some(col) => {
                self.state.weights_mut(t).copy_from_slice(&prop.components);
                self.state.replace_design_column(t, &col);
            }
            None => self.state.refresh_period(t, self.data),
        }
    }

    pub fn update_phi_lambda(&mut self) -> Result<()> {
        let step = self.proposals.psi_lambda.step;
        let psi = self.state.phi_lambda.ln();
        let psi_new = psi + step * std_normal(&mut self.rng);
        let accepted = match usable_corr(self.data.m(), psi_new.exp()) {
            Some(corr_new) => {
                let cur = log_target_psi_lambda(&self.corr_lambda, &self.state.weight_field, &self.priors)?;
                let new = log_target_psi_lambda(&corr_new, &self.state.weight_field, &self.priors)?;
                let ok = self.metropolis_accept(new - cur);
                if ok {
                    self.state.phi_lambda = corr_new.phi();
                    self.corr_lambda = corr_new;
                }
                ok
            }
            None => false,
        };
        self.proposals.psi_lambda.record(accepted, self.adapting, self.config.target_accept);
        Ok(())
    }

    pub fn update_delta1(&mut self) -> Result<()> {
        let cond = delta1_conditional(&self.state, &self.kappa, &self.corr1)?;
        self.state.risk.delta1 = cond.draw(&mut self.rng);
        self.state.risk.refresh_theta_eta();
        self.state.refresh_g_alpha();
        Ok(())
    }

    pub fn update_a11(&mut self) {
        let stats = a11_statistics(&self.state, &self.kappa);
        let x = self.state.risk.a11.ln();
        let x_new = x + self.proposals.a11.step * std_normal(&mut self.rng);
        let s2a = self.priors.sigma2_a;
        let log_ratio = log_target_ln_a11(stats, x_new, s2a) - log_target_ln_a11(stats, x, s2a);
        let accepted = self.metropolis_accept(log_ratio);
        if accepted && x_new != x {
            self.state.risk.a11 = x_new.exp();
            self.state.risk.refresh_theta_eta();
            self.state.refresh_g_alpha();
        }
        self.proposals.a11.record(accepted, self.adapting, self.config.target_accept);
    }

    /// γ(t) ~ Bernoulli(κ(t)) period by period, refreshing α and Gα as it goes.
    pub fn update_gamma(&mut self) {
        if self.config.force_gamma_off {
            return;
        }
        for t in 0..self.data.m() {
            let log_odds = gamma_log_odds(&self.state, &self.kappa, t);
            let u: f64 = self.rng.random();
            let on = (u.ln() - (1.0 - u).ln()) < log_odds;
            if on != self.state.risk.gamma[t] {
                let before = self.state.risk.alpha(t);
                self.state.risk.gamma[t] = on;
                let after = self.state.risk.alpha(t);
                self.state.shift_g_alpha(t, after - before);
            }
        }
    }

    pub fn update_gamma_star(&mut self) -> Result<()> {
        let risk = &mut self.state.risk;
        for t in 0..risk.m() {
            risk.gamma_star[t] = if self.config.force_gamma_off {
                risk.eta[t] + std_normal(&mut self.rng)
            } else {
                let side = if risk.gamma[t] { Side::AboveZero } else { Side::AtMostZero };
                draw_truncated_normal(risk.eta[t], 1.0, side, &mut self.rng)?
            };
        }
        Ok(())
    }

    pub fn update_delta2(&mut self) -> Result<()> {
        let cond = delta2_conditional(&self.state, &self.corr2)?;
        self.state.risk.delta2 = cond.draw(&mut self.rng);
        self.state.risk.refresh_theta_eta();
        Ok(())
    }

    pub fn update_a21(&mut self) {
        let cur = self.state.risk.a21;
        let new = cur + self.proposals.a21.step * std_normal(&mut self.rng);
        let s2a = self.priors.sigma2_a;
        let log_ratio = log_target_a21(&self.state, new, s2a) - log_target_a21(&self.state, cur, s2a);
        let accepted = self.metropolis_accept(log_ratio);
        if accepted {
            self.state.risk.a21 = new;
            self.state.risk.refresh_theta_eta();
        }
        self.proposals.a21.record(accepted, self.adapting, self.config.target_accept);
    }

    pub fn update_a22(&mut self) {
        let x = self.state.risk.a22.ln();
        let x_new = x + self.proposals.a22.step * std_normal(&mut self.rng);
        let s2a = self.priors.sigma2_a;
        let log_ratio = log_target_ln_a22(&self.state, x_new, s2a) - log_target_ln_a22(&self.state, x, s2a);
        let accepted = self.metropolis_accept(log_ratio);
        if accepted && x_new != x {
            self.state.risk.a22 = x_new.exp();
            self.state.risk.refresh_theta_eta();
        }
        self.proposals.a22.record(accepted, self.adapting, self.config.target_accept);
    }

    pub fn update_phi1(&mut self) -> Result<()> {
        self.update_phi_delta(1)
    }

    pub fn update_phi2(&mut self) -> Result<()> {
        self.update_phi_delta(2)
    }

    fn update_phi_delta(&mut self, which: u8) -> Result<()> {
        let (step, phi) = if which == 1 {
            (self.proposals.psi1.step, self.state.risk.phi1)
        } else {
            (self.proposals.psi2.step, self.state.risk.phi2)
        };
        let psi_new = phi.ln() + step * std_normal(&mut self.rng);
        let accepted = match usable_corr(self.data.m(), psi_new.exp()) {
            Some(corr_new) => {
                let (corr, delta) = if which == 1 {
                    (&self.corr1, &self.state.risk.delta1)
                } else {
                    (&self.corr2, &self.state.risk.delta2)
                };
                let log_ratio =
                    log_target_psi_delta(&corr_new, delta, &self.priors)? - log_target_psi_delta(corr, delta, &self.priors)?;
                let ok = self.metropolis_accept(log_ratio);
                if ok {
                    if which == 1 {
                        self.state.risk.phi1 = corr_new.phi();
                        self.corr1 = corr_new;
                    } else {
                        self.state.risk.phi2 = corr_new.phi();
                        self.corr2 = corr_new;
                    }
                }
                ok
            }
            None => false,
        };
        let prop = if which == 1 {
            &mut self.proposals.psi1
        } else {
            &mut self.proposals.psi2
        };
        prop.record(accepted, self.adapting, self.config.target_accept);
        Ok(())
    }

    fn metropolis_accept(&mut self, log_ratio: f64) -> bool {
        if log_ratio >= 0.0 {
            return true;
        }
        if log_ratio.is_nan() {
            return false;
        }
        let u: f64 = self.rng.random();
        u.ln() < log_ratio
    }

    /// Acceptance counts for every Metropolis step.
    pub fn acceptance(&self) -> AcceptanceLog {
        let p = &self.proposals;
        let mut records = vec![
            p.psi_lambda.to_record("psi_lambda".into()),
            p.a11.to_record("ln_A11".into()),
            p.a21.to_record("A21".into()),
            p.a22.to_record("ln_A22".into()),
            p.psi1.to_record("psi_1".into()),
            p.psi2.to_record("psi_2".into()),
        ];
        if self.estimates_weights() {
            for (t, prop) in p.lambda.iter().enumerate() {
                records.push(prop.to_record(format!("lambda_star_{}", t + 1)));
            }
        } else {
            records.remove(0);
        }
        AcceptanceLog { records }
    }
}

/// Correlation matrix for a proposed decay rate, or `None` when it cannot be
/// factored without jitter. Such proposals are rejected outright.
pub(crate) fn usable_corr(m: usize, phi: f64) -> Option<ExpCorrMatrix<f64>> {
    ExpCorrMatrix::new(m, phi).ok().filter(|c| c.chol().jitter() == 0.0)
}
