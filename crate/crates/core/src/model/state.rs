use crate::error::{Error, Result};
use crate::mixture::{component_count, weights_into, DesignMatrix, LatentWeightField};
use crate::model::{bernoulli_logit_loglik, ExposureDataset};

/// The risk machinery: α(t) = θ(t) γ(t), with (θ, η) = A (δ₁, δ₂).
#[derive(Clone, Debug, PartialEq)]
pub struct RiskProcessState {
    pub theta: Vec<f64>,
    pub gamma: Vec<bool>,
    pub gamma_star: Vec<f64>,
    pub eta: Vec<f64>,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub a11: f64,
    pub a21: f64,
    pub a22: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl RiskProcessState {
    /// Builds the state from its free parameters; θ and η are derived and
    /// γ(t) = 1{γ*(t) > 0}.
    pub fn from_parts(
        delta1: Vec<f64>,
        delta2: Vec<f64>,
        gamma_star: Vec<f64>,
        (a11, a21, a22): (f64, f64, f64),
        (phi1, phi2): (f64, f64),
    ) -> Self {
        let m = delta1.len();
        let gamma = gamma_star.iter().map(|&g| g > 0.0).collect();
        let mut s = Self {
            theta: vec![0.0; m],
            gamma,
            gamma_star,
            eta: vec![0.0; m],
            delta1,
            delta2,
            a11,
            a21,
            a22,
            phi1,
            phi2,
        };
        s.refresh_theta_eta();
        s
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    #[inline]
    pub fn alpha(&self, t: usize) -> f64 {
        if self.gamma[t] {
            self.theta[t]
        } else {
            0.0
        }
    }

    pub fn alpha_vec(&self) -> Vec<f64> {
        (0..self.m()).map(|t| self.alpha(t)).collect()
    }

    pub fn refresh_theta_eta(&mut self) {
        for t in 0..self.m() {
            self.theta[t] = self.a11 * self.delta1[t];
            self.eta[t] = self.a21 * self.delta1[t] + self.a22 * self.delta2[t];
        }
    }
}

/// One full parameter configuration plus the derived caches the sweep relies on.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub beta: Vec<f64>,
    pub weight_field: LatentWeightField<f64>,
    pub phi_lambda: f64,
    pub risk: RiskProcessState,
    /// Pólya-Gamma latents, one per subject.
    pub w: Vec<f64>,
    frozen_weights: Option<Vec<f64>>,
    weights: Vec<f64>,
    g: DesignMatrix<f64>,
    xb: Vec<f64>,
    g_alpha: Vec<f64>,
}

impl ChainState {
    /// Assembles a state and computes every cache from scratch.
    ///
    /// With `frozen_weights` set, every period uses that component vector and
    /// the latent field does not enter the likelihood.
    pub fn assemble(
        data: &ExposureDataset,
        beta: Vec<f64>,
        weight_field: LatentWeightField<f64>,
        phi_lambda: f64,
        risk: RiskProcessState,
        w: Vec<f64>,
        frozen_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (n, m, q, p) = (data.n(), data.m(), data.q(), data.p());
        let r = component_count(q);
        if beta.len() != p {
            return Err(Error::dim("beta", p, beta.len()));
        }
        if weight_field.m() != m || weight_field.q() != q {
            return Err(Error::dim("latent weight field", m * r, weight_field.as_slice().len()));
        }
        for (what, len) in [
            ("theta", risk.theta.len()),
            ("gamma", risk.gamma.len()),
            ("gamma_star", risk.gamma_star.len()),
            ("eta", risk.eta.len()),
            ("delta1", risk.delta1.len()),
            ("delta2", risk.delta2.len()),
        ] {
            if len != m {
                return Err(Error::dim(what, m, len));
            }
        }
        if w.len() != n {
            return Err(Error::dim("polya-gamma latents", n, w.len()));
        }
        if let Some(fw) = &frozen_weights {
            if fw.len() != r {
                return Err(Error::dim("frozen weights", r, fw.len()));
            }
        }
        let mut s = Self {
            beta,
            weight_field,
            phi_lambda,
            risk,
            w,
            frozen_weights,
            weights: vec![0.0; m * r],
            g: DesignMatrix::zeros(n, m),
            xb: vec![0.0; n],
            g_alpha: vec![0.0; n],
        };
        s.refresh_all(data);
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.risk.m()
    }

    pub fn r(&self) -> usize {
        self.weight_field.r()
    }

    pub fn frozen_weights(&self) -> Option<&[f64]> {
        self.frozen_weights.as_deref()
    }

    /// Normalized weight components for period `t`.
    pub fn period_weights(&self, t: usize) -> &[f64] {
        let r = self.r();
        &self.weights[t * r..(t + 1) * r]
    }

    pub fn design(&self) -> &DesignMatrix<f64> {
        &self.g
    }

    /// `G*[i][t] = G[i][t] γ(t)`.
    #[inline]
    pub fn g_star(&self, i: usize, t: usize) -> f64 {
        if self.risk.gamma[t] {
            self.g.get(i, t)
        } else {
            0.0
        }
    }

    pub fn xb(&self) -> &[f64] {
        &self.xb
    }

    pub fn g_alpha(&self) -> &[f64] {
        &self.g_alpha
    }

    pub fn linear_predictor(&self) -> Vec<f64> {
        self.xb.iter().zip(&self.g_alpha).map(|(a, b)| a + b).collect()
    }

    pub fn log_likelihood(&self, data: &ExposureDataset) -> f64 {
        bernoulli_logit_loglik(data.outcomes(), &self.linear_predictor())
    }

    pub fn refresh_all(&mut self, data: &ExposureDataset) {
        for t in 0..self.m() {
            self.refresh_period(t, data);
        }
        self.risk.refresh_theta_eta();
        self.refresh_xb(data);
        self.refresh_g_alpha();
    }

    /// Recomputes the weights and design column of one period (not Gα).
    pub fn refresh_period(&mut self, t: usize, data: &ExposureDataset) {
        let r = self.r();
        let q = data.q();
        let out = &mut self.weights[t * r..(t + 1) * r];
        match &self.frozen_weights {
            Some(fw) => out.copy_from_slice(fw),
            None => weights_into(self.weight_field.block(t), q, out),
        }
        let comps = self.weights[t * r..(t + 1) * r].to_vec();
        self.g.refresh_column(t, &comps, data.exposures());
    }

    pub fn refresh_xb(&mut self, data: &ExposureDataset) {
        self.xb = data.covariates().mul_vec(&self.beta);
    }

    pub fn refresh_g_alpha(&mut self) {
        let n = self.g_alpha.len();
        self.g_alpha.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..self.m() {
            let a = self.risk.alpha(t);
            if a != 0.0 {
                let col = self.g.column(t);
                for i in 0..n {
                    self.g_alpha[i] += col[i] * a;
                }
            }
        }
    }

    /// Shifts Gα by `delta` times column `t` of the design.
    pub(crate) fn shift_g_alpha(&mut self, t: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let col = self.g.column(t);
        for (ga, g) in self.g_alpha.iter_mut().zip(col) {
            *ga += g * delta;
        }
    }

    /// Installs a new design column for period `t` and moves Gα to match.
    pub(crate) fn replace_design_column(&mut self, t: usize, col: &[f64]) {
        let alpha = self.risk.alpha(t);
        let old = self.g.column_mut(t);
        if alpha != 0.0 {
            for ((ga, o), c) in self.g_alpha.iter_mut().zip(old.iter()).zip(col) {
                *ga += (c - o) * alpha;
            }
        }
        old.copy_from_slice(col);
    }

    pub(crate) fn weights_mut(&mut self, t: usize) -> &mut [f64] {
        let r = self.r();
        &mut self.weights[t * r..(t + 1) * r]
    }

    /// Recomputes every cache from the free parameters and returns the
    /// largest absolute discrepancy against the cached values.
    pub fn audit(&self, data: &ExposureDataset) -> f64 {
        let mut fresh = self.clone();
        fresh.refresh_all(data);
        let mut worst = fresh.g.max_abs_diff(&self.g);
        for (a, b) in fresh.weights.iter().zip(&self.weights) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in fresh.xb.iter().zip(&self.xb) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in fresh.g_alpha.iter().zip(&self.g_alpha) {
            worst = worst.max((a - b).abs());
        }
        for t in 0..self.m() {
            worst = worst.max((fresh.risk.theta[t] - self.risk.theta[t]).abs());
            worst = worst.max((fresh.risk.eta[t] - self.risk.eta[t]).abs());
        }
        worst
    }

    /// Checks the structural invariants that do not involve caches.
    pub fn check_invariants(&self, selection_linked: bool) -> Result<()> {
        if selection_linked {
            for t in 0..self.m() {
                if (self.risk.gamma_star[t] > 0.0) != self.risk.gamma[t] {
                    return Err(Error::InvalidArgument(format!(
                        "gamma_star sign disagrees with gamma at period {}",
                        t + 1
                    )));
                }
            }
        }
        let all_pos = [self.risk.a11, self.risk.a22, self.risk.phi1, self.risk.phi2, self.phi_lambda]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_pos {
            return Err(Error::InvalidArgument("non-positive scale or decay parameter".into()));
        }
        if self.w.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("non-positive Polya-Gamma latent".into()));
        }
        Ok(())
    }
}
