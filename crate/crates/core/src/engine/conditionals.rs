//! Full conditionals of the Pólya-Gamma augmented model.
//!
//! With `κ_i = y_i − ½` and `ζ_i = κ_i / w_i`, every likelihood quadratic form
//! `(ζ − ℓ)ᵀ Ω (ζ − ℓ)` is expanded through `Ω ζ = κ`, so no division by `w`
//! happens anywhere. Metropolis targets are returned on the log scale, up to
//! additive constants that cancel in acceptance ratios.

use crate::covariance::{kron_log_det, kron_quad_form, ExpCorrMatrix};
use crate::error::Result;
use crate::kernels::{ln_norm_cdf, std_normal};
use crate::linalg::{Cholesky, Matrix};
use crate::mixture::{weighted_exposure, weights_into, LatentWeightField};
use crate::model::{ChainState, ExposureDataset, Priors};
use rand::Rng;

/// `N(P⁻¹ b, P⁻¹)` held in precision form.
#[derive(Clone, Debug)]
pub struct GaussianConditional {
    pub mean: Vec<f64>,
    pub precision: Matrix<f64>,
    chol: Cholesky<f64>,
}

impl GaussianConditional {
    pub fn from_precision(precision: Matrix<f64>, linear: &[f64]) -> Result<Self> {
        let chol = Cholesky::new(&precision)?;
        let mean = chol.solve(linear);
        Ok(Self {
            mean,
            precision,
            chol,
        })
    }

    pub fn covariance(&self) -> Matrix<f64> {
        self.chol.inverse()
    }

    /// `μ + L⁻ᵀ z`, which has covariance `(L Lᵀ)⁻¹`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.mean.len()).map(|_| std_normal(rng)).collect();
        let dev = self.chol.solve_upper(&z);
        self.mean.iter().zip(dev).map(|(m, d)| m + d).collect()
    }
}

/// β | rest: precision `XᵀΩX + I/σ²_β`, linear term `XᵀΩ(ζ − Gα)`.
pub fn beta_conditional(
    state: &ChainState,
    data: &ExposureDataset,
    kappa: &[f64],
    sigma2_beta: f64,
) -> Result<GaussianConditional> {
    let x = data.covariates();
    let (n, p) = (x.rows(), x.cols());
    let mut prec = Matrix::zeros(p, p);
    let mut lin = vec![0.0; p];
    let ga = state.g_alpha();
    for i in 0..n {
        let row = x.row(i);
        let wi = state.w[i];
        let resid = kappa[i] - wi * ga[i];
        for a in 0..p {
            lin[a] += row[a] * resid;
            let wa = wi * row[a];
            for b in 0..=a {
                prec[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            prec[(b, a)] = prec[(a, b)];
        }
        prec[(a, a)] += 1.0 / sigma2_beta;
    }
    GaussianConditional::from_precision(prec, &lin)
}

/// δ₁ | rest: precision `A₁₁² G*ᵀΩG* + A₂₁² I + Σ(φ₁)⁻¹`, linear term
/// `A₁₁ G*ᵀΩ(ζ − Xβ) + A₂₁(γ* − A₂₂ δ₂)`.
pub fn delta1_conditional(state: &ChainState, kappa: &[f64], corr1: &ExpCorrMatrix<f64>) -> Result<GaussianConditional> {
    let risk = &state.risk;
    let m = risk.m();
    let g = state.design();
    let xb = state.xb();
    let n = g.n();
    let mut prec = corr1.inverse().clone();
    let mut lin = vec![0.0; m];
    let a11_sq = risk.a11 * risk.a11;
    let active: Vec<usize> = (0..m).filter(|&t| risk.gamma[t]).collect();
    for (ai, &t) in active.iter().enumerate() {
        let gt = g.column(t);
        let mut s = 0.0;
        for i in 0..n {
            s += gt[i] * (kappa[i] - state.w[i] * xb[i]);
        }
        lin[t] += risk.a11 * s;
        for &u in &active[..=ai] {
            let gu = g.column(u);
            let mut c = 0.0;
            for i in 0..n {
                c += state.w[i] * gt[i] * gu[i];
            }
            prec[(t, u)] += a11_sq * c;
            if u != t {
                prec[(u, t)] += a11_sq * c;
            }
        }
    }
    for t in 0..m {
        prec[(t, t)] += risk.a21 * risk.a21;
        lin[t] += risk.a21 * (risk.gamma_star[t] - risk.a22 * risk.delta2[t]);
    }
    GaussianConditional::from_precision(prec, &lin)
}

/// δ₂ | rest: precision `A₂₂² I + Σ(φ₂)⁻¹`, linear term `A₂₂(γ* − A₂₁ δ₁)`.
pub fn delta2_conditional(state: &ChainState, corr2: &ExpCorrMatrix<f64>) -> Result<GaussianConditional> {
    let risk = &state.risk;
    let m = risk.m();
    let mut prec = corr2.inverse().clone();
    let mut lin = vec![0.0; m];
    for t in 0..m {
        prec[(t, t)] += risk.a22 * risk.a22;
        lin[t] = risk.a22 * (risk.gamma_star[t] - risk.a21 * risk.delta1[t]);
    }
    GaussianConditional::from_precision(prec, &lin)
}

/// Log odds of γ(t) = 1 given everything except γ*(t):
/// `−½(Q₁ − Q₀) + ln π(t) − ln(1 − π(t))` with `π(t) = Φ(η(t))`.
pub fn gamma_log_odds(state: &ChainState, kappa: &[f64], t: usize) -> f64 {
    let risk = &state.risk;
    let theta = risk.theta[t];
    let alpha_now = risk.alpha(t);
    let col = state.design().column(t);
    let (xb, ga) = (state.xb(), state.g_alpha());
    let mut s_e = 0.0;
    let mut s_g = 0.0;
    for i in 0..col.len() {
        let wi = state.w[i];
        let pred_without_t = xb[i] + ga[i] - col[i] * alpha_now;
        s_e += col[i] * (kappa[i] - wi * pred_without_t);
        s_g += wi * col[i] * col[i];
    }
    let eta = risk.eta[t];
    theta * s_e - 0.5 * theta * theta * s_g + ln_norm_cdf(eta) - ln_norm_cdf(-eta)
}

/// Sufficient statistics of the ln A₁₁ target:
/// `(Σ (κ_i − w_i x_iᵀβ) u_i, Σ w_i u_i²)` with `u = G* δ₁`.
pub fn a11_statistics(state: &ChainState, kappa: &[f64]) -> (f64, f64) {
    let risk = &state.risk;
    let g = state.design();
    let n = g.n();
    let mut u = vec![0.0; n];
    for t in 0..risk.m() {
        if risk.gamma[t] && risk.delta1[t] != 0.0 {
            let d = risk.delta1[t];
            for (ui, gi) in u.iter_mut().zip(g.column(t)) {
                *ui += gi * d;
            }
        }
    }
    let xb = state.xb();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for i in 0..n {
        s1 += (kappa[i] - state.w[i] * xb[i]) * u[i];
        s2 += state.w[i] * u[i] * u[i];
    }
    (s1, s2)
}

/// Log target of `x = ln A₁₁`.
pub fn log_target_ln_a11(stats: (f64, f64), x: f64, sigma2_a: f64) -> f64 {
    let a = x.exp();
    a * stats.0 - 0.5 * a * a * stats.1 - x * x / (2.0 * sigma2_a)
}

fn probit_residual_sq(state: &ChainState, a21: f64, a22: f64) -> f64 {
    let r = &state.risk;
    (0..r.m())
        .map(|t| {
            let e = r.gamma_star[t] - a21 * r.delta1[t] - a22 * r.delta2[t];
            e * e
        })
        .sum()
}

/// Log target of A₂₁.
pub fn log_target_a21(state: &ChainState, a21: f64, sigma2_a: f64) -> f64 {
    -0.5 * probit_residual_sq(state, a21, state.risk.a22) - a21 * a21 / (2.0 * sigma2_a)
}

/// Log target of `x = ln A₂₂`.
pub fn log_target_ln_a22(state: &ChainState, x: f64, sigma2_a: f64) -> f64 {
    -0.5 * probit_residual_sq(state, state.risk.a21, x.exp()) - x * x / (2.0 * sigma2_a)
}

/// Log target of `ψ = ln φ` for one of the δ processes, given `Σ(e^ψ)`.
pub fn log_target_psi_delta(corr: &ExpCorrMatrix<f64>, delta: &[f64], priors: &Priors) -> Result<f64> {
    let psi = corr.phi().ln();
    Ok(-0.5 * corr.log_det() - 0.5 * corr.quad_form(delta)? + priors.alpha_phi * psi
        - priors.beta_phi * corr.phi())
}

/// Log target of `ψ_λ = ln φ_λ`, given `Σ(e^ψ)`.
pub fn log_target_psi_lambda(corr: &ExpCorrMatrix<f64>, field: &LatentWeightField<f64>, priors: &Priors) -> Result<f64> {
    let psi = corr.phi().ln();
    let r = field.r();
    Ok(-0.5 * kron_log_det(corr, r) - 0.5 * kron_quad_form(corr, r, field.as_slice())?
        + priors.alpha_phi * psi
        - priors.beta_phi * corr.phi())
}

/// A proposed latent block for one period, with the log acceptance ratio.
#[derive(Clone, Debug)]
pub struct LambdaBlockProposal {
    pub period: usize,
    pub block: Vec<f64>,
    pub components: Vec<f64>,
    /// New design column; only computed when the period enters the likelihood.
    pub column: Option<Vec<f64>>,
    pub log_ratio: f64,
}

/// Log target ratio for replacing `λ*(t)` by `block`.
///
/// Likelihood part: `Σ_i [d_i (κ_i − w_i ℓ_i) − ½ w_i d_i²]` with
/// `d_i = (g'_it − g_it) α(t)`; prior part from the cached `Σ(φ_λ)⁻¹`.
pub fn lambda_block_proposal(
    state: &ChainState,
    data: &ExposureDataset,
    kappa: &[f64],
    corr_lambda: &ExpCorrMatrix<f64>,
    t: usize,
    block: Vec<f64>,
) -> LambdaBlockProposal {
    let field = &state.weight_field;
    let (m, q, r) = (field.m(), field.q(), field.r());
    let mut components = vec![0.0; r];
    weights_into(&block, q, &mut components);

    let prec = corr_lambda.inverse();
    let current = field.block(t);
    let mut prior_diff = 0.0;
    for k in 0..r {
        let (new, old) = (block[k], current[k]);
        let mut cross = 0.0;
        for s in 0..m {
            if s != t {
                cross += prec[(t, s)] * field.block(s)[k];
            }
        }
        prior_diff += prec[(t, t)] * (new * new - old * old) + 2.0 * cross * (new - old);
    }
    let mut log_ratio = -0.5 * prior_diff;

    let alpha = state.risk.alpha(t);
    let mut column = None;
    if alpha != 0.0 {
        let z = data.exposures();
        let old_col = state.design().column(t);
        let (xb, ga) = (state.xb(), state.g_alpha());
        let mut col = Vec::with_capacity(old_col.len());
        let mut lik = 0.0;
        for i in 0..old_col.len() {
            let g_new = weighted_exposure(&components, q, z.profile(i, t));
            let d = (g_new - old_col[i]) * alpha;
            let wi = state.w[i];
            lik += d * (kappa[i] - wi * (xb[i] + ga[i])) - 0.5 * wi * d * d;
            col.push(g_new);
        }
        log_ratio += lik;
        column = Some(col);
    }
    LambdaBlockProposal {
        period: t,
        block,
        components,
        column,
        log_ratio,
    }
}
