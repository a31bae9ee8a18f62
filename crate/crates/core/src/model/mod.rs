//! Data, priors, and the Bernoulli-logit likelihood.

mod state;

pub use state::{ChainState, RiskProcessState};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::stats::quantile_sorted;
use crate::tensor::ExposureTensor;
use serde::{Deserialize, Serialize};

/// Per-(period, pollutant) centering and scale applied to raw exposures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling<T> {
    pub m: usize,
    pub q: usize,
    /// Indexed `t * q + j`.
    pub median: Vec<T>,
    /// Indexed `t * q + j`.
    pub iqr: Vec<T>,
}

/// Standardizes every (period, pollutant) slice to median 0 and IQR 1.
///
/// Quantiles use linear interpolation between order statistics.
pub fn iqr_standardize<T: Scalar>(raw: &ExposureTensor<T>) -> Result<(ExposureTensor<T>, Scaling<T>)> {
    let (n, m, q) = (raw.n(), raw.m(), raw.q());
    if n == 0 {
        return Err(Error::InvalidArgument("cannot standardize an empty exposure tensor".into()));
    }
    let mut median = vec![T::zero(); m * q];
    let mut iqr = vec![T::zero(); m * q];
    for t in 0..m {
        for j in 0..q {
            let mut s = raw.slice(t, j);
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite exposure for pollutant {} at period {}",
                    j + 1,
                    t + 1
                )));
            }
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let spread = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
            if !(spread > T::zero()) {
                return Err(Error::ZeroIqr {
                    pollutant: j + 1,
                    period: t + 1,
                });
            }
            median[t * q + j] = quantile_sorted(&s, 0.5);
            iqr[t * q + j] = spread;
        }
    }
    let scaled = ExposureTensor::from_fn(n, m, q, |i, t, j| {
        (raw.get(i, t, j) - median[t * q + j]) / iqr[t * q + j]
    });
    Ok((scaled, Scaling { m, q, median, iqr }))
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// `Σ_i [y_i ℓ_i − log(1 + e^{ℓ_i})]`.
pub fn bernoulli_logit_loglik<T: Scalar>(y: &[u8], linear_predictor: &[T]) -> T {
    y.iter().zip(linear_predictor).fold(T::zero(), |acc, (&yi, &l)| {
        acc - if yi == 1 { softplus(-l) } else { softplus(l) }
    })
}

/// Outcomes, covariates (with intercept) and exposures for one analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct ExposureDataset {
    y: Vec<u8>,
    x: Matrix<f64>,
    z: ExposureTensor<f64>,
    scaling: Option<Scaling<f64>>,
    pollutant_names: Vec<String>,
    covariate_names: Vec<String>,
}

impl ExposureDataset {
    pub fn new(
        y: Vec<u8>,
        x: Matrix<f64>,
        z: ExposureTensor<f64>,
        pollutant_names: Vec<String>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!("non-binary outcome at row {}", i + 1)));
        }
        if x.rows() != n {
            return Err(Error::dim("covariate rows", n, x.rows()));
        }
        if z.n() != n {
            return Err(Error::dim("exposure subjects", n, z.n()));
        }
        if pollutant_names.len() != z.q() {
            return Err(Error::dim("pollutant names", z.q(), pollutant_names.len()));
        }
        if covariate_names.len() != x.cols() {
            return Err(Error::dim("covariate names", x.cols(), covariate_names.len()));
        }
        if x.as_slice().iter().chain(z.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        Ok(Self {
            y,
            x,
            z,
            scaling: None,
            pollutant_names,
            covariate_names,
        })
    }

    /// Replaces the exposures with their IQR-standardized version.
    pub fn standardized(mut self) -> Result<Self> {
        let (z, scaling) = iqr_standardize(&self.z)?;
        self.z = z;
        self.scaling = Some(scaling);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn m(&self) -> usize {
        self.z.m()
    }

    pub fn q(&self) -> usize {
        self.z.q()
    }

    pub fn outcomes(&self) -> &[u8] {
        &self.y
    }

    pub fn covariates(&self) -> &Matrix<f64> {
        &self.x
    }

    pub fn exposures(&self) -> &ExposureTensor<f64> {
        &self.z
    }

    pub fn scaling(&self) -> Option<&Scaling<f64>> {
        self.scaling.as_ref()
    }

    pub fn pollutant_names(&self) -> &[String] {
        &self.pollutant_names
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    /// Component labels in weight order: `a`, `b`, …, `a:b`, ….
    pub fn component_names(&self) -> Vec<String> {
        let names = &self.pollutant_names;
        let mut out = names.clone();
        for (j, k) in crate::mixture::pairs(names.len()) {
            out.push(format!("{}:{}", names[j], names[k]));
        }
        out
    }

    pub fn with_outcomes(mut self, y: Vec<u8>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::dim("outcomes", self.n(), y.len()));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidArgument(format!("non-binary outcome at row {}", i + 1)));
        }
        self.y = y;
        Ok(self)
    }
}

/// Prior hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    /// Prior variance of each regression coefficient.
    pub sigma2_beta: f64,
    /// Gamma shape for φ_λ, φ₁, φ₂.
    pub alpha_phi: f64,
    /// Gamma rate for φ_λ, φ₁, φ₂.
    pub beta_phi: f64,
    /// Prior variance for A₂₁, ln A₁₁ and ln A₂₂.
    pub sigma2_a: f64,
}

impl Default for Priors {
    /// σ_β = 100 read as a standard deviation, α_φ = β_φ = 1, σ²_A = 1.
    fn default() -> Self {
        Self {
            sigma2_beta: 100.0 * 100.0,
            alpha_phi: 1.0,
            beta_phi: 1.0,
            sigma2_a: 1.0,
        }
    }
}

impl Priors {
    /// Sets the coefficient prior from a standard deviation.
    pub fn with_sigma_beta_sd(mut self, sd: f64) -> Self {
        self.sigma2_beta = sd * sd;
        self
    }

    /// Sets the coefficient prior variance directly.
    pub fn with_sigma2_beta(mut self, var: f64) -> Self {
        self.sigma2_beta = var;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma2_beta", self.sigma2_beta),
            ("alpha_phi", self.alpha_phi),
            ("beta_phi", self.beta_phi),
            ("sigma2_a", self.sigma2_a),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("prior {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}
