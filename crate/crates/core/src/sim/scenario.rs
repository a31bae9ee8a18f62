use crate::error::{Error, Result};
use crate::kernels::{draw_dirichlet, std_normal};
use crate::linalg::{Cholesky, Matrix};
use crate::mixture::{component_count, pair_index, weighted_exposure};
use crate::model::ExposureDataset;
use crate::tensor::ExposureTensor;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// How weights evolve across periods.
///
/// `A`: one weight vector for every period. `B`: the important pollutants are
/// fixed but their weights are redrawn per period. `C`: the important set,
/// active interactions and weights are all redrawn per period.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubSetting {
    A,
    B,
    C,
}

impl fmt::Display for SubSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SubSetting::A => "A",
            SubSetting::B => "B",
            SubSetting::C => "C",
        };
        f.write_str(s)
    }
}

/// Where simulated exposure profiles come from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExposureSource {
    /// Per-pollutant AR(1) paths over periods with equicorrelated innovations.
    SyntheticAr1 { lag1_corr: f64, cross_corr: f64 },
    /// Subjects resampled with replacement from raw profiles (n × m × q).
    Resample {
        path: String,
        #[serde(skip)]
        profiles: Option<Arc<ExposureTensor<f64>>>,
    },
}

impl Default for ExposureSource {
    fn default() -> Self {
        ExposureSource::SyntheticAr1 {
            lag1_corr: 0.9,
            cross_corr: 0.6,
        }
    }
}

impl PartialEq for ExposureSource {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                ExposureSource::SyntheticAr1 { lag1_corr: a, cross_corr: b },
                ExposureSource::SyntheticAr1 { lag1_corr: c, cross_corr: d },
            ) => a == c && b == d,
            (ExposureSource::Resample { path: a, profiles: pa }, ExposureSource::Resample { path: b, profiles: pb }) => {
                a == b && pa == pb
            }
            _ => false,
        }
    }
}

fn default_n() -> usize {
    2534
}
fn default_m() -> usize {
    20
}
fn default_q() -> usize {
    5
}
fn default_effect() -> f64 {
    0.23
}
fn default_max_window() -> usize {
    7
}
fn default_interaction_prob() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    /// Number of important pollutants.
    pub setting: usize,
    pub sub_setting: SubSetting,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_effect")]
    pub effect_size: f64,
    /// Window lengths are drawn uniformly from `1..=min(max_window, m)`.
    #[serde(default = "default_max_window")]
    pub max_window: usize,
    #[serde(default = "default_interaction_prob")]
    pub interaction_prob: f64,
    #[serde(default)]
    pub exposure: ExposureSource,
}

impl SimScenario {
    pub fn new(setting: usize, sub_setting: SubSetting) -> Self {
        Self {
            setting,
            sub_setting,
            n: default_n(),
            m: default_m(),
            q: default_q(),
            effect_size: default_effect(),
            max_window: default_max_window(),
            interaction_prob: default_interaction_prob(),
            exposure: ExposureSource::default(),
        }
    }

    pub fn with_size(mut self, n: usize, m: usize, q: usize) -> Self {
        self.n = n;
        self.m = m;
        self.q = q;
        self
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.setting, self.sub_setting)
    }

    pub fn validate(&self) -> Result<()> {
        if self.setting == 1 && self.sub_setting == SubSetting::B {
            return Err(Error::InfeasibleScenario(
                "setting 1B needs at least two important pollutants".into(),
            ));
        }
        if self.setting == 0 || self.setting > self.q {
            return Err(Error::InfeasibleScenario(format!(
                "setting {} needs between 1 and q = {} important pollutants",
                self.setting, self.q
            )));
        }
        if self.n == 0 || self.m == 0 || self.max_window == 0 {
            return Err(Error::InvalidArgument("n, m and max_window must be >= 1".into()));
        }
        if !self.effect_size.is_finite() {
            return Err(Error::InvalidArgument("effect size must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.interaction_prob) {
            return Err(Error::InvalidArgument("interaction probability must lie in [0, 1]".into()));
        }
        match &self.exposure {
            ExposureSource::SyntheticAr1 { lag1_corr, cross_corr } => {
                let lower = -1.0 / (self.q as f64 - 1.0).max(1.0);
                if !(lag1_corr.abs() < 1.0) || !(*cross_corr > lower && *cross_corr < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "AR(1) correlation {lag1_corr} or cross correlation {cross_corr} out of range"
                    )));
                }
            }
            ExposureSource::Resample { path, profiles } => {
                let p = profiles
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument(format!("exposure profiles from {path} not loaded")))?;
                if p.m() != self.m || p.q() != self.q || p.n() == 0 {
                    return Err(Error::Dimension {
                        what: "resampled exposure profiles".into(),
                        expected: self.m * self.q,
                        got: p.m() * p.q(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The data-generating truth of one simulated dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub m: usize,
    pub q: usize,
    /// 1-based first critical period.
    pub window_start: usize,
    pub window_len: usize,
    pub critical: Vec<bool>,
    pub alpha: Vec<f64>,
    /// Weight components per period, indexed `t * r + k`.
    pub weights: Vec<f64>,
}

impl SimTruth {
    pub fn r(&self) -> usize {
        component_count(self.q)
    }

    pub fn weights_at(&self, t: usize) -> &[f64] {
        let r = self.r();
        &self.weights[t * r..(t + 1) * r]
    }

    pub fn critical_periods(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(|&t| self.critical[t])
    }
}

/// Raw synthetic exposures: for each subject and pollutant an AR(1) path over
/// periods with stationary variance 1, innovations equicorrelated across pollutants.
pub fn synthetic_exposures<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    q: usize,
    lag1_corr: f64,
    cross_corr: f64,
    rng: &mut R,
) -> Result<ExposureTensor<f64>> {
    let corr = Matrix::from_fn(q, q, |a, b| if a == b { 1.0 } else { cross_corr });
    let chol = Cholesky::new(&corr)?;
    let l = chol.lower();
    let innov_sd = (1.0 - lag1_corr * lag1_corr).sqrt();
    let mut z = ExposureTensor::zeros(n, m, q);
    let mut e = vec![0.0; q];
    for i in 0..n {
        for t in 0..m {
            let u: Vec<f64> = (0..q).map(|_| std_normal(rng)).collect();
            for (a, ea) in e.iter_mut().enumerate() {
                *ea = (0..=a).map(|b| l[(a, b)] * u[b]).sum();
            }
            for j in 0..q {
                let v = if t == 0 {
                    e[j]
                } else {
                    lag1_corr * z.get(i, t - 1, j) + innov_sd * e[j]
                };
                z.set(i, t, j, v);
            }
        }
    }
    Ok(z)
}

fn resample_profiles<R: Rng + ?Sized>(src: &ExposureTensor<f64>, n: usize, rng: &mut R) -> ExposureTensor<f64> {
    let (m, q) = (src.m(), src.q());
    let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..src.n())).collect();
    ExposureTensor::from_fn(n, m, q, |i, t, j| src.get(rows[i], t, j))
}

/// Important pollutants, active interactions and their Dirichlet weights.
struct Pattern {
    important: Vec<usize>,
    interactions: Vec<(usize, usize)>,
}

impl Pattern {
    fn draw<R: Rng + ?Sized>(q: usize, k: usize, p_inter: f64, rng: &mut R) -> Self {
        let mut important: Vec<usize> = sample(rng, q, k).into_vec();
        important.sort_unstable();
        let mut p = Self {
            important,
            interactions: Vec::new(),
        };
        p.redraw_interactions(p_inter, rng);
        p
    }

    fn redraw_interactions<R: Rng + ?Sized>(&mut self, p_inter: f64, rng: &mut R) {
        self.interactions.clear();
        for (a, &j) in self.important.iter().enumerate() {
            for &k in &self.important[a + 1..] {
                if rng.random::<f64>() < p_inter {
                    self.interactions.push((j, k));
                }
            }
        }
    }

    fn weights<R: Rng + ?Sized>(&self, q: usize, rng: &mut R) -> Result<Vec<f64>> {
        let count = self.important.len() + self.interactions.len();
        let draw = draw_dirichlet(&vec![1.0; count], rng)?;
        let mut w = vec![0.0; component_count(q)];
        for (slot, &j) in self.important.iter().enumerate() {
            w[j] = draw[slot];
        }
        for (slot, &(j, k)) in self.interactions.iter().enumerate() {
            w[pair_index(q, j, k)] = draw[self.important.len() + slot];
        }
        Ok(w)
    }
}

/// Draws one dataset and its truth. Covariates are an intercept with zero
/// coefficient, so only the critical window drives the outcome.
pub fn generate_dataset<R: Rng + ?Sized>(scenario: &SimScenario, rng: &mut R) -> Result<(ExposureDataset, SimTruth)> {
    scenario.validate()?;
    let (n, m, q) = (scenario.n, scenario.m, scenario.q);
    let r = component_count(q);

    let raw = match &scenario.exposure {
        ExposureSource::SyntheticAr1 { lag1_corr, cross_corr } => {
            synthetic_exposures(n, m, q, *lag1_corr, *cross_corr, rng)?
        }
        ExposureSource::Resample { profiles, .. } => resample_profiles(profiles.as_ref().unwrap(), n, rng),
    };

    let p_inter = scenario.interaction_prob;
    let mut pattern = Pattern::draw(q, scenario.setting, p_inter, rng);
    let mut weights = Vec::with_capacity(m * r);
    match scenario.sub_setting {
        SubSetting::A => {
            let w = pattern.weights(q, rng)?;
            for _ in 0..m {
                weights.extend_from_slice(&w);
            }
        }
        SubSetting::B => {
            for _ in 0..m {
                weights.extend(pattern.weights(q, rng)?);
            }
        }
        SubSetting::C => {
            for t in 0..m {
                if t > 0 {
                    pattern = Pattern::draw(q, scenario.setting, p_inter, rng);
                }
                weights.extend(pattern.weights(q, rng)?);
            }
        }
    }

    let window_len = rng.random_range(1..=scenario.max_window.min(m));
    let window_start = rng.random_range(1..=m - window_len + 1);
    let critical: Vec<bool> = (1..=m).map(|t| t >= window_start && t < window_start + window_len).collect();
    let alpha: Vec<f64> = critical
        .iter()
        .map(|&c| if c { scenario.effect_size } else { 0.0 })
        .collect();

    let names: Vec<String> = (1..=q).map(|j| format!("pollutant{j}")).collect();
    let x = Matrix::from_fn(n, 1, |_, _| 1.0);
    let data = ExposureDataset::new(vec![0; n], x, raw, names, vec!["intercept".into()])?.standardized()?;

    let z = data.exposures();
    let y: Vec<u8> = (0..n)
        .map(|i| {
            let ell: f64 = (0..m)
                .filter(|&t| critical[t])
                .map(|t| weighted_exposure(&weights[t * r..(t + 1) * r], q, z.profile(i, t)) * alpha[t])
                .sum();
            let p = 1.0 / (1.0 + (-ell).exp());
            (rng.random::<f64>() < p) as u8
        })
        .collect();
    let data = data.with_outcomes(y)?;
    let truth = SimTruth {
        m,
        q,
        window_start,
        window_len,
        critical,
        alpha,
        weights,
    };
    Ok((data, truth))
}
