//! Dense brute-force references for every Gibbs conditional and Metropolis
//! log-target, evaluated on random tiny models.

use cwvsmix::engine::conditionals::{
    a11_statistics, beta_conditional, delta1_conditional, delta2_conditional, gamma_log_odds, lambda_block_proposal,
    log_target_a21, log_target_ln_a11, log_target_ln_a22, log_target_psi_delta, log_target_psi_lambda,
};
use cwvsmix::linalg::Matrix;
use cwvsmix::mixture::LatentWeightField;
use cwvsmix::tensor::ExposureTensor;
use cwvsmix::{ChainState, ExpCorrMatrix, ExposureDataset, Priors, RiskProcessState, RngStream};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub const TOL: f64 = 1e-8;

struct Case {
    data: ExposureDataset,
    state: ChainState,
    kappa: Vec<f64>,
}

fn random_case(rng: &mut RngStream) -> Case {
    let n = rng.random_range(2..=10);
    let m = rng.random_range(1..=3);
    let q = rng.random_range(1..=2);
    let p = rng.random_range(1..=3);
    let r = q * (q + 1) / 2;
    let x = Matrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.random_range(-2.0..2.0) });
    let z = ExposureTensor::from_fn(n, m, q, |_, _, _| rng.random_range(-2.0..2.0));
    let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
    let data = ExposureDataset::new(
        y.clone(),
        x,
        z,
        (0..q).map(|j| format!("p{j}")).collect(),
        (0..p).map(|j| format!("x{j}")).collect(),
    )
    .unwrap();
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let field = LatentWeightField::new(m, q, (0..m * r).map(|_| u(-1.5, 1.5)).collect()).unwrap();
    let delta1: Vec<f64> = (0..m).map(|_| u(-2.0, 2.0)).collect();
    let delta2: Vec<f64> = (0..m).map(|_| u(-2.0, 2.0)).collect();
    let gamma_star: Vec<f64> = (0..m).map(|_| u(-2.0, 2.0)).collect();
    let risk = RiskProcessState::from_parts(
        delta1,
        delta2,
        gamma_star,
        (u(0.2, 2.0), u(-1.0, 1.0), u(0.2, 2.0)),
        (u(0.1, 3.0), u(0.1, 3.0)),
    );
    let beta: Vec<f64> = (0..p).map(|_| u(-1.0, 1.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| u(0.05, 1.0)).collect();
    let phi_lambda = u(0.1, 3.0);
    let state = ChainState::assemble(&data, beta, field, phi_lambda, risk, w, None).unwrap();
    let kappa = y.iter().map(|&v| v as f64 - 0.5).collect();
    Case { data, state, kappa }
}

fn dense_corr(m: usize, phi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |t, s| (-phi * (t as f64 - s as f64).abs()).exp())
}

fn kron_identity(base: &DMatrix<f64>, reps: usize) -> DMatrix<f64> {
    let m = base.nrows();
    DMatrix::from_fn(m * reps, m * reps, |a, b| {
        if a % reps == b % reps {
            base[(a / reps, b / reps)]
        } else {
            0.0
        }
    })
}

fn ref_weights(lstar: &[f64], q: usize) -> Vec<f64> {
    let main: Vec<f64> = lstar[..q].iter().map(|v| v.max(0.0)).collect();
    let mut comps = main.clone();
    let mut idx = q;
    for j in 0..q {
        for k in j + 1..q {
            let v = if main[j] > 0.0 && main[k] > 0.0 { lstar[idx].max(0.0) } else { 0.0 };
            comps.push(v);
            idx += 1;
        }
    }
    let d: f64 = comps.iter().sum();
    if d > 0.0 {
        comps.iter().map(|c| c / d).collect()
    } else {
        comps
    }
}

fn ref_design(data: &ExposureDataset, field: &[f64], q: usize) -> DMatrix<f64> {
    let (n, m, r) = (data.n(), data.m(), q * (q + 1) / 2);
    let z = data.exposures();
    DMatrix::from_fn(n, m, |i, t| {
        let w = ref_weights(&field[t * r..(t + 1) * r], q);
        let mut g = 0.0;
        let mut idx = q;
        for j in 0..q {
            g += w[j] * z.get(i, t, j);
            for k in j + 1..q {
                g += w[idx] * z.get(i, t, j) * z.get(i, t, k);
                idx += 1;
            }
        }
        g
    })
}

struct Dense {
    x: DMatrix<f64>,
    g: DMatrix<f64>,
    omega: DMatrix<f64>,
    zeta: DVector<f64>,
    beta: DVector<f64>,
    gamma: Vec<bool>,
}

fn dense(case: &Case) -> Dense {
    let s = &case.state;
    let x = case.data.covariates();
    Dense {
        x: DMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)]),
        g: ref_design(&case.data, s.weight_field.as_slice(), case.data.q()),
        omega: DMatrix::from_diagonal(&DVector::from_vec(s.w.clone())),
        zeta: DVector::from_iterator(s.w.len(), case.kappa.iter().zip(&s.w).map(|(k, w)| k / w)),
        beta: DVector::from_vec(s.beta.clone()),
        gamma: s.risk.gamma.clone(),
    }
}

fn alpha_vec(theta: &[f64], gamma: &[bool]) -> DVector<f64> {
    DVector::from_iterator(theta.len(), theta.iter().zip(gamma).map(|(t, &g)| if g { *t } else { 0.0 }))
}

/// −½ (ζ − Xβ − Gα)ᵀ Ω (ζ − Xβ − Gα)
fn pg_loglik(d: &Dense, g: &DMatrix<f64>, alpha: &DVector<f64>) -> f64 {
    let e = &d.zeta - &d.x * &d.beta - g * alpha;
    -0.5 * (e.transpose() * &d.omega * &e)[(0, 0)]
}

fn probit_target(r: &RiskProcessState, a21: f64, a22: f64) -> f64 {
    (0..r.m())
        .map(|t| -0.5 * (r.gamma_star[t] - a21 * r.delta1[t] - a22 * r.delta2[t]).powi(2))
        .sum()
}

fn gp_target(m: usize, phi: f64, v: &DVector<f64>, reps: usize, priors: &Priors) -> f64 {
    let big = kron_identity(&dense_corr(m, phi), reps);
    let logdet = big.determinant().ln();
    let quad = (v.transpose() * big.try_inverse().unwrap() * v)[(0, 0)];
    -0.5 * logdet - 0.5 * quad + priors.alpha_phi * phi.ln() - priors.beta_phi * phi
}

/// Largest scaled discrepancy `|a − b| / (1 + |b|)` over all comparisons.
#[derive(Default)]
pub struct Tally {
    pub comparisons: usize,
    pub worst: f64,
    pub worst_at: String,
}

impl Tally {
    fn check(&mut self, what: &str, got: f64, oracle: f64) {
        let err = (got - oracle).abs() / (1.0 + oracle.abs());
        self.comparisons += 1;
        if !(err <= self.worst) {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
            self.worst_at = what.to_string();
        }
    }

    fn vec(&mut self, what: &str, got: &[f64], oracle: &DVector<f64>) {
        if got.len() != oracle.len() {
            self.check(what, f64::NAN, 0.0);
        }
        for (a, b) in got.iter().zip(oracle.iter()) {
            self.check(what, *a, *b);
        }
    }

    fn mat(&mut self, what: &str, got: &Matrix<f64>, oracle: &DMatrix<f64>) {
        for i in 0..oracle.nrows() {
            for j in 0..oracle.ncols() {
                self.check(what, got[(i, j)], oracle[(i, j)]);
            }
        }
    }
}

/// Runs `cases` random instances through every block; returns one tally per block.
pub fn run(cases: usize, seed: u64) -> Vec<(&'static str, Tally)> {
    let mut rng = RngStream::new(seed, 0);
    let std = Normal::new(0.0, 1.0).unwrap();
    let names = [
        "beta",
        "delta1",
        "delta2",
        "gamma",
        "ln_A11",
        "A21",
        "ln_A22",
        "psi_delta",
        "psi_lambda",
        "lambda_block",
    ];
    let mut tallies: Vec<(&'static str, Tally)> = names.iter().map(|&n| (n, Tally::default())).collect();
    for _ in 0..cases {
        let case = random_case(&mut rng);
        let d = dense(&case);
        let s = &case.state;
        let r = &s.risk;
        let (m, q, rr) = (s.m(), case.data.q(), s.r());
        let alpha = alpha_vec(&r.theta, &d.gamma);

        let sigma2 = rng.random_range(0.5..100.0);
        let p = d.x.ncols();
        let prec = d.x.transpose() * &d.omega * &d.x + DMatrix::identity(p, p) / sigma2;
        let cov = prec.try_inverse().unwrap();
        let mean = &cov * d.x.transpose() * &d.omega * (&d.zeta - &d.g * &alpha);
        let got = beta_conditional(s, &case.data, &case.kappa, sigma2).unwrap();
        tallies[0].1.vec("beta mean", &got.mean, &mean);
        tallies[0].1.mat("beta covariance", &got.covariance(), &cov);

        let gstar = DMatrix::from_fn(d.g.nrows(), m, |i, t| if d.gamma[t] { d.g[(i, t)] } else { 0.0 });
        let prec = r.a11 * r.a11 * gstar.transpose() * &d.omega * &gstar
            + DMatrix::identity(m, m) * (r.a21 * r.a21)
            + dense_corr(m, r.phi1).try_inverse().unwrap();
        let gs = DVector::from_vec(r.gamma_star.clone());
        let d1 = DVector::from_vec(r.delta1.clone());
        let d2 = DVector::from_vec(r.delta2.clone());
        let lin = r.a11 * gstar.transpose() * &d.omega * (&d.zeta - &d.x * &d.beta) + r.a21 * (&gs - r.a22 * &d2);
        let cov = prec.try_inverse().unwrap();
        let got = delta1_conditional(s, &case.kappa, &ExpCorrMatrix::new(m, r.phi1).unwrap()).unwrap();
        tallies[1].1.vec("delta1 mean", &got.mean, &(&cov * lin));
        tallies[1].1.mat("delta1 covariance", &got.covariance(), &cov);

        let prec = DMatrix::identity(m, m) * (r.a22 * r.a22) + dense_corr(m, r.phi2).try_inverse().unwrap();
        let lin = r.a22 * (&gs - r.a21 * &d1);
        let cov = prec.try_inverse().unwrap();
        let got = delta2_conditional(s, &ExpCorrMatrix::new(m, r.phi2).unwrap()).unwrap();
        tallies[2].1.vec("delta2 mean", &got.mean, &(&cov * lin));
        tallies[2].1.mat("delta2 covariance", &got.covariance(), &cov);

        for t in 0..m {
            let mut on = d.gamma.clone();
            on[t] = true;
            let mut off = d.gamma.clone();
            off[t] = false;
            let q1 = pg_loglik(&d, &d.g, &alpha_vec(&r.theta, &on));
            let q0 = pg_loglik(&d, &d.g, &alpha_vec(&r.theta, &off));
            let pi = std.cdf(r.eta[t]);
            let oracle = q1 - q0 + pi.ln() - (1.0 - pi).ln();
            tallies[3].1.check("gamma log odds", gamma_log_odds(s, &case.kappa, t), oracle);
        }

        let s2a = rng.random_range(0.5..3.0);
        let a11_target = |x: f64| {
            let theta: Vec<f64> = r.delta1.iter().map(|v| x.exp() * v).collect();
            pg_loglik(&d, &d.g, &alpha_vec(&theta, &d.gamma)) - x * x / (2.0 * s2a)
        };
        let (x0, x1) = (r.a11.ln(), rng.random_range(-1.5..1.5));
        let stats = a11_statistics(s, &case.kappa);
        tallies[4].1.check(
            "ln A11 log ratio",
            log_target_ln_a11(stats, x1, s2a) - log_target_ln_a11(stats, x0, s2a),
            a11_target(x1) - a11_target(x0),
        );

        let (b0, b1) = (r.a21, rng.random_range(-2.0..2.0));
        let oracle = probit_target(r, b1, r.a22) - b1 * b1 / (2.0 * s2a) - probit_target(r, b0, r.a22)
            + b0 * b0 / (2.0 * s2a);
        tallies[5].1.check(
            "A21 log ratio",
            log_target_a21(s, b1, s2a) - log_target_a21(s, b0, s2a),
            oracle,
        );

        let (x0, x1) = (r.a22.ln(), rng.random_range(-1.5..1.5f64));
        let oracle = probit_target(r, r.a21, x1.exp()) - x1 * x1 / (2.0 * s2a) - probit_target(r, r.a21, x0.exp())
            + x0 * x0 / (2.0 * s2a);
        tallies[6].1.check(
            "ln A22 log ratio",
            log_target_ln_a22(s, x1, s2a) - log_target_ln_a22(s, x0, s2a),
            oracle,
        );

        let priors = Priors {
            alpha_phi: rng.random_range(0.5..3.0),
            beta_phi: rng.random_range(0.5..3.0),
            ..Priors::default()
        };
        let (p0, p1) = (r.phi1, rng.random_range(0.1..4.0));
        let got = log_target_psi_delta(&ExpCorrMatrix::new(m, p1).unwrap(), &r.delta1, &priors).unwrap()
            - log_target_psi_delta(&ExpCorrMatrix::new(m, p0).unwrap(), &r.delta1, &priors).unwrap();
        let oracle = gp_target(m, p1, &d1, 1, &priors) - gp_target(m, p0, &d1, 1, &priors);
        tallies[7].1.check("psi delta log ratio", got, oracle);

        let field = DVector::from_vec(s.weight_field.as_slice().to_vec());
        let (l0, l1) = (s.phi_lambda, rng.random_range(0.1..4.0));
        let got = log_target_psi_lambda(&ExpCorrMatrix::new(m, l1).unwrap(), &s.weight_field, &priors).unwrap()
            - log_target_psi_lambda(&ExpCorrMatrix::new(m, l0).unwrap(), &s.weight_field, &priors).unwrap();
        let oracle = gp_target(m, l1, &field, rr, &priors) - gp_target(m, l0, &field, rr, &priors);
        tallies[8].1.check("psi lambda log ratio", got, oracle);

        let big_inv = kron_identity(&dense_corr(m, s.phi_lambda), rr).try_inverse().unwrap();
        let lambda_target = |f: &[f64]| {
            let v = DVector::from_vec(f.to_vec());
            pg_loglik(&d, &ref_design(&case.data, f, q), &alpha) - 0.5 * (v.transpose() * &big_inv * &v)[(0, 0)]
        };
        let t = rng.random_range(0..m);
        let block: Vec<f64> = (0..rr).map(|_| rng.random_range(-1.5..1.5)).collect();
        let mut proposed = s.weight_field.as_slice().to_vec();
        proposed[t * rr..(t + 1) * rr].copy_from_slice(&block);
        let corr = ExpCorrMatrix::new(m, s.phi_lambda).unwrap();
        let prop = lambda_block_proposal(s, &case.data, &case.kappa, &corr, t, block);
        let oracle = lambda_target(&proposed) - lambda_target(s.weight_field.as_slice());
        tallies[9].1.check("lambda block log ratio", prop.log_ratio, oracle);
        let weights = ref_weights(&proposed[t * rr..(t + 1) * rr], q);
        for (a, b) in prop.components.iter().zip(&weights) {
            tallies[9].1.check("lambda block weights", *a, *b);
        }
    }
    tallies
}
