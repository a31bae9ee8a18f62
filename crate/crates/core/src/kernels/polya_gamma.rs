//! Exact PG(1, c) sampling by Devroye's alternating-series method.
//!
//! A draw is `J*(1, |c|/2) / 4`; `J*` is proposed from a mixture of a
//! truncated exponential (right of `TRUNC`) and a truncated inverse Gaussian
//! (left of `TRUNC`), and accepted by squeezing the partial sums of its
//! alternating density series.

use super::normal::ln_norm_cdf;
use super::std_normal;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::f64::consts::PI;

const TRUNC: f64 = 0.64;
const TRUNC_RECIP: f64 = 1.0 / TRUNC;

/// One draw from PG(b, c). Only `b = 1` is supported.
pub fn draw_polya_gamma<R: Rng + ?Sized>(b: u32, c: f64, rng: &mut R) -> Result<f64> {
    if b != 1 {
        return Err(Error::InvalidArgument(format!("PG(b, c) requires b = 1, got {b}")));
    }
    if !c.is_finite() {
        return Err(Error::InvalidTilt(c));
    }
    Ok(draw_pg1(c, rng))
}

/// Mean of PG(1, c).
pub fn polya_gamma_mean(c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-6 {
        0.25 - c * c / 48.0
    } else {
        (c / 2.0).tanh() / (2.0 * c)
    }
}

/// Variance of PG(1, c).
pub fn polya_gamma_variance(c: f64) -> f64 {
    let c = c.abs();
    if c < 1e-3 {
        1.0 / 24.0 - c * c / 120.0
    } else {
        (c.sinh() - c) / (4.0 * c.powi(3) * (c / 2.0).cosh().powi(2))
    }
}

pub(crate) fn draw_pg1<R: Rng + ?Sized>(c: f64, rng: &mut R) -> f64 {
    let z = 0.5 * c.abs();
    let fz = 0.125 * PI * PI + 0.5 * z * z;
    let p_exp = mass_texpon(z, fz);
    loop {
        let x = if rng.random::<f64>() < p_exp {
            let e: f64 = Exp1.sample(rng);
            TRUNC + e / fz
        } else {
            truncated_inverse_gaussian(z, rng)
        };
        let mut s = series_coef(0, x);
        let y = rng.random::<f64>() * s;
        let mut n = 0;
        loop {
            n += 1;
            if n % 2 == 1 {
                s -= series_coef(n, x);
                if y <= s {
                    return 0.25 * x;
                }
            } else {
                s += series_coef(n, x);
                if y > s {
                    break;
                }
            }
        }
    }
}

/// Probability that the proposal comes from the exponential piece.
fn mass_texpon(z: f64, fz: f64) -> f64 {
    let t = TRUNC;
    let b = (1.0 / t).sqrt() * (t * z - 1.0);
    let a = -(1.0 / t).sqrt() * (t * z + 1.0);
    let x0 = fz.ln() + fz * t;
    let xb = x0 - z + ln_norm_cdf(b);
    let xa = x0 + z + ln_norm_cdf(a);
    let q_over_p = 4.0 / PI * (xb.exp() + xa.exp());
    1.0 / (1.0 + q_over_p)
}

/// n-th coefficient of the alternating series for the J*(1) density.
fn series_coef(n: u32, x: f64) -> f64 {
    let k = (n as f64 + 0.5) * PI;
    if x > TRUNC {
        k * (-0.5 * k * k * x).exp()
    } else if x > 0.0 {
        let h = n as f64 + 0.5;
        (-1.5 * ((0.5 * PI).ln() + x.ln()) + k.ln() - 2.0 * h * h / x).exp()
    } else {
        0.0
    }
}

/// Inverse Gaussian IG(1/z, 1) restricted to (0, TRUNC).
fn truncated_inverse_gaussian<R: Rng + ?Sized>(z: f64, rng: &mut R) -> f64 {
    let t = TRUNC;
    if z < TRUNC_RECIP {
        // mean above the truncation point: propose from the z = 0 case and tilt
        loop {
            let x = loop {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                if e1 * e1 <= 2.0 * e2 / t {
                    let d = 1.0 + e1 * t;
                    break t / (d * d);
                }
            };
            let alpha = (-0.5 * z * z * x).exp();
            if rng.random::<f64>() <= alpha {
                return x;
            }
        }
    } else {
        let mu = 1.0 / z;
        loop {
            let y = std_normal(rng);
            let mu_y = mu * y * y;
            let half_mu = 0.5 * mu;
            let mut x = mu + half_mu * mu_y - half_mu * (4.0 * mu_y + mu_y * mu_y).sqrt();
            if rng.random::<f64>() > mu / (mu + x) {
                x = mu * mu / x;
            }
            if x < t {
                return x;
            }
        }
    }
}
