use super::normal::{norm_cdf, norm_quantile};
use super::std_normal;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Which side of zero a truncated normal draw must land on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `(-inf, 0]`
    AtMostZero,
    /// `(0, inf)`
    AboveZero,
}

/// Standardized bound beyond which the exponential-proposal sampler is used.
const TAIL_BOUND: f64 = 4.0;

/// Draw from N(mean, sd^2) restricted to one side of zero.
pub fn draw_truncated_normal<R: Rng + ?Sized>(mean: f64, sd: f64, side: Side, rng: &mut R) -> Result<f64> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::InvalidArgument(format!("truncated normal sd {sd} must be > 0")));
    }
    if !mean.is_finite() {
        return Err(Error::InvalidArgument(format!("truncated normal mean {mean} is not finite")));
    }
    loop {
        let x = match side {
            // X > 0  <=>  Z > -mean/sd
            Side::AboveZero => mean + sd * std_normal_above(-mean / sd, rng),
            // X <= 0 <=>  -Z >= mean/sd
            Side::AtMostZero => mean - sd * std_normal_above(mean / sd, rng),
        };
        // rounding in mean + sd*z can land on the wrong side when the bound is tight
        let ok = match side {
            Side::AboveZero => x > 0.0,
            Side::AtMostZero => x <= 0.0,
        };
        if ok {
            return Ok(x);
        }
    }
}

/// Standard normal restricted to `[a, inf)`.
fn std_normal_above<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a > TAIL_BOUND {
        // Robert (1995) translated-exponential proposal
        let rate = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let e: f64 = Exp1.sample(rng);
            let z = a + e / rate;
            let accept = (-0.5 * (z - rate) * (z - rate)).exp();
            if rng.random::<f64>() <= accept {
                return z;
            }
        }
    } else if a < -TAIL_BOUND {
        loop {
            let z = std_normal(rng);
            if z >= a {
                return z;
            }
        }
    } else {
        // inverse CDF on the upper tail mass, P(Z > z) = Phi(-z)
        let upper = norm_cdf(-a);
        loop {
            let v = rng.random::<f64>() * upper;
            if v > 0.0 {
                return (-norm_quantile(v)).max(a);
            }
        }
    }
}
