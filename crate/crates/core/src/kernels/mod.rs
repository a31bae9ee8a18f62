//! Random variate generators used by every Gibbs and Metropolis block.

mod normal;
mod polya_gamma;
mod truncated_normal;

pub use normal::{ln_norm_cdf, norm_cdf, norm_quantile};
pub use polya_gamma::{draw_polya_gamma, polya_gamma_mean, polya_gamma_variance};
pub use truncated_normal::{draw_truncated_normal, Side};

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Standard normal draw.
#[inline]
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws `mean + L z` with `z` standard normal, `L` row-major lower triangular.
pub fn draw_mvn<R: Rng + ?Sized>(mean: &[f64], chol_lower: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let k = mean.len();
    if chol_lower.len() != k * k {
        return Err(Error::dim("mvn factor", k * k, chol_lower.len()));
    }
    for i in 0..k {
        let d = chol_lower[i * k + i];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cholesky factor diagonal {i} is {d}; must be positive"
            )));
        }
    }
    let z: Vec<f64> = (0..k).map(|_| std_normal(rng)).collect();
    let mut out = mean.to_vec();
    for i in 0..k {
        let row = &chol_lower[i * k..i * k + i + 1];
        out[i] += row.iter().zip(&z).map(|(l, zi)| l * zi).sum::<f64>();
    }
    Ok(out)
}

/// Dirichlet draw by normalized independent gammas.
pub fn draw_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::InvalidArgument("dirichlet needs at least one component".into()));
    }
    let mut draws = Vec::with_capacity(alpha.len());
    for &a in alpha {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("dirichlet concentration {a} must be > 0")));
        }
        let g = Gamma::new(a, 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        draws.push(g.sample(rng));
    }
    let total: f64 = draws.iter().sum();
    if !(total > 0.0) {
        // every gamma underflowed (tiny concentrations); fall back to a uniform pick
        let idx = rng.random_range(0..alpha.len());
        return Ok((0..alpha.len()).map(|i| if i == idx { 1.0 } else { 0.0 }).collect());
    }
    Ok(draws.into_iter().map(|g| g / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn mvn_univariate_moments() {
        let mut rng = RngStream::new(1, 0);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| draw_mvn(&[0.0], &[1.0], &mut rng).unwrap()[0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn mvn_correlation() {
        let mut rng = RngStream::new(2, 0);
        let l = [1.0, 0.0, 0.5, 0.866_025_4];
        let n = 100_000;
        let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let v = draw_mvn(&[0.0, 0.0], &l, &mut rng).unwrap();
            sx += v[0];
            sy += v[1];
            sxx += v[0] * v[0];
            syy += v[1] * v[1];
            sxy += v[0] * v[1];
        }
        let n = n as f64;
        let cov = sxy / n - sx * sy / n / n;
        let corr = cov / ((sxx / n - (sx / n).powi(2)) * (syy / n - (sy / n).powi(2))).sqrt();
        assert!((corr - 0.5).abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn mvn_rejects_degenerate_factor() {
        let mut rng = RngStream::new(3, 0);
        assert!(draw_mvn(&[0.0, 0.0], &[0.0; 4], &mut rng).is_err());
        assert!(draw_mvn(&[0.0, 0.0], &[1.0; 3], &mut rng).is_err());
    }

    #[test]
    fn dirichlet_single_component() {
        let mut rng = RngStream::new(4, 0);
        assert_eq!(draw_dirichlet(&[1.0], &mut rng).unwrap(), vec![1.0]);
    }

    #[test]
    fn dirichlet_means_and_sum() {
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let d = draw_dirichlet(&[1.0, 1.0, 1.0], &mut rng).unwrap();
            assert!(d.iter().all(|&x| x > 0.0));
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (s, x) in sums.iter_mut().zip(&d) {
                *s += x;
            }
        }
        for s in sums {
            assert!((s / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn dirichlet_rejects_nonpositive() {
        let mut rng = RngStream::new(6, 0);
        assert!(draw_dirichlet(&[1.0, 0.0], &mut rng).is_err());
        assert!(draw_dirichlet(&[1.0, -2.0], &mut rng).is_err());
    }
}
