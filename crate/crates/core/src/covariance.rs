//! Exponential temporal correlation and the Kronecker-structured prior on
//! the latent weight field.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

/// `Σ(φ)` with entries `exp(-φ|t - t'|)`, plus its cached factor, inverse
/// and log-determinant.
#[derive(Clone, Debug)]
pub struct ExpCorrMatrix<T> {
    phi: T,
    entries: Matrix<T>,
    chol: Cholesky<T>,
    inverse: Matrix<T>,
    log_det: T,
}

impl<T: Scalar> ExpCorrMatrix<T> {
    pub fn new(m: usize, phi: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("number of periods must be >= 1".into()));
        }
        if !(phi > T::zero()) || !phi.is_finite() {
            return Err(Error::InvalidArgument(format!("decay rate phi = {phi} must be positive and finite")));
        }
        // entries depend only on the lag
        let by_lag: Vec<T> = (0..m).map(|d| (-phi * T::from_usize(d).unwrap()).exp()).collect();
        let entries = Matrix::from_fn(m, m, |t, s| by_lag[t.abs_diff(s)]);
        let chol = Cholesky::new(&entries)?;
        let inverse = chol.inverse();
        let log_det = chol.log_det();
        Ok(Self {
            phi,
            entries,
            chol,
            inverse,
            log_det,
        })
    }

    pub fn m(&self) -> usize {
        self.entries.rows()
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn entry(&self, t: usize, s: usize) -> T {
        self.entries[(t, s)]
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn chol(&self) -> &Cholesky<T> {
        &self.chol
    }

    pub fn inverse(&self) -> &Matrix<T> {
        &self.inverse
    }

    pub fn log_det(&self) -> T {
        self.log_det
    }

    /// `vᵀ Σ⁻¹ v` for a length-m vector.
    pub fn quad_form(&self, v: &[T]) -> Result<T> {
        if v.len() != self.m() {
            return Err(Error::dim("vector length", self.m(), v.len()));
        }
        Ok(self.chol.quad_form(v))
    }
}

pub fn build_exp_corr<T: Scalar>(m: usize, phi: T) -> Result<ExpCorrMatrix<T>> {
    ExpCorrMatrix::new(m, phi)
}

/// `(Σ⁻¹ ⊗ I_r) v` for `v` stacked period-major (`v[t * r + k]`), computed one
/// component column at a time so the `m·r` square matrix never exists.
pub fn kron_weight_prior_solve<T: Scalar>(corr: &ExpCorrMatrix<T>, r: usize, v: &[T]) -> Result<Vec<T>> {
    let m = corr.m();
    check_len(m, r, v)?;
    let mut out = vec![T::zero(); v.len()];
    let mut col = vec![T::zero(); m];
    for k in 0..r {
        for t in 0..m {
            col[t] = v[t * r + k];
        }
        let solved = corr.chol().solve(&col);
        for t in 0..m {
            out[t * r + k] = solved[t];
        }
    }
    Ok(out)
}

/// `vᵀ (Σ⁻¹ ⊗ I_r) v`.
pub fn kron_quad_form<T: Scalar>(corr: &ExpCorrMatrix<T>, r: usize, v: &[T]) -> Result<T> {
    let m = corr.m();
    check_len(m, r, v)?;
    let mut col = vec![T::zero(); m];
    let mut total = T::zero();
    for k in 0..r {
        for t in 0..m {
            col[t] = v[t * r + k];
        }
        total = total + corr.chol().quad_form(&col);
    }
    Ok(total)
}

/// `log |Σ ⊗ I_r| = r log |Σ|`.
pub fn kron_log_det<T: Scalar>(corr: &ExpCorrMatrix<T>, r: usize) -> T {
    T::from_usize(r).unwrap() * corr.log_det()
}

fn check_len<T>(m: usize, r: usize, v: &[T]) -> Result<()> {
    if r == 0 || v.len() != m * r {
        return Err(Error::dim("stacked latent vector", m * r, v.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// AR(1) closed form: Σ⁻¹ is tridiagonal with 1/(1-ρ²) scaling.
    fn ar1_inverse(m: usize, phi: f64) -> Matrix<f64> {
        let rho = (-phi).exp();
        let s = 1.0 / (1.0 - rho * rho);
        Matrix::from_fn(m, m, |i, j| {
            if i == j {
                if m == 1 {
                    1.0
                } else if i == 0 || i == m - 1 {
                    s
                } else {
                    s * (1.0 + rho * rho)
                }
            } else if i.abs_diff(j) == 1 {
                -rho * s
            } else {
                0.0
            }
        })
    }

    #[test]
    fn two_periods_half_correlation() {
        let c = ExpCorrMatrix::new(2, 2f64.ln()).unwrap();
        assert!((c.entry(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(c.entry(0, 0), 1.0);
    }

    #[test]
    fn single_period() {
        let c = ExpCorrMatrix::new(1, 3.0).unwrap();
        assert_eq!(c.matrix().as_slice(), &[1.0]);
        assert_eq!(c.log_det(), 0.0);
    }

    #[test]
    fn large_decay_is_identity() {
        let c = ExpCorrMatrix::new(6, 50.0).unwrap();
        for t in 0..5 {
            assert!(c.entry(t, t + 1) < 2e-22);
        }
    }

    #[test]
    fn rejects_bad_phi() {
        assert!(ExpCorrMatrix::new(3, 0.0).is_err());
        assert!(ExpCorrMatrix::new(3, -1.0).is_err());
        assert!(ExpCorrMatrix::new(3, f64::NAN).is_err());
        assert!(ExpCorrMatrix::new(3, f64::INFINITY).is_err());
        assert!(ExpCorrMatrix::new(0, 1.0).is_err());
    }

    #[test]
    fn factor_inverse_and_tridiagonal_structure() {
        for &m in &[1usize, 2, 5, 13, 25] {
            for &phi in &[0.01, 0.1, 0.7, 3.0, 100.0] {
                let c = ExpCorrMatrix::new(m, phi).unwrap();
                let l = c.chol().lower();
                assert!(l.matmul(&l.transpose()).max_abs_diff(c.matrix()) < 1e-10);
                assert!(c.inverse().matmul(c.matrix()).max_abs_diff(&Matrix::identity(m)) < 1e-8);
                let tri = ar1_inverse(m, phi);
                let scale = tri.as_slice().iter().fold(1.0f64, |a, b| a.max(b.abs()));
                assert!(c.inverse().max_abs_diff(&tri) < 1e-8 * scale, "m={m} phi={phi}");
                let rho2 = (-2.0 * phi).exp();
                let logdet = (m as f64 - 1.0) * (1.0 - rho2).ln();
                assert!((c.log_det() - logdet).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn monotone_in_lag_and_phi() {
        let a = ExpCorrMatrix::new(8, 0.3).unwrap();
        let b = ExpCorrMatrix::new(8, 0.6).unwrap();
        for d in 1..8 {
            assert!(a.entry(0, d) < a.entry(0, d - 1));
            assert!(b.entry(0, d) < a.entry(0, d));
        }
    }

    #[test]
    fn kron_identity_factor() {
        let c = ExpCorrMatrix::new(4, 60.0).unwrap();
        let v: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        let out = kron_weight_prior_solve(&c, 3, &v).unwrap();
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        let norm2: f64 = v.iter().map(|x| x * x).sum();
        assert!((kron_quad_form(&c, 3, &v).unwrap() - norm2).abs() < 1e-10);
    }

    #[test]
    fn kron_two_by_two_hand_value() {
        let c = ExpCorrMatrix::new(2, 2f64.ln()).unwrap();
        let q = kron_quad_form(&c, 1, &[1.0, 1.0]).unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-14);
        // r = 2 stacking (a, b, a, b): two independent (a, a) and (b, b) forms
        let (a, b) = (0.7, -1.3);
        let q2 = kron_quad_form(&c, 2, &[a, b, a, b]).unwrap();
        assert!((q2 - (a * a + b * b) * 4.0 / 3.0).abs() < 1e-13);
        assert!((kron_log_det(&c, 2) - 2.0 * 0.75f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn kron_length_mismatch() {
        let c = ExpCorrMatrix::new(3, 1.0).unwrap();
        assert!(kron_weight_prior_solve(&c, 2, &[0.0; 5]).is_err());
        assert!(kron_quad_form(&c, 2, &[0.0; 7]).is_err());
    }
}
