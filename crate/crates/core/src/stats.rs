//! Summary statistics shared by scaling, inference and scoring.

use crate::scalar::Scalar;

/// Linear interpolation between order statistics (Hyndman–Fan type 7).
///
/// `sorted` must be ascending and non-empty; `p` in `[0, 1]`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn quantile<T: Scalar>(values: &[T], p: f64) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("quantile of NaN"));
    quantile_sorted(&v, p)
}

pub fn mean<T: Scalar>(values: &[T]) -> T {
    let n = T::from_usize(values.len()).unwrap();
    values.iter().fold(T::zero(), |a, &b| a + b) / n
}

/// Sample variance with the n - 1 denominator.
pub fn variance<T: Scalar>(values: &[T]) -> T {
    let mu = mean(values);
    let n = T::from_usize(values.len() - 1).unwrap();
    values.iter().fold(T::zero(), |a, &b| a + (b - mu) * (b - mu)) / n
}

/// Mean and standard error of the mean; the error is `None` for fewer than two values.
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let mu = mean(values);
    if values.len() < 2 {
        return (mu, None);
    }
    (mu, Some((variance(values) / values.len() as f64).sqrt()))
}
