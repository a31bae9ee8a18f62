//! Latent-to-simplex weight transform and the weighted mixture exposure.
//!
//! Components of one period are ordered mains first (pollutant order), then
//! interactions in lexicographic `(j, k)`, `j < k`. With `q` pollutants there
//! are `r = q(q+1)/2` components.
//!
//! A period whose main latents are all `<= 0` has an empty numerator set;
//! all its weights are zero and its mixture exposure is zero.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::ExposureTensor;

/// Number of weight components per period.
pub fn component_count(q: usize) -> usize {
    q * (q + 1) / 2
}

/// Interaction pairs `(j, k)`, `j < k`, in component order.
pub fn pairs(q: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..q).flat_map(move |j| (j + 1..q).map(move |k| (j, k)))
}

/// Position of interaction `(j, k)` within a period's component vector.
pub fn pair_index(q: usize, j: usize, k: usize) -> usize {
    debug_assert!(j < k && k < q);
    // pairs before row j: sum_{a<j} (q - 1 - a)
    q + j * (2 * q - j - 1) / 2 + (k - j - 1)
}

/// Infers q from the component count, if it is triangular.
pub fn pollutants_for_components(r: usize) -> Option<usize> {
    (1..=r).find(|&q| component_count(q) == r)
}

/// Sum-to-one weights for one period.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    pub main: Vec<T>,
    pub inter: Vec<T>,
    pub active: Vec<bool>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn q(&self) -> usize {
        self.main.len()
    }

    /// Mains then interactions, as one length-r vector.
    pub fn components(&self) -> Vec<T> {
        self.main.iter().chain(&self.inter).copied().collect()
    }

    pub fn total(&self) -> T {
        self.main.iter().chain(&self.inter).fold(T::zero(), |a, &b| a + b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.active.iter().all(|a| !a)
    }

    pub fn inter_at(&self, j: usize, k: usize) -> T {
        let q = self.q();
        let (a, b) = if j < k { (j, k) } else { (k, j) };
        self.inter[pair_index(q, a, b) - q]
    }
}

pub fn transform_weights<T: Scalar>(lambda_star_t: &[T], q: usize) -> Result<WeightVector<T>> {
    let r = component_count(q);
    if q == 0 || lambda_star_t.len() != r {
        return Err(Error::dim("latent weight block", r, lambda_star_t.len()));
    }
    let mut comps = vec![T::zero(); r];
    numerators_into(lambda_star_t, q, &mut comps);
    let total = comps.iter().fold(T::zero(), |a, &b| a + b);
    let active: Vec<bool> = comps.iter().map(|&c| c > T::zero()).collect();
    if total > T::zero() {
        comps.iter_mut().for_each(|c| *c = *c / total);
    }
    let inter = comps.split_off(q);
    Ok(WeightVector {
        main: comps,
        inter,
        active,
    })
}

/// Writes normalized weight components for one period into `out` (length r).
/// Unchecked fast path for the sampler.
pub fn weights_into<T: Scalar>(lambda_star_t: &[T], q: usize, out: &mut [T]) {
    numerators_into(lambda_star_t, q, out);
    let total = out.iter().fold(T::zero(), |a, &b| a + b);
    if total > T::zero() {
        out.iter_mut().for_each(|c| *c = *c / total);
    }
}

fn numerators_into<T: Scalar>(ls: &[T], q: usize, out: &mut [T]) {
    let zero = T::zero();
    for j in 0..q {
        out[j] = ls[j].max(zero);
    }
    let mut idx = q;
    for j in 0..q {
        for k in j + 1..q {
            out[idx] = if ls[j] > zero && ls[k] > zero {
                ls[idx].max(zero)
            } else {
                zero
            };
            idx += 1;
        }
    }
}

/// Mixture exposure `Σ λ_j z_j + Σ λ̃_jk z_j z_k` for one subject and period.
pub fn mixture_exposure<T: Scalar>(weights: &WeightVector<T>, z_t: &[T]) -> Result<T> {
    let q = weights.q();
    if z_t.len() != q || weights.inter.len() != component_count(q) - q {
        return Err(Error::dim("exposure profile", q, z_t.len()));
    }
    Ok(weighted_exposure(&weights.components(), q, z_t))
}

/// Same as [`mixture_exposure`] on a flat component vector, without checks.
#[inline]
pub fn weighted_exposure<T: Scalar>(components: &[T], q: usize, z: &[T]) -> T {
    let mut g = T::zero();
    for j in 0..q {
        g = g + components[j] * z[j];
    }
    let mut idx = q;
    for j in 0..q {
        for k in j + 1..q {
            let w = components[idx];
            if w != T::zero() {
                g = g + w * z[j] * z[k];
            }
            idx += 1;
        }
    }
    g
}

/// The latent field λ*, one length-r block per period.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentWeightField<T> {
    m: usize,
    q: usize,
    values: Vec<T>,
}

impl<T: Scalar> LatentWeightField<T> {
    pub fn new(m: usize, q: usize, values: Vec<T>) -> Result<Self> {
        let r = component_count(q);
        if values.len() != m * r {
            return Err(Error::dim("latent weight field", m * r, values.len()));
        }
        Ok(Self { m, q, values })
    }

    pub fn zeros(m: usize, q: usize) -> Self {
        Self {
            m,
            q,
            values: vec![T::zero(); m * component_count(q)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r(&self) -> usize {
        component_count(self.q)
    }

    pub fn block(&self, t: usize) -> &[T] {
        let r = self.r();
        &self.values[t * r..(t + 1) * r]
    }

    pub fn block_mut(&mut self, t: usize) -> &mut [T] {
        let r = self.r();
        &mut self.values[t * r..(t + 1) * r]
    }

    /// The stacked vector `(λ*(1)ᵀ, …, λ*(m)ᵀ)ᵀ`.
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self, t: usize) -> WeightVector<T> {
        transform_weights(self.block(t), self.q).expect("block length matches q")
    }
}

/// n × m matrix of weighted exposures, stored column-major so that one
/// period can be refreshed in place.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix<T> {
    n: usize,
    m: usize,
    data: Vec<T>,
}

impl<T: Scalar> DesignMatrix<T> {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![T::zero(); n * m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize) -> T {
        self.data[t * self.n + i]
    }

    #[inline]
    pub fn column(&self, t: usize) -> &[T] {
        &self.data[t * self.n..(t + 1) * self.n]
    }

    #[inline]
    pub fn column_mut(&mut self, t: usize) -> &mut [T] {
        &mut self.data[t * self.n..(t + 1) * self.n]
    }

    /// Recomputes column `t` from one period's weight components.
    pub fn refresh_column(&mut self, t: usize, components: &[T], exposures: &ExposureTensor<T>) {
        let q = exposures.q();
        let col = self.column_mut(t);
        for (i, g) in col.iter_mut().enumerate() {
            *g = weighted_exposure(components, q, exposures.profile(i, t));
        }
    }

    pub fn max_abs_diff(&self, other: &DesignMatrix<T>) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

/// `G[i][t] = g_i(λ*, t)` for every subject and period.
pub fn weighted_design_matrix<T: Scalar>(
    field: &LatentWeightField<T>,
    exposures: &ExposureTensor<T>,
) -> Result<DesignMatrix<T>> {
    if field.m() != exposures.m() {
        return Err(Error::dim("periods", field.m(), exposures.m()));
    }
    if field.q() != exposures.q() {
        return Err(Error::dim("pollutants", field.q(), exposures.q()));
    }
    let mut g = DesignMatrix::zeros(exposures.n(), exposures.m());
    let mut comps = vec![T::zero(); field.r()];
    for t in 0..field.m() {
        weights_into(field.block(t), field.q(), &mut comps);
        g.refresh_column(t, &comps, exposures);
    }
    Ok(g)
}
