use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// n × m × q exposure array, stored subject-major then period then pollutant.
#[derive(Clone, Debug, PartialEq)]
pub struct ExposureTensor<T> {
    n: usize,
    m: usize,
    q: usize,
    data: Vec<T>,
}

impl<T: Scalar> ExposureTensor<T> {
    pub fn new(n: usize, m: usize, q: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * m * q {
            return Err(Error::dim("exposure tensor buffer", n * m * q, data.len()));
        }
        if m == 0 || q == 0 {
            return Err(Error::InvalidArgument("exposure tensor needs m >= 1 and q >= 1".into()));
        }
        Ok(Self { n, m, q, data })
    }

    pub fn zeros(n: usize, m: usize, q: usize) -> Self {
        Self {
            n,
            m,
            q,
            data: vec![T::zero(); n * m * q],
        }
    }

    pub fn from_fn(n: usize, m: usize, q: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * m * q);
        for i in 0..n {
            for t in 0..m {
                for j in 0..q {
                    data.push(f(i, t, j));
                }
            }
        }
        Self { n, m, q, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize, j: usize) -> T {
        self.data[(i * self.m + t) * self.q + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, t: usize, j: usize, v: T) {
        self.data[(i * self.m + t) * self.q + j] = v;
    }

    /// All q pollutant values for subject `i` at period `t`.
    #[inline]
    pub fn profile(&self, i: usize, t: usize) -> &[T] {
        let start = (i * self.m + t) * self.q;
        &self.data[start..start + self.q]
    }

    /// Values of one (period, pollutant) slice across subjects.
    pub fn slice(&self, t: usize, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, t, j)).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}
