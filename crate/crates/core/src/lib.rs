//! Bayesian critical-window variable selection for exposure mixtures.
//!
//! A logistic model links a binary outcome to time-varying mixture exposures
//! through period-specific weights and a spike-and-slab risk process. The
//! posterior is explored with a Pólya-Gamma augmented Gibbs sampler with
//! Metropolis steps for the weights and covariance parameters.
//!
//! Deterministic numerical kernels are generic over [`Scalar`]; the sampler
//! works in `f64`, and the aliases below fix the generic types at `f64`.

pub mod covariance;
pub mod engine;
pub mod error;
pub mod inference;
pub mod kernels;
pub mod linalg;
pub mod mixture;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod stats;
pub mod tensor;

pub use engine::{run_chain, run_ew_baseline, ChainSamples, Sampler, SweepConfig, WeightMode};
pub use error::{Error, Result};
pub use model::{ChainState, ExposureDataset, Priors, RiskProcessState};
pub use rng::RngStream;
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Matrix = linalg::Matrix<f64>;
pub type Cholesky = linalg::Cholesky<f64>;
pub type ExpCorrMatrix = covariance::ExpCorrMatrix<f64>;
pub type ExposureTensor = tensor::ExposureTensor<f64>;
pub type WeightVector = mixture::WeightVector<f64>;
pub type LatentWeightField = mixture::LatentWeightField<f64>;
pub type DesignMatrix = mixture::DesignMatrix<f64>;
pub type Scaling = model::Scaling<f64>;
