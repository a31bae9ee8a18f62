//! Synthetic-data studies: scenario generation, scoring and the replicate harness.

mod scenario;
mod score;
mod study;

pub use scenario::{generate_dataset, synthetic_exposures, ExposureSource, SimScenario, SimTruth, SubSetting};
pub use score::{
    conditional_weight_means, score_amse_exp_alpha, score_amse_lambda, score_cw_accuracy, score_weight_selection,
    ConditionalScore, SelectionAccuracy,
};
pub use study::{run_study, Method, MetricSummary, MethodSummary, ReplicateResult, StudyConfig, StudyResult};
