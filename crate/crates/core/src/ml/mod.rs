//! Baselines, boosted trees, cross-validation and scoring.

mod experiment;
mod folds;
mod gbt;
mod linear;
mod logistic;
mod metrics;

pub use experiment::{
    coefficient_features, default_kind, learning_curve, mean_std, mixed_features, run_experiment, CurvePoint, ExperimentSpec,
    FeatureMatrix, FoldMetrics, MeanStd, ModelKind, ModelReport, Summary, TargetKind, REPORT_SCHEMA_VERSION,
};
pub use folds::kfold;
pub use gbt::{gbt_fit, normalize, GbtModel, GbtParams, Loss, Node, Target, Tree};
pub use linear::{f_upper_p, ols_fit, t_two_sided_p, OlsFit};
pub use logistic::{logistic_fit, LogisticModel, GRAD_TOL, MAX_NEWTON, RIDGE};
pub use metrics::{confusion, f1, mcc, nmae, normalize_columns, rmse, Average};

#[derive(Debug, thiserror::Error)]
pub enum MlError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("targets span no range; NMAE is undefined")]
    UndefinedRange,
    #[error("rank-deficient design; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },
}
