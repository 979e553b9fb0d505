//! Descriptive statistics, distribution fitting and hypothesis tests.

mod corr;
mod fit;
mod histogram;
pub mod optimize;
mod perm;
mod summary;
mod tally;
mod transform;

pub use corr::{average_ranks, correlation_matrix, CorrMatrix, CorrMethod};
pub use fit::{fit_beta_scaled, fit_family, fit_select_aic, Family, FamilyOutcome, FitOptions, FitResult, Sample, REGISTRY, SUPPORT_MARGIN};
pub use histogram::{histogram, joint_histogram, Binning, Histogram, JointHistogram};
pub use perm::{permutation_test, PermutationResult, Statistic, MIN_RECOMMENDED_PERMUTATIONS};
pub use summary::{boxplot_summary, group_stats, quantile_sorted, BoxSummary, Coefficient, SummaryRow};
pub use tally::{tally_rank_by_triple, RankTally, MAX_RANK, TRIPLES};
pub use transform::{slog, symlog, symlog_inv};

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("degenerate sample: all values equal")]
    Degenerate,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("outside family domain: {0}")]
    Domain(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
}
