//! Registry of figure and table ids. Each id produces the plot-ready data
//! behind one figure or table, never an image.

use serde::{Deserialize, Serialize};

use super::tasks::{self, FeatureSet, PermSettings};
use super::{derive_seed, Doc, JobError};
use crate::features::{Column, ColumnSpec, Transform};
use crate::ingest::{sample_indices, CurveRecord};
use crate::ml::{ExperimentSpec, GbtParams, ModelKind};
use crate::stats::{Coefficient, FitOptions};
use crate::tda::{PipelineConfig, Split, DEFAULT_SIMPLEX_BUDGET};

/// `(id, description)` of every reproducible artifact.
pub const IDS: &[(&str, &str)] = &[
    ("fig1", "(sLog a4, sLog a6, rank) scatter"),
    ("table-tally", "curve counts by (a1, a2, a3) and rank"),
    ("fig2a", "probability masses of a4 and a6 on symlog bins"),
    ("fig2b", "joint probability mass of (a4, a6)"),
    ("fig2c", "log10 distance from the origin with its scaled Beta fit"),
    ("fig3", "per-rank joint masses, distance fits and permutation tests"),
    ("fig4", "box statistics of every column by rank"),
    ("rhs-fit", "BSD right-hand side samples, AIC selection and fitted curves"),
    ("corr-matrix", "Pearson and Spearman correlation matrices"),
    ("appendix-a4", "a4 summary per (a1, a2, a3, rank)"),
    ("appendix-a6", "a6 summary per (a1, a2, a3, rank)"),
    ("barcodes-coeffs", "Rips barcodes of the five-coefficient cloud"),
    ("barcodes-rank", "Rips barcodes of (N, T, c, Omega, R, Sha) split by rank 0-2"),
    ("barcodes-parity", "Rips barcodes of (N, r, RHS) split by conductor parity"),
    ("barcodes-mod3", "Rips barcodes of (N, r, RHS) split by conductor mod 3"),
    ("table3", "regression from the coefficients: gbt, dummy, ols"),
    ("ols-sha", "OLS coefficient table for Sha from the coefficients"),
    ("ols-coeffs", "OLS goodness of fit per target from the coefficients"),
    ("table5", "classification of rank and torsion from the coefficients"),
    ("table7", "regression from all other columns"),
    ("ols-mixed", "OLS goodness of fit per target from all other columns"),
    ("table9", "classification of rank and torsion from all other columns"),
    ("learning-curves", "cross-validated score against training size"),
];

/// Knobs shared by the registry entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceOptions {
    pub restarts: usize,
    pub n_perm: usize,
    pub perm_sample: usize,
    pub nbins: usize,
    /// Rows drawn (seeded, without replacement) before any learning job.
    pub ml_rows: Option<usize>,
    pub k: usize,
    pub gbt: GbtParams,
    pub tda_budget: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            restarts: 50,
            n_perm: 199,
            perm_sample: 500,
            nbins: 60,
            ml_rows: None,
            k: 5,
            gbt: GbtParams::default(),
            tda_budget: DEFAULT_SIMPLEX_BUDGET,
        }
    }
}

pub fn is_known(id: &str) -> bool {
    IDS.iter().any(|(k, _)| *k == id)
}

pub fn unknown_id(id: &str) -> JobError {
    let valid: Vec<&str> = IDS.iter().map(|(k, _)| *k).collect();
    JobError::Config(format!("unknown figure/table id {id:?}; valid ids: {}", valid.join(", ")))
}

const REGRESSION_TARGETS: [Column; 6] =
    [Column::Conductor, Column::Tamagawa, Column::Regulator, Column::Sha, Column::Omega, Column::Rhs];
const CLASS_TARGETS: [Column; 2] = [Column::Rank, Column::Torsion];

fn spec(c: Column, t: Transform) -> ColumnSpec {
    ColumnSpec { column: c, transform: t }
}

fn ml_rows(records: &[CurveRecord], opts: &ReproduceOptions, seed: u64) -> Result<Vec<CurveRecord>, JobError> {
    match opts.ml_rows {
        Some(n) if n < records.len() => Ok(sample_indices(records.len(), n, seed)?.into_iter().map(|i| records[i].clone()).collect()),
        _ => Ok(records.to_vec()),
    }
}

fn tda(records: &[CurveRecord], cfg: PipelineConfig) -> Result<Vec<(String, Doc)>, JobError> {
    Ok(vec![(String::new(), tasks::barcodes(records, "records", &cfg)?.0)])
}

/// Produces the documents of one id; the returned suffixes are appended to
/// the id to name the files (the first is always empty).
pub fn reproduce(id: &str, records: &[CurveRecord], seed: u64, opts: &ReproduceOptions) -> Result<Vec<(String, Doc)>, JobError> {
    let fit = FitOptions { restarts: opts.restarts, seed, ..Default::default() };
    let perm = PermSettings { n_perm: opts.n_perm, sample: opts.perm_sample, seed };
    let exp = ExperimentSpec { model: ModelKind::Gbt, params: GbtParams { seed, ..opts.gbt }, k: opts.k, seed };
    let one = |d: Doc| Ok(vec![(String::new(), d)]);
    let triple = vec![spec(Column::Conductor, Transform::Identity), spec(Column::Rank, Transform::Identity), spec(Column::Rhs, Transform::Identity)];
    match id {
        "fig1" => one(tasks::scatter(records)),
        "table-tally" => one(tasks::tally(records)),
        "fig2a" => one(tasks::pmf(records, opts.nbins)?),
        "fig2b" => one(tasks::joint(records, opts.nbins)?),
        "fig2c" => one(tasks::fit_distance(records, &fit, opts.nbins)?),
        "fig3" => one(tasks::rank_panels(records, opts.nbins, &fit, &perm)?),
        "fig4" => one(tasks::boxplots(records)?),
        "rhs-fit" => one(tasks::fit_rhs(records, &fit, opts.nbins)?),
        "corr-matrix" => one(tasks::correlations(records)?),
        "appendix-a4" => one(tasks::group_summary(records, Coefficient::A4)),
        "appendix-a6" => one(tasks::group_summary(records, Coefficient::A6)),
        "barcodes-coeffs" => tda(
            records,
            PipelineConfig {
                columns: vec![
                    spec(Column::A1, Transform::Identity),
                    spec(Column::A2, Transform::Identity),
                    spec(Column::A3, Transform::Identity),
                    spec(Column::A4, Transform::Slog),
                    spec(Column::A6, Transform::Slog),
                ],
                n_sample: 1000.min(records.len()),
                seed,
                max_dim: 1,
                budget: opts.tda_budget,
                ..Default::default()
            },
        ),
        "barcodes-rank" => {
            let low: Vec<CurveRecord> = records.iter().filter(|r| r.rank <= 2).cloned().collect();
            let columns = [Column::Conductor, Column::Torsion, Column::Tamagawa, Column::Omega, Column::Regulator, Column::Sha]
                .into_iter()
                .map(|c| spec(c, Transform::Identity))
                .collect();
            tda(&low, PipelineConfig { columns, n_sample: 100, seed, max_dim: 6, budget: opts.tda_budget, split: Split::Rank, ..Default::default() })
        }
        "barcodes-parity" => {
            tda(records, PipelineConfig { columns: triple, n_sample: 200, seed, max_dim: 1, budget: opts.tda_budget, split: Split::Parity, ..Default::default() })
        }
        "barcodes-mod3" => {
            tda(records, PipelineConfig { columns: triple, n_sample: 200, seed, max_dim: 1, budget: opts.tda_budget, split: Split::Mod3, ..Default::default() })
        }
        "table3" | "table5" | "table7" | "table9" => {
            let rows = ml_rows(records, opts, derive_seed(seed, 0))?;
            let features = if matches!(id, "table3" | "table5") { FeatureSet::Coefficients } else { FeatureSet::Mixed };
            let (targets, models): (&[Column], _) = match id {
                "table3" => (&REGRESSION_TARGETS, [ModelKind::Gbt, ModelKind::Dummy, ModelKind::Linear]),
                "table7" => (&REGRESSION_TARGETS[..5], [ModelKind::Gbt, ModelKind::Dummy, ModelKind::Linear]),
                _ => (&CLASS_TARGETS, [ModelKind::Gbt, ModelKind::Dummy, ModelKind::Logistic]),
            };
            let (table, full) = tasks::results_table(&rows, features, targets, &models, &exp)?;
            Ok(vec![(String::new(), table), ("-reports".into(), full)])
        }
        "ols-sha" => one(tasks::ols_coefficients(&ml_rows(records, opts, derive_seed(seed, 0))?, FeatureSet::Coefficients, Column::Sha)?),
        "ols-coeffs" => one(tasks::ols_summary(&ml_rows(records, opts, derive_seed(seed, 0))?, FeatureSet::Coefficients, &REGRESSION_TARGETS)?),
        "ols-mixed" => one(tasks::ols_summary(&ml_rows(records, opts, derive_seed(seed, 0))?, FeatureSet::Mixed, &REGRESSION_TARGETS[..5])?),
        "learning-curves" => {
            let rows = ml_rows(records, opts, derive_seed(seed, 0))?;
            let targets = [Column::Conductor, Column::Tamagawa, Column::Regulator, Column::Sha, Column::Omega, Column::Rank, Column::Torsion];
            let fractions: Vec<f64> = (1..=8).map(|i| i as f64 / 10.0).collect();
            one(tasks::learning_curves(&rows, &targets, &fractions, &exp)?)
        }
        _ => Err(unknown_id(id)),
    }
}
