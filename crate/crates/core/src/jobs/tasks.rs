//! Computations behind the individual jobs. Each returns documents ready to
//! be written; nothing here touches the filesystem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::cell;
use super::{derive_seed, Doc, JobError};
use crate::ec::arith::{factor_u64, primes_up_to};
use crate::ec::{local_factor_bounded, real_period, regulator, WeierstrassCurve, DEFAULT_PRIME_BOUND};
use crate::features::{Column, ColumnSpec, Transform, ALL_COLUMNS};
use crate::ingest::{validate, CurveRecord, DatasetView, Filter, SignFilter};
use crate::ml::{
    coefficient_features, default_kind, learning_curve, mixed_features, run_experiment, ExperimentSpec, FeatureMatrix,
    ModelKind, ModelReport, TargetKind,
};
use crate::stats::{
    boxplot_summary, correlation_matrix, fit_family, fit_select_aic, group_stats, histogram, joint_histogram,
    permutation_test, slog, tally_rank_by_triple, Binning, BoxSummary, Coefficient, CorrMethod, Family, FamilyOutcome,
    FitOptions, FitResult, Histogram, JointHistogram, PermutationResult, Sample, Statistic, REGISTRY,
};
use crate::tda::{barcode_pipeline, BarcodeReport, PipelineConfig};

/// Points on each fitted density curve.
const CURVE_POINTS: usize = 200;

fn column(records: &[CurveRecord], c: Column) -> Vec<f64> {
    records.iter().map(|r| c.value(r)).collect()
}

fn ranks_present(records: &[CurveRecord]) -> Vec<u8> {
    let mut r: Vec<u8> = records.iter().map(|r| r.rank).collect();
    r.sort_unstable();
    r.dedup();
    r
}

fn by_rank(records: &[CurveRecord], rank: u8) -> Vec<CurveRecord> {
    records.iter().filter(|r| r.rank == rank).cloned().collect()
}

// ---- tallies, scatter and histograms ----

pub fn tally(records: &[CurveRecord]) -> Doc {
    let t = tally_rank_by_triple(records);
    let rows = t
        .rows
        .iter()
        .map(|((a1, a2, a3), c)| {
            let mut row = vec![a1.to_string(), a2.to_string(), a3.to_string()];
            row.extend(c.iter().map(|v| v.to_string()));
            row
        })
        .collect();
    Doc::csv(
        "rank-tally",
        &[
            ("a1", "Weierstrass a1"),
            ("a2", "Weierstrass a2"),
            ("a3", "Weierstrass a3"),
            ("r0", "curves of rank 0"),
            ("r1", "curves of rank 1"),
            ("r2", "curves of rank 2"),
            ("r3", "curves of rank 3"),
            ("r4", "curves of rank 4"),
        ],
        rows,
    )
    .with_note(format!("total={} skipped={}", t.total(), t.skipped))
}

pub fn scatter(records: &[CurveRecord]) -> Doc {
    let rows = records
        .iter()
        .map(|r| vec![r.label.clone(), cell(slog(Column::A4.value(r))), cell(slog(Column::A6.value(r))), r.rank.to_string()])
        .collect();
    Doc::csv(
        "slog-scatter",
        &[("label", "curve label"), ("slog_a4", "sgn(a4) ln|a4|"), ("slog_a6", "sgn(a6) ln|a6|"), ("rank", "rank")],
        rows,
    )
}

fn histogram_rows(name: &str, h: &Histogram) -> Vec<Vec<String>> {
    h.masses
        .iter()
        .enumerate()
        .map(|(i, m)| vec![name.to_string(), cell(h.edges[i]), cell(h.edges[i + 1]), cell(*m)])
        .collect()
}

/// Probability masses of a4 and a6 on symlog bins.
pub fn pmf(records: &[CurveRecord], nbins: usize) -> Result<Doc, JobError> {
    let mut rows = Vec::new();
    for c in [Column::A4, Column::A6] {
        rows.extend(histogram_rows(c.name(), &histogram(&column(records, c), Binning::Symlog, nbins)?));
    }
    Ok(Doc::csv(
        "coefficient-pmf",
        &[
            ("coefficient", "a4 or a6"),
            ("bin_lo", "lower bin edge (bins uniform in symlog)"),
            ("bin_hi", "upper bin edge"),
            ("mass", "fraction of curves in the bin"),
        ],
        rows,
    ))
}

fn joint_rows(group: &str, h: &JointHistogram) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (i, row) in h.masses.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            rows.push(vec![
                group.to_string(),
                cell(h.x_edges[i]),
                cell(h.x_edges[i + 1]),
                cell(h.y_edges[j]),
                cell(h.y_edges[j + 1]),
                cell(*m),
            ]);
        }
    }
    rows
}

const JOINT_COLUMNS: [(&str, &str); 6] = [
    ("group", "all curves or one rank"),
    ("a4_lo", "lower a4 edge (symlog bins)"),
    ("a4_hi", "upper a4 edge"),
    ("a6_lo", "lower a6 edge (symlog bins)"),
    ("a6_hi", "upper a6 edge"),
    ("mass", "fraction of the group's curves in the cell"),
];

pub fn joint(records: &[CurveRecord], nbins: usize) -> Result<Doc, JobError> {
    let h = joint_histogram(&column(records, Column::A4), &column(records, Column::A6), Binning::Symlog, nbins)?;
    Ok(Doc::csv("coefficient-joint-pmf", &JOINT_COLUMNS, joint_rows("all", &h)))
}

// ---- distribution fits ----

/// `log10 sqrt(a4^2 + a6^2)` over curves with `a4 > 0` and `a6 > 0`.
pub fn log_distance(records: &[CurveRecord]) -> Vec<f64> {
    let f = Filter { a4_sign: Some(SignFilter::Positive), a6_sign: Some(SignFilter::Positive), ..Default::default() };
    records
        .iter()
        .filter(|r| f.matches(r))
        .map(|r| Column::A4.value(r).hypot(Column::A6.value(r)).log10())
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    crate::stats::quantile_sorted(&s, 0.5)
}

/// Histogram as densities: masses divided by bin widths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

fn density(values: &[f64], nbins: usize) -> Result<DensityHistogram, JobError> {
    let h = histogram(values, Binning::Linear, nbins)?;
    let density = h.masses.iter().enumerate().map(|(i, m)| m / (h.edges[i + 1] - h.edges[i])).collect();
    Ok(DensityHistogram { edges: h.edges, density })
}

/// `[x, pdf(x)]` pairs across the sample range.
fn curve(fit: &FitResult, lo: f64, hi: f64) -> Vec<[f64; 2]> {
    (0..CURVE_POINTS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (CURVE_POINTS - 1) as f64;
            [x, fit.family.pdf(&fit.params, x)]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedSample {
    pub group: String,
    pub n: usize,
    pub median: f64,
    pub histogram: DensityHistogram,
    /// Families ranked by AIC, failures last.
    pub selection: Vec<FamilyOutcome>,
    pub curve: Vec<[f64; 2]>,
}

fn fitted(group: &str, values: &[f64], families: &[Family], opts: &FitOptions, nbins: usize) -> Result<FittedSample, JobError> {
    let sample = Sample::new(values)?;
    let selection = fit_select_aic(values, families, opts)?;
    let best = selection
        .first()
        .and_then(|o| o.fit.as_ref())
        .ok_or_else(|| JobError::Numeric(format!("{group}: no family could be fitted")))?;
    Ok(FittedSample {
        group: group.to_string(),
        n: sample.n,
        median: median(values),
        histogram: density(values, nbins)?,
        curve: curve(best, sample.min, sample.max),
        selection,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitSettings {
    pub families: Vec<String>,
    pub options: FitOptions,
    pub nbins: usize,
}

fn fit_settings(families: &[Family], opts: &FitOptions, nbins: usize) -> FitSettings {
    FitSettings { families: families.iter().map(|f| f.name().to_string()).collect(), options: *opts, nbins }
}

/// Scaled Beta fit of the log distance.
pub fn fit_distance(records: &[CurveRecord], opts: &FitOptions, nbins: usize) -> Result<Doc, JobError> {
    let d = log_distance(records);
    let data = fitted("a4>0, a6>0", &d, &[Family::Beta], opts, nbins)?;
    Doc::json("distance-fit", &fit_settings(&[Family::Beta], opts, nbins), &data)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhsFits {
    pub overall: FittedSample,
    /// Scaled Beta on all curves, whatever the AIC winner.
    pub beta: FitResult,
    pub per_rank: Vec<FittedSample>,
    pub boxplots: Vec<(u8, BoxSummary)>,
}

/// AIC selection of the BSD right-hand side, overall and per rank.
pub fn fit_rhs(records: &[CurveRecord], opts: &FitOptions, nbins: usize) -> Result<Doc, JobError> {
    let rhs = column(records, Column::Rhs);
    let overall = fitted("all", &rhs, &REGISTRY, opts, nbins)?;
    let beta = fit_family(Family::Beta, &Sample::new(&rhs)?, opts)?;
    let mut per_rank = Vec::new();
    let mut boxplots = Vec::new();
    for r in ranks_present(records) {
        let v = column(&by_rank(records, r), Column::Rhs);
        boxplots.push((r, boxplot_summary(&v)?));
        // a lone curve or a constant group has no density to fit
        if Sample::new(&v).is_ok() {
            per_rank.push(fitted(&format!("rank={r}"), &v, &REGISTRY, opts, nbins)?);
        }
    }
    Doc::json("rhs-fit", &fit_settings(&REGISTRY, opts, nbins), &RhsFits { overall, beta, per_rank, boxplots })
}

// ---- rank comparisons ----

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermSettings {
    pub n_perm: usize,
    /// Per-group subsample size (the whole group when smaller).
    pub sample: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankComparison {
    pub ranks: (u8, u8),
    pub result: PermutationResult,
}

fn slog_points(records: &[CurveRecord]) -> Vec<Vec<f64>> {
    records.iter().map(|r| vec![slog(Column::A4.value(r)), slog(Column::A6.value(r))]).collect()
}

fn subsample(records: &[CurveRecord], rank: u8, n: usize, seed: u64) -> Result<Vec<CurveRecord>, JobError> {
    let view = DatasetView::new("records", records, Filter::rank(rank), seed);
    Ok(view.sample(n.min(view.len()), seed)?)
}

/// Energy-distance permutation tests between every pair of ranks on
/// `(sLog a4, sLog a6)`.
pub fn rank_permutations(records: &[CurveRecord], s: &PermSettings) -> Result<Vec<RankComparison>, JobError> {
    let ranks: Vec<u8> = ranks_present(records).into_iter().filter(|&r| records.iter().filter(|x| x.rank == r).count() >= 2).collect();
    let mut pairs = Vec::new();
    for (i, &a) in ranks.iter().enumerate() {
        for &b in &ranks[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            let seed = derive_seed(s.seed, k as u64);
            let xa = slog_points(&subsample(records, a, s.sample, seed)?);
            let xb = slog_points(&subsample(records, b, s.sample, seed ^ 1)?);
            let result = permutation_test(&xa, &xb, Statistic::EnergyDistance, s.n_perm, seed)?;
            Ok(RankComparison { ranks: (a, b), result })
        })
        .collect()
}

pub fn perm(records: &[CurveRecord], s: &PermSettings) -> Result<Doc, JobError> {
    Doc::json("rank-permutation-tests", s, &rank_permutations(records, s)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankPanels {
    pub joint: Vec<(u8, JointHistogram)>,
    pub distance: Vec<FittedSample>,
    pub tests: Vec<RankComparison>,
}

/// Per-rank joint histograms, log-distance fits and pairwise tests.
pub fn rank_panels(records: &[CurveRecord], nbins: usize, opts: &FitOptions, s: &PermSettings) -> Result<Doc, JobError> {
    let mut joint = Vec::new();
    let mut distance = Vec::new();
    let families = [Family::Beta, Family::Gamma];
    for r in ranks_present(records) {
        let recs = by_rank(records, r);
        joint.push((r, joint_histogram(&column(&recs, Column::A4), &column(&recs, Column::A6), Binning::Symlog, nbins)?));
        let d = log_distance(&recs);
        if Sample::new(&d).is_ok() {
            distance.push(fitted(&format!("rank={r}"), &d, &families, opts, nbins)?);
        }
    }
    let tests = rank_permutations(records, s)?;
    #[derive(Serialize)]
    struct Settings<'a> {
        nbins: usize,
        fit: FitSettings,
        permutation: &'a PermSettings,
    }
    let settings = Settings { nbins, fit: fit_settings(&families, opts, nbins), permutation: s };
    Doc::json("rank-panels", &settings, &RankPanels { joint, distance, tests })
}

/// Box statistics of every database column by rank.
pub fn boxplots(records: &[CurveRecord]) -> Result<Doc, JobError> {
    let cols = [
        Column::A1,
        Column::A2,
        Column::A3,
        Column::A4,
        Column::A6,
        Column::Conductor,
        Column::Torsion,
        Column::Tamagawa,
        Column::Omega,
        Column::Regulator,
        Column::Sha,
        Column::Rhs,
    ];
    let mut rows = Vec::new();
    for c in cols {
        for r in ranks_present(records) {
            let v = column(&by_rank(records, r), c);
            let b = boxplot_summary(&v)?;
            rows.push(vec![
                c.name().to_string(),
                r.to_string(),
                v.len().to_string(),
                cell(b.p2_5),
                cell(b.q25),
                cell(b.median),
                cell(b.q75),
                cell(b.p97_5),
            ]);
        }
    }
    Ok(Doc::csv(
        "rank-boxplots",
        &[
            ("column", "database column"),
            ("rank", "rank"),
            ("n", "curves in the group"),
            ("p2_5", "2.5th percentile (lower whisker)"),
            ("q25", "first quartile"),
            ("median", "median"),
            ("q75", "third quartile"),
            ("p97_5", "97.5th percentile (upper whisker)"),
        ],
        rows,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Correlations {
    pub columns: Vec<String>,
    pub pearson: Vec<Vec<f64>>,
    pub spearman: Vec<Vec<f64>>,
    /// Pairs involving a constant column; their entries are NaN (null in JSON).
    pub undefined: Vec<(usize, usize)>,
}

pub fn correlations(records: &[CurveRecord]) -> Result<Doc, JobError> {
    let cols: Vec<Vec<f64>> = ALL_COLUMNS.iter().map(|&c| column(records, c)).collect();
    let p = correlation_matrix(&cols, CorrMethod::Pearson)?;
    let s = correlation_matrix(&cols, CorrMethod::Spearman)?;
    let data = Correlations {
        columns: ALL_COLUMNS.iter().map(|c| c.name().to_string()).collect(),
        pearson: p.values,
        spearman: s.values,
        undefined: p.undefined,
    };
    Doc::json("correlation-matrix", &serde_json::json!({"n": records.len()}), &data)
}

/// Per-(a1, a2, a3, rank) summary of a4 or a6.
pub fn group_summary(records: &[CurveRecord], coefficient: Coefficient) -> Doc {
    let name = match coefficient {
        Coefficient::A4 => "a4",
        Coefficient::A6 => "a6",
    };
    let rows = group_stats(records, coefficient)
        .into_iter()
        .map(|g| {
            vec![
                g.a1.to_string(),
                g.a2.to_string(),
                g.a3.to_string(),
                g.rank.to_string(),
                g.size.to_string(),
                cell(g.mean),
                g.std.map(cell).unwrap_or_else(|| "nan".into()),
                cell(g.median),
                g.zero_count.to_string(),
            ]
        })
        .collect();
    Doc::csv(
        &format!("group-stats-{name}"),
        &[
            ("a1", "Weierstrass a1"),
            ("a2", "Weierstrass a2"),
            ("a3", "Weierstrass a3"),
            ("rank", "rank"),
            ("size", "curves in the group"),
            ("mean", "mean of the coefficient"),
            ("std", "sample standard deviation (nan for one curve)"),
            ("median", "median"),
            ("zero_count", "curves with the coefficient equal to 0"),
        ],
        rows,
    )
}

// ---- validation ----

/// Expected rank of the curve with the given coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankExpectation {
    pub coefficients: String,
    pub rank: u8,
}

impl std::str::FromStr for RankExpectation {
    type Err = JobError;

    /// `"[0,1,1,-10,20]=3"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (c, r) = s.rsplit_once('=').ok_or_else(|| JobError::Config(format!("expected [a1,a2,a3,a4,a6]=rank, got {s:?}")))?;
        let curve: WeierstrassCurve = c.trim().parse().map_err(|e| JobError::Config(format!("{s:?}: {e}")))?;
        let rank = r.trim().parse().map_err(|_| JobError::Config(format!("{s:?}: bad rank")))?;
        Ok(RankExpectation { coefficients: curve.to_string(), rank })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidateSettings {
    /// Recompute the real period, regulator and local factors.
    #[serde(default)]
    pub recompute: bool,
    #[serde(default)]
    pub expect_rank: Vec<String>,
}

/// Relative tolerance of the recomputed real period.
pub const OMEGA_RTOL: f64 = 1e-4;
/// Regulator tolerance, absolute below 1 and relative above.
pub const REGULATOR_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub line: usize,
    pub label: String,
    pub field: String,
    pub violation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationOutcome {
    pub coefficients: String,
    pub expected: u8,
    pub label: Option<String>,
    pub found: Option<u8>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: usize,
    pub issues: Vec<Issue>,
    pub expectations: Vec<ExpectationOutcome>,
}

impl ValidationReport {
    pub fn clean(&self) -> bool {
        self.issues.is_empty() && self.expectations.iter().all(|e| e.ok)
    }
}

fn recompute_issues(r: &CurveRecord) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match real_period(&r.curve, 1e-12) {
        Ok(om) if ((om - r.omega) / r.omega).abs() <= OMEGA_RTOL => {}
        Ok(om) => out.push(("omega".into(), format!("recomputed real period {om} differs from listed {}", r.omega))),
        Err(e) => out.push(("omega".into(), format!("could not recompute the real period: {e}"))),
    }
    if let Some(gens) = r.generators.as_ref().filter(|g| g.len() == r.rank as usize && !g.is_empty()) {
        match regulator(&r.curve, gens, 1e-10) {
            Ok(reg) if (reg - r.regulator).abs() <= REGULATOR_TOL * r.regulator.abs().max(1.0) => {}
            Ok(reg) => out.push(("regulator".into(), format!("recomputed regulator {reg} differs from listed {}", r.regulator))),
            Err(e) => out.push(("regulator".into(), format!("could not recompute the regulator: {e}"))),
        }
    }
    if r.conductor > 0 {
        for (p, _) in factor_u64(r.conductor) {
            if p > DEFAULT_PRIME_BOUND {
                continue;
            }
            if let Err(e) = local_factor_bounded(&r.curve, p, r.conductor, DEFAULT_PRIME_BOUND) {
                out.push(("conductor".into(), e.to_string()));
            }
        }
    }
    if !r.sha_is_integral(1e-3) {
        out.push(("sha_order".into(), format!("analytic Sha {} is not an integer", r.sha_order)));
    }
    out
}

/// Invariant checks, optional recomputation and rank expectations. `lines`
/// gives each record's source line (record numbers are used when absent).
pub fn validate_records(records: &[CurveRecord], lines: Option<&[usize]>, s: &ValidateSettings) -> Result<ValidationReport, JobError> {
    let expectations: Vec<RankExpectation> = s.expect_rank.iter().map(|e| e.parse()).collect::<Result<_, _>>()?;
    let line = |i: usize| lines.map(|l| l[i]).unwrap_or(i + 1);
    let per_record: Vec<Vec<Issue>> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut found: Vec<(String, String)> = validate(r).into_iter().map(|v| (v.field, v.violation)).collect();
            if s.recompute {
                found.extend(recompute_issues(r));
            }
            found
                .into_iter()
                .map(|(field, violation)| Issue { line: line(i), label: r.label.clone(), field, violation })
                .collect()
        })
        .collect();
    let outcomes = expectations
        .iter()
        .map(|e| {
            let hit = records.iter().find(|r| r.curve.to_string() == e.coefficients);
            ExpectationOutcome {
                coefficients: e.coefficients.clone(),
                expected: e.rank,
                label: hit.map(|r| r.label.clone()),
                found: hit.map(|r| r.rank),
                ok: hit.is_some_and(|r| r.rank == e.rank),
            }
        })
        .collect();
    Ok(ValidationReport { records: records.len(), issues: per_record.into_iter().flatten().collect(), expectations: outcomes })
}

pub fn validation(records: &[CurveRecord], lines: Option<&[usize]>, s: &ValidateSettings) -> Result<(Doc, ValidationReport), JobError> {
    let report = validate_records(records, lines, s)?;
    let mut settings = serde_json::to_value(s).map_err(|e| JobError::Numeric(e.to_string()))?;
    settings["omega_rtol"] = OMEGA_RTOL.into();
    settings["regulator_tol"] = REGULATOR_TOL.into();
    Ok((Doc::json("validation", &settings, &report)?, report))
}

// ---- traces of Frobenius ----

pub fn ap_table(r: &CurveRecord, pmax: u64) -> Result<Doc, JobError> {
    let bound = pmax.max(DEFAULT_PRIME_BOUND);
    let rows = primes_up_to(pmax)
        .into_par_iter()
        .map(|p| {
            let lf = local_factor_bounded(&r.curve, p, r.conductor, bound)?;
            Ok(vec![p.to_string(), lf.reduction.as_str().to_string(), lf.ap.to_string()])
        })
        .collect::<Result<Vec<_>, crate::ec::EcError>>()?;
    Ok(Doc::csv(
        "frobenius-traces",
        &[("p", "prime"), ("reduction", "good, multiplicative or additive"), ("a_p", "trace of Frobenius (0 when p^2 | N)")],
        rows,
    )
    .with_note(format!("curve={} label={} conductor={}", r.curve, r.label, r.conductor)))
}

// ---- topology ----

pub fn barcodes(records: &[CurveRecord], source: &str, cfg: &PipelineConfig) -> Result<(Doc, Vec<BarcodeReport>), JobError> {
    let reports = barcode_pipeline(records, source, cfg)?;
    Ok((Doc::json("barcodes", cfg, &reports)?, reports))
}

// ---- learning ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    /// a1, a2, a3 and sLog of a4, a6.
    Coefficients,
    /// Coefficients plus every other database column except the target.
    Mixed,
}

impl std::str::FromStr for FeatureSet {
    type Err = JobError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "coefficients" | "coeffs" => Ok(FeatureSet::Coefficients),
            "mixed" => Ok(FeatureSet::Mixed),
            _ => Err(JobError::Config(format!("unknown feature set {s:?} (coefficients, mixed)"))),
        }
    }
}

impl FeatureSet {
    pub fn columns(&self, target: Column) -> Vec<ColumnSpec> {
        match self {
            FeatureSet::Coefficients => coefficient_features(),
            FeatureSet::Mixed => mixed_features(target),
        }
    }
}

pub fn feature_matrix(records: &[CurveRecord], features: FeatureSet, target: Column) -> Result<FeatureMatrix, JobError> {
    Ok(FeatureMatrix::build(records, &features.columns(target), target, default_kind(target))?)
}

pub fn experiment(records: &[CurveRecord], features: FeatureSet, target: Column, spec: &ExperimentSpec) -> Result<ModelReport, JobError> {
    Ok(run_experiment(&feature_matrix(records, features, target)?, spec)?)
}

/// One row per (target, model) of a results table.
pub fn results_table(
    records: &[CurveRecord],
    features: FeatureSet,
    targets: &[Column],
    models: &[ModelKind],
    spec: &ExperimentSpec,
) -> Result<(Doc, Doc), JobError> {
    let jobs: Vec<(Column, ModelKind)> = targets.iter().flat_map(|&t| models.iter().map(move |&m| (t, m))).collect();
    let reports = jobs
        .iter()
        .map(|&(t, m)| experiment(records, features, t, &ExperimentSpec { model: m, ..*spec }))
        .collect::<Result<Vec<_>, _>>()?;
    let ms = |m: Option<crate::ml::MeanStd>| match m {
        Some(v) => vec![cell(v.mean), cell(v.std)],
        None => vec![String::new(), String::new()],
    };
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.target.name().to_string(), model_name(r.spec.model, r.kind).to_string()];
            for m in [r.summary.nmae, r.summary.rmse, r.summary.f1_micro, r.summary.f1_macro, r.summary.mcc] {
                row.extend(ms(m));
            }
            row
        })
        .collect();
    let table = Doc::csv(
        &format!("results-{}", feature_set_name(features)),
        &[
            ("target", "predicted column"),
            ("model", "gbt, dummy, ols or logistic"),
            ("nmae_mean", "median |error| / test range, mean over folds"),
            ("nmae_std", "sample std over folds"),
            ("rmse_mean", "root mean squared error"),
            ("rmse_std", "sample std over folds"),
            ("f1_micro_mean", "micro-averaged F1"),
            ("f1_micro_std", "sample std over folds"),
            ("f1_macro_mean", "macro-averaged F1"),
            ("f1_macro_std", "sample std over folds"),
            ("mcc_mean", "Matthews correlation coefficient"),
            ("mcc_std", "sample std over folds"),
        ],
        rows,
    )
    .with_note(format!("k={} seed={} rows={}", spec.k, spec.seed, records.len()));
    let full = Doc::json("model-reports", spec, &reports)?;
    Ok((table, full))
}

fn model_name(m: ModelKind, kind: TargetKind) -> &'static str {
    match (m, kind) {
        (ModelKind::Gbt, _) => "gbt",
        (ModelKind::Dummy, _) => "dummy",
        (ModelKind::Linear | ModelKind::Logistic, TargetKind::Real) => "ols",
        (ModelKind::Linear | ModelKind::Logistic, TargetKind::Class) => "logistic",
    }
}

fn feature_set_name(f: FeatureSet) -> &'static str {
    match f {
        FeatureSet::Coefficients => "coefficients",
        FeatureSet::Mixed => "mixed",
    }
}

/// OLS on all rows: coefficient table of one target.
pub fn ols_coefficients(records: &[CurveRecord], features: FeatureSet, target: Column) -> Result<Doc, JobError> {
    let fm = feature_matrix(records, features, target)?;
    let fit = crate::ml::ols_fit(&fm.rows, &fm.y, &fm.feature_names())?;
    let rows = (0..fit.names.len())
        .map(|i| {
            vec![
                fit.names[i].clone(),
                cell(fit.coef[i]),
                cell(fit.std_err[i]),
                cell(fit.t[i]),
                cell(fit.p[i]),
                cell(fit.ci_low[i]),
                cell(fit.ci_high[i]),
            ]
        })
        .collect();
    Ok(Doc::csv(
        "ols-coefficients",
        &[
            ("term", "const or feature"),
            ("coef", "least-squares coefficient"),
            ("std_err", "standard error"),
            ("t", "t statistic"),
            ("p", "two-sided p-value"),
            ("ci_low", "lower 95% confidence bound"),
            ("ci_high", "upper 95% confidence bound"),
        ],
        rows,
    )
    .with_note(format!("target={} n={} r2={} f_stat={}", target.name(), fit.n, cell(fit.r2), cell(fit.f_stat))))
}

/// OLS goodness of fit for several targets.
pub fn ols_summary(records: &[CurveRecord], features: FeatureSet, targets: &[Column]) -> Result<Doc, JobError> {
    let rows = targets
        .iter()
        .map(|&t| {
            let fm = feature_matrix(records, features, t)?;
            let fit = crate::ml::ols_fit(&fm.rows, &fm.y, &fm.feature_names())?;
            Ok(vec![t.name().to_string(), cell(fit.r2), cell(fit.adj_r2), cell(fit.f_stat), cell(fit.f_p)])
        })
        .collect::<Result<Vec<_>, JobError>>()?;
    Ok(Doc::csv(
        &format!("ols-summary-{}", feature_set_name(features)),
        &[
            ("target", "predicted column"),
            ("r2", "R squared"),
            ("adj_r2", "adjusted R squared"),
            ("f_stat", "F statistic against the intercept-only model"),
            ("f_p", "upper-tail p-value of the F statistic"),
        ],
        rows,
    ))
}

/// Cross-validated score against training-set fraction.
pub fn learning_curves(records: &[CurveRecord], targets: &[Column], fractions: &[f64], spec: &ExperimentSpec) -> Result<Doc, JobError> {
    let mut rows = Vec::new();
    for &t in targets {
        let fm = feature_matrix(records, FeatureSet::Coefficients, t)?;
        let metric = if fm.kind == TargetKind::Real { "nmae" } else { "mcc" };
        for p in learning_curve(&fm, spec, fractions)? {
            let m = p.summary.as_ref().and_then(|s| if fm.kind == TargetKind::Real { s.nmae } else { s.mcc });
            rows.push(vec![
                t.name().to_string(),
                metric.to_string(),
                cell(p.fraction),
                p.n_train.to_string(),
                m.map(|v| cell(v.mean)).unwrap_or_default(),
                m.map(|v| cell(v.std)).unwrap_or_default(),
                p.error.unwrap_or_default(),
            ]);
        }
    }
    Ok(Doc::csv(
        "learning-curves",
        &[
            ("target", "predicted column"),
            ("metric", "nmae for real targets, mcc for classes"),
            ("fraction", "share of each training fold used"),
            ("n_train", "training rows per fold"),
            ("mean", "metric mean over folds"),
            ("std", "sample std over folds"),
            ("error", "failure message, empty on success"),
        ],
        rows,
    )
    .with_note(format!("model=gbt k={} seed={}", spec.k, spec.seed)))
}

/// Columns of the per-column transform syntax used by TDA jobs.
pub fn parse_columns(spec: &[String]) -> Result<Vec<ColumnSpec>, JobError> {
    spec.iter().map(|s| s.parse::<ColumnSpec>().map_err(JobError::Config)).collect()
}

/// `ColumnSpec` with the identity transform.
pub fn plain(c: Column) -> ColumnSpec {
    ColumnSpec { column: c, transform: Transform::Identity }
}
