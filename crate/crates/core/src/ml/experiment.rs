//! Cross-validated model comparisons over curve records.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::kfold;
use super::gbt::{gbt_fit, normalize, GbtParams, Target};
use super::linear::ols_fit;
use super::logistic::logistic_fit;
use super::metrics::{confusion, f1, mcc, nmae, normalize_columns, rmse, Average};
use super::MlError;
use crate::features::{Column, ColumnSpec, Transform};
use crate::ingest::CurveRecord;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Real,
    Class,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub features: Vec<ColumnSpec>,
    pub target: Column,
    pub kind: TargetKind,
    pub y: Vec<f64>,
    /// Class index of each row (classification only).
    pub labels: Vec<usize>,
    /// Original target value of each class index.
    pub class_values: Vec<f64>,
}

pub fn default_kind(target: Column) -> TargetKind {
    match target {
        Column::Rank | Column::Torsion => TargetKind::Class,
        _ => TargetKind::Real,
    }
}

/// Weierstrass coefficients, `a4` and `a6` through sLog.
pub fn coefficient_features() -> Vec<ColumnSpec> {
    [Column::A1, Column::A2, Column::A3, Column::A4, Column::A6]
        .into_iter()
        .map(|c| ColumnSpec { column: c, transform: if matches!(c, Column::A4 | Column::A6) { Transform::Slog } else { Transform::Identity } })
        .collect()
}

/// Coefficients plus every arithmetic invariant except `target`.
pub fn mixed_features(target: Column) -> Vec<ColumnSpec> {
    let mut f = coefficient_features();
    for c in [
        Column::Conductor,
        Column::Rank,
        Column::Torsion,
        Column::Tamagawa,
        Column::Regulator,
        Column::Sha,
        Column::Omega,
    ] {
        f.push(ColumnSpec { column: c, transform: Transform::Identity });
    }
    f.retain(|s| s.column != target);
    f
}

impl FeatureMatrix {
    pub fn build(records: &[CurveRecord], features: &[ColumnSpec], target: Column, kind: TargetKind) -> Result<FeatureMatrix, MlError> {
        if features.iter().any(|f| f.column == target) {
            return Err(MlError::Config(format!("target {} is also a feature", target.name())));
        }
        if records.is_empty() {
            return Err(MlError::Size("no records".into()));
        }
        let rows = crate::features::matrix(records, features).map_err(MlError::Config)?;
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(MlError::Config("non-finite feature value".into()));
        }
        let y: Vec<f64> = records.iter().map(|r| target.value(r)).collect();
        let (labels, class_values) = match kind {
            TargetKind::Real => (Vec::new(), Vec::new()),
            TargetKind::Class => {
                if y.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                    return Err(MlError::Config(format!("{} is not a small non-negative integer", target.name())));
                }
                let mut vals = y.clone();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                let labels = y.iter().map(|v| vals.binary_search_by(|p| p.total_cmp(v)).unwrap()).collect();
                (labels, vals)
            }
        };
        Ok(FeatureMatrix { rows, features: features.to_vec(), target, kind, y, labels, class_values })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.to_string()).collect()
    }

    fn n_classes(&self) -> usize {
        self.class_values.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gbt,
    /// OLS for real targets, logistic regression for classes.
    Linear,
    Logistic,
    Dummy,
}

impl std::str::FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gbt" | "xgboost" => Ok(ModelKind::Gbt),
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            "dummy" => Ok(ModelKind::Dummy),
            _ => Err(MlError::Config(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelKind,
    pub params: GbtParams,
    pub k: usize,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec { model: ModelKind::Gbt, params: GbtParams::default(), k: 5, seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub nmae: Option<f64>,
    pub rmse: Option<f64>,
    pub f1_micro: Option<f64>,
    pub f1_macro: Option<f64>,
    pub mcc: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(v: &[f64]) -> MeanStd {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    MeanStd { mean, std }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub nmae: Option<MeanStd>,
    pub rmse: Option<MeanStd>,
    pub f1_micro: Option<MeanStd>,
    pub f1_macro: Option<MeanStd>,
    pub mcc: Option<MeanStd>,
}

fn summarize(folds: &[FoldMetrics]) -> Summary {
    let pick = |f: fn(&FoldMetrics) -> Option<f64>| {
        let v: Vec<f64> = folds.iter().filter_map(f).collect();
        (!v.is_empty()).then(|| mean_std(&v))
    };
    Summary {
        nmae: pick(|m| m.nmae),
        rmse: pick(|m| m.rmse),
        f1_micro: pick(|m| m.f1_micro),
        f1_macro: pick(|m| m.f1_macro),
        mcc: pick(|m| m.mcc),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub schema_version: u32,
    pub target: Column,
    pub kind: TargetKind,
    pub features: Vec<String>,
    pub spec: ExperimentSpec,
    pub n_rows: usize,
    pub folds: Vec<FoldMetrics>,
    pub fold_errors: Vec<String>,
    pub summary: Summary,
    /// Shares summing to 1 (all zero when the model has none).
    pub importances: Vec<f64>,
    pub class_values: Vec<f64>,
    /// Rows: true class, columns: predicted class, each column summing to 1.
    pub confusion: Option<Vec<Vec<f64>>>,
    pub confusion_minus_dummy: Option<Vec<Vec<f64>>>,
    /// Ordinary least squares over all rows (linear model, real target).
    pub ols: Option<super::linear::OlsFit>,
}

enum Prediction {
    Real(Vec<f64>),
    Class(Vec<usize>),
}

struct Trained {
    prediction: Prediction,
    importance: Vec<f64>,
}

fn pick_rows<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

/// Most frequent class, ties to the smallest.
fn majority(labels: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    (0..n_classes).fold(0, |b, c| if counts[c] > counts[b] { c } else { b })
}

fn train_predict(fm: &FeatureMatrix, model: ModelKind, params: &GbtParams, train: &[usize], test: &[usize]) -> Result<Trained, MlError> {
    let xtr = pick_rows(&fm.rows, train);
    let xte = pick_rows(&fm.rows, test);
    let m = fm.features.len();
    match fm.kind {
        TargetKind::Real => {
            let ytr = pick_rows(&fm.y, train);
            match model {
                ModelKind::Dummy => {
                    let mean = ytr.iter().sum::<f64>() / ytr.len() as f64;
                    Ok(Trained { prediction: Prediction::Real(vec![mean; test.len()]), importance: vec![0.0; m] })
                }
                ModelKind::Linear | ModelKind::Logistic => {
                    let fit = ols_fit(&xtr, &ytr, &fm.feature_names())?;
                    let imp = normalize(&fit.coef_z[1..].iter().map(|c| c.abs()).collect::<Vec<_>>());
                    Ok(Trained { prediction: Prediction::Real(fit.predict(&xte)), importance: imp })
                }
                ModelKind::Gbt => {
                    let g = gbt_fit(&xtr, Target::Real(&ytr), params)?;
                    Ok(Trained { prediction: Prediction::Real(g.predict_real(&xte)), importance: g.gain.clone() })
                }
            }
        }
        TargetKind::Class => {
            let ytr = pick_rows(&fm.labels, train);
            match model {
                ModelKind::Dummy => {
                    let c = majority(&ytr, fm.n_classes());
                    Ok(Trained { prediction: Prediction::Class(vec![c; test.len()]), importance: vec![0.0; m] })
                }
                ModelKind::Linear | ModelKind::Logistic => {
                    let fit = logistic_fit(&xtr, &ytr)?;
                    Ok(Trained { prediction: Prediction::Class(fit.predict(&xte)), importance: normalize(&fit.slope_magnitudes()) })
                }
                ModelKind::Gbt => {
                    let g = gbt_fit(&xtr, Target::Class(&ytr), params)?;
                    Ok(Trained { prediction: Prediction::Class(g.predict_class(&xte)), importance: g.gain.clone() })
                }
            }
        }
    }
}

fn score(fm: &FeatureMatrix, test: &[usize], pred: &Prediction) -> FoldMetrics {
    match pred {
        Prediction::Real(p) => {
            let y = pick_rows(&fm.y, test);
            FoldMetrics { nmae: nmae(&y, p).ok(), rmse: rmse(&y, p).ok(), ..Default::default() }
        }
        Prediction::Class(p) => {
            let y = pick_rows(&fm.labels, test);
            FoldMetrics {
                f1_micro: f1(&y, p, Average::Micro).ok(),
                f1_macro: f1(&y, p, Average::Macro).ok(),
                mcc: mcc(&y, p).ok(),
                ..Default::default()
            }
        }
    }
}

pub fn run_experiment(fm: &FeatureMatrix, spec: &ExperimentSpec) -> Result<ModelReport, MlError> {
    let folds = kfold(fm.rows.len(), spec.k, spec.seed)?;
    let outcomes: Vec<Result<(FoldMetrics, Trained, Option<Trained>), MlError>> = folds
        .par_iter()
        .enumerate()
        .map(|(i, (train, test))| {
            let params = GbtParams { seed: spec.params.seed.wrapping_add(i as u64), ..spec.params };
            let t = train_predict(fm, spec.model, &params, train, test)?;
            let dummy = match fm.kind {
                TargetKind::Class => Some(train_predict(fm, ModelKind::Dummy, &params, train, test)?),
                TargetKind::Real => None,
            };
            Ok((score(fm, test, &t.prediction), t, dummy))
        })
        .collect();
    let mut metrics = Vec::new();
    let mut errors = Vec::new();
    let mut gain = vec![0.0; fm.features.len()];
    let k = fm.n_classes();
    let mut conf = vec![vec![0u64; k]; k];
    let mut conf_dummy = vec![vec![0u64; k]; k];
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((m, t, dummy)) => {
                metrics.push(m);
                for (a, b) in gain.iter_mut().zip(&t.importance) {
                    *a += b;
                }
                let y = if fm.kind == TargetKind::Class { pick_rows(&fm.labels, &folds[i].1) } else { Vec::new() };
                for (pred, acc) in [(Some(&t), &mut conf), (dummy.as_ref(), &mut conf_dummy)] {
                    if let Some(Trained { prediction: Prediction::Class(p), .. }) = pred {
                        let c = confusion(&y, p, k)?;
                        for (ra, rb) in acc.iter_mut().zip(c) {
                            ra.iter_mut().zip(rb).for_each(|(a, b)| *a += b);
                        }
                    }
                }
            }
            Err(e) => errors.push(format!("fold {i}: {e}")),
        }
    }
    if metrics.is_empty() {
        return Err(MlError::Config(format!("every fold failed: {}", errors.join("; "))));
    }
    let (confusion_n, diff) = if fm.kind == TargetKind::Class {
        let a = normalize_columns(&conf);
        let b = normalize_columns(&conf_dummy);
        let d = a.iter().zip(&b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x - y).collect()).collect();
        (Some(a), Some(d))
    } else {
        (None, None)
    };
    let ols = if spec.model == ModelKind::Linear && fm.kind == TargetKind::Real {
        ols_fit(&fm.rows, &fm.y, &fm.feature_names()).ok()
    } else {
        None
    };
    Ok(ModelReport {
        schema_version: REPORT_SCHEMA_VERSION,
        target: fm.target,
        kind: fm.kind,
        features: fm.feature_names(),
        spec: *spec,
        n_rows: fm.rows.len(),
        summary: summarize(&metrics),
        folds: metrics,
        fold_errors: errors,
        importances: normalize(&gain),
        class_values: fm.class_values.clone(),
        confusion: confusion_n,
        confusion_minus_dummy: diff,
        ols,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub n_train: usize,
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

/// Trains on a seeded subsample of each training fold and scores on the full test fold.
pub fn learning_curve(fm: &FeatureMatrix, spec: &ExperimentSpec, fractions: &[f64]) -> Result<Vec<CurvePoint>, MlError> {
    if let Some(bad) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(MlError::Config(format!("training fraction {bad} outside (0, 1)")));
    }
    let folds = kfold(fm.rows.len(), spec.k, spec.seed)?;
    Ok(fractions
        .iter()
        .enumerate()
        .map(|(fi, &frac)| {
            let runs: Vec<Result<FoldMetrics, MlError>> = folds
                .par_iter()
                .enumerate()
                .map(|(i, (train, test))| {
                    let n = ((train.len() as f64) * frac).round().max(1.0) as usize;
                    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ ((fi as u64) << 32) ^ i as u64);
                    let picks = rand::seq::index::sample(&mut rng, train.len(), n);
                    let sub: Vec<usize> = picks.iter().map(|j| train[j]).collect();
                    let params = GbtParams { seed: spec.params.seed.wrapping_add(i as u64), ..spec.params };
                    let t = train_predict(fm, spec.model, &params, &sub, test)?;
                    Ok(score(fm, test, &t.prediction))
                })
                .collect();
            let n_train = ((folds[0].0.len() as f64) * frac).round().max(1.0) as usize;
            let errs: Vec<String> = runs.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
            let ok: Vec<FoldMetrics> = runs.into_iter().filter_map(Result::ok).collect();
            CurvePoint {
                fraction: frac,
                n_train,
                summary: (!ok.is_empty()).then(|| summarize(&ok)),
                error: (!errs.is_empty()).then(|| errs.join("; ")),
            }
        })
        .collect())
}
