//! Ordinary least squares with classical inference.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::beta::beta_reg;

use super::MlError;

/// Relative residual below which a column counts as a combination of earlier ones.
const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// `"const"` followed by the feature names.
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub f_stat: f64,
    pub f_p: f64,
    pub n: usize,
    pub df_resid: usize,
    /// Residuals vanish to rounding.
    pub perfect_fit: bool,
    /// Same hyperplane over z-scored features: intercept then slopes.
    pub coef_z: Vec<f64>,
}

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Upper-tail p-value of an F statistic.
pub fn f_upper_p(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Names of columns that lie (numerically) in the span of the intercept and
/// the columns before them.
fn collinear_columns(design: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut out = Vec::new();
    for j in 0..design.ncols() {
        let col = design.column(j).into_owned();
        let norm = col.norm();
        let mut r = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r -= q * c;
            }
        }
        let rn = r.norm();
        if norm == 0.0 || rn <= COLLINEAR_TOL * norm {
            out.push(names[j].clone());
        } else {
            basis.push(r / rn);
        }
    }
    out
}

fn design_matrix(x: &[Vec<f64>]) -> DMatrix<f64> {
    let m = x.first().map_or(0, |r| r.len());
    DMatrix::from_fn(x.len(), m + 1, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] })
}

/// Fits `y ~ 1 + x` where `x` holds one row per observation.
pub fn ols_fit(x: &[Vec<f64>], y: &[f64], feature_names: &[String]) -> Result<OlsFit, MlError> {
    let n = y.len();
    if x.len() != n || x.iter().any(|r| r.len() != feature_names.len()) {
        return Err(MlError::Size("design and target disagree in shape".into()));
    }
    let m = feature_names.len();
    let p = m + 1;
    if n <= p {
        return Err(MlError::Size(format!("{n} observations for {p} coefficients")));
    }
    let mut names = vec!["const".to_string()];
    names.extend(feature_names.iter().cloned());
    let a = design_matrix(x);
    let bad = collinear_columns(&a, &names);
    if !bad.is_empty() {
        return Err(MlError::RankDeficient(bad));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * DVector::from_column_slice(y);
    let coef = r.solve_upper_triangular(&qty).ok_or_else(|| MlError::RankDeficient(names.clone()))?;
    let resid = DVector::from_column_slice(y) - &a * &coef;
    let ssr = resid.norm_squared();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let df = n - p;
    let sigma2 = ssr / df as f64;
    let rinv = r.solve_upper_triangular(&DMatrix::identity(p, p)).ok_or_else(|| MlError::RankDeficient(names.clone()))?;
    let std_err: Vec<f64> = (0..p).map(|j| (sigma2 * rinv.row(j).norm_squared()).sqrt()).collect();
    let perfect_fit = ssr <= 1e-24 * sst.max(ybar * ybar * n as f64).max(f64::MIN_POSITIVE);
    let coef: Vec<f64> = coef.iter().copied().collect();
    let t: Vec<f64> = coef
        .iter()
        .zip(&std_err)
        .map(|(&b, &s)| if s > 0.0 { b / s } else if b == 0.0 { 0.0 } else { b.signum() * f64::INFINITY })
        .collect();
    let pv: Vec<f64> = t.iter().map(|&t| t_two_sided_p(t, df as f64)).collect();
    let tq = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| MlError::Config(e.to_string()))?.inverse_cdf(0.975);
    let (r2, f_stat) = if m == 0 || sst == 0.0 {
        (0.0, f64::NAN)
    } else {
        let r2 = 1.0 - ssr / sst;
        (r2, ((sst - ssr) / m as f64) / sigma2)
    };
    let f_p = if f_stat.is_nan() { f64::NAN } else { f_upper_p(f_stat, m as f64, df as f64) };
    let adj_r2 = 1.0 - (1.0 - r2) * (n - 1) as f64 / df as f64;
    let mut coef_z = vec![coef[0]];
    for j in 0..m {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let sd = (x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        coef_z[0] += coef[j + 1] * mean;
        coef_z.push(coef[j + 1] * sd);
    }
    Ok(OlsFit {
        ci_low: coef.iter().zip(&std_err).map(|(b, s)| b - tq * s).collect(),
        ci_high: coef.iter().zip(&std_err).map(|(b, s)| b + tq * s).collect(),
        names,
        coef,
        std_err,
        t,
        p: pv,
        r2,
        adj_r2,
        f_stat,
        f_p,
        n,
        df_resid: df,
        perfect_fit,
        coef_z,
    })
}

impl OlsFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.coef[0] + row.iter().zip(&self.coef[1..]).map(|(x, b)| x * b).sum::<f64>()
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.iter().map(|r| self.predict_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use statrs::distribution::FisherSnedecor;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn noiseless_line() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let f = ols_fit(&x, &y, &names(1)).unwrap();
        assert!((f.coef[0] - 1.0).abs() < 1e-12 && (f.coef[1] - 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(f.perfect_fit);
    }

    #[test]
    fn intercept_only() {
        let x: Vec<Vec<f64>> = vec![vec![]; 5];
        let f = ols_fit(&x, &[1.0, 2.0, 3.0, 4.0, 10.0], &[]).unwrap();
        assert_eq!(f.r2, 0.0);
        assert!((f.coef[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_named() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * i) as f64, 3.0 * i as f64 - 1.0]).collect();
        let y: Vec<f64> = (0..20).map(|i| i as f64).collect();
        match ols_fit(&x, &y, &names(3)) {
            Err(MlError::RankDeficient(cols)) => assert_eq!(cols, vec!["x2".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn p_values_match_distribution_cdfs() {
        for (t, df) in [(0.3, 5.0), (2.1, 30.0), (-4.0, 12.0)] {
            let d = StudentsT::new(0.0, 1.0, df).unwrap();
            let oracle = 2.0 * (1.0 - d.cdf(f64::abs(t)));
            assert!((t_two_sided_p(t, df) - oracle).abs() < 1e-12);
        }
        for (f, d1, d2) in [(1.5, 3.0, 40.0), (7.0, 2.0, 9.0)] {
            let d = FisherSnedecor::new(d1, d2).unwrap();
            assert!((f_upper_p(f, d1, d2) - (1.0 - d.cdf(f))).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let x: Vec<Vec<f64>> = (0..2000).map(|_| vec![noise.sample(&mut rng) * 4.0, noise.sample(&mut rng)]).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 - r[0] + 0.5 * r[1] + noise.sample(&mut rng)).collect();
        let f = ols_fit(&x, &y, &names(2)).unwrap();
        for (j, truth) in [3.0, -1.0, 0.5].iter().enumerate() {
            assert!(f.ci_low[j] < *truth && *truth < f.ci_high[j]);
        }
        assert!(f.f_p < 1e-10 && f.adj_r2 < f.r2);
        let pred = f.predict(&x[..1]);
        assert!((pred[0] - f.predict_row(&x[0])).abs() == 0.0);
    }
}
