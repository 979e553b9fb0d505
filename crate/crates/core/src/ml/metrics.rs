//! Regression and classification scores.

use super::MlError;
use crate::stats::quantile_sorted;

fn same_len(y: &[f64], p: &[f64]) -> Result<(), MlError> {
    if y.len() != p.len() || y.is_empty() {
        return Err(MlError::Size(format!("{} targets vs {} predictions", y.len(), p.len())));
    }
    Ok(())
}

/// `median |y - p| / (max y - min y)`.
pub fn nmae(y: &[f64], p: &[f64]) -> Result<f64, MlError> {
    same_len(y, p)?;
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi == lo {
        return Err(MlError::UndefinedRange);
    }
    let mut err: Vec<f64> = y.iter().zip(p).map(|(a, b)| (a - b).abs()).collect();
    err.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&err, 0.5) / (hi - lo))
}

pub fn rmse(y: &[f64], p: &[f64]) -> Result<f64, MlError> {
    same_len(y, p)?;
    Ok((y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64).sqrt())
}

/// Counts with rows indexed by true class and columns by predicted class.
pub fn confusion(y: &[usize], p: &[usize], n_classes: usize) -> Result<Vec<Vec<u64>>, MlError> {
    if y.len() != p.len() {
        return Err(MlError::Size(format!("{} targets vs {} predictions", y.len(), p.len())));
    }
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&a, &b) in y.iter().zip(p) {
        if a >= n_classes || b >= n_classes {
            return Err(MlError::Config(format!("class index {} outside 0..{n_classes}", a.max(b))));
        }
        m[a][b] += 1;
    }
    Ok(m)
}

/// Each column divided by its total; empty columns stay zero.
pub fn normalize_columns(m: &[Vec<u64>]) -> Vec<Vec<f64>> {
    let k = m.len();
    let totals: Vec<u64> = (0..k).map(|j| m.iter().map(|row| row[j]).sum()).collect();
    m.iter()
        .map(|row| row.iter().zip(&totals).map(|(&c, &t)| if t == 0 { 0.0 } else { c as f64 / t as f64 }).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Average {
    Micro,
    Macro,
}

/// F1 score. Macro averaging runs over the classes that occur in `y` or `p`.
pub fn f1(y: &[usize], p: &[usize], avg: Average) -> Result<f64, MlError> {
    let k = y.iter().chain(p).max().map_or(0, |m| m + 1);
    let m = confusion(y, p, k)?;
    let tp: Vec<f64> = (0..k).map(|c| m[c][c] as f64).collect();
    let fp: Vec<f64> = (0..k).map(|c| (0..k).map(|r| m[r][c]).sum::<u64>() as f64 - tp[c]).collect();
    let fn_: Vec<f64> = (0..k).map(|c| m[c].iter().sum::<u64>() as f64 - tp[c]).collect();
    let score = |tp: f64, fp: f64, fn_: f64| if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
    Ok(match avg {
        Average::Micro => score(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum()),
        Average::Macro => {
            let present: Vec<usize> = (0..k).filter(|&c| tp[c] + fp[c] + fn_[c] > 0.0).collect();
            present.iter().map(|&c| score(tp[c], fp[c], fn_[c])).sum::<f64>() / present.len() as f64
        }
    })
}

/// Matthews correlation in its multiclass covariance form; 0 when either
/// labelling is constant.
pub fn mcc(y: &[usize], p: &[usize]) -> Result<f64, MlError> {
    let k = y.iter().chain(p).max().map_or(0, |m| m + 1);
    let m = confusion(y, p, k)?;
    let s = y.len() as f64;
    let c: f64 = (0..k).map(|i| m[i][i] as f64).sum();
    let t: Vec<f64> = (0..k).map(|i| m[i].iter().sum::<u64>() as f64).collect();
    let q: Vec<f64> = (0..k).map(|j| (0..k).map(|i| m[i][j]).sum::<u64>() as f64).collect();
    let tq: f64 = t.iter().zip(&q).map(|(a, b)| a * b).sum();
    let denom = ((s * s - q.iter().map(|v| v * v).sum::<f64>()) * (s * s - t.iter().map(|v| v * v).sum::<f64>())).sqrt();
    Ok(if denom == 0.0 { 0.0 } else { (c * s - tq) / denom })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect() {
        let y = [1.0, 2.0, 5.0];
        assert_eq!(nmae(&y, &y).unwrap(), 0.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        let c = [0, 1, 2, 2, 1];
        assert_eq!(f1(&c, &c, Average::Micro).unwrap(), 1.0);
        assert_eq!(f1(&c, &c, Average::Macro).unwrap(), 1.0);
        assert_eq!(mcc(&c, &c).unwrap(), 1.0);
    }

    #[test]
    fn constant_classifier_has_zero_mcc() {
        assert_eq!(mcc(&[0, 1, 2, 1, 0], &[1, 1, 1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn nmae_needs_range() {
        assert!(matches!(nmae(&[3.0, 3.0], &[1.0, 2.0]), Err(MlError::UndefinedRange)));
        assert!((nmae(&[0.0, 10.0, 4.0], &[1.0, 7.0, 4.0]).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn hand_built_three_class() {
        // true 0: predicted 0,0,1 ; true 1: predicted 1,1,2 ; true 2: predicted 2,0
        let y = [0, 0, 0, 1, 1, 1, 2, 2];
        let p = [0, 0, 1, 1, 1, 2, 2, 0];
        // per class tp/fp/fn: 0: 2/1/1, 1: 2/1/1, 2: 1/1/1
        let macro_f1 = (4.0 / 6.0 + 4.0 / 6.0 + 2.0 / 4.0) / 3.0;
        assert!((f1(&y, &p, Average::Macro).unwrap() - macro_f1).abs() < 1e-15);
        assert!((f1(&y, &p, Average::Micro).unwrap() - 5.0 / 8.0).abs() < 1e-15);
        assert_eq!(confusion(&y, &p, 3).unwrap(), vec![vec![2, 1, 0], vec![0, 2, 1], vec![1, 0, 1]]);
        let norm = normalize_columns(&confusion(&y, &p, 3).unwrap());
        assert!((norm[0][0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn binary_mcc_matches_display() {
        let y = [1, 1, 1, 0, 0, 0, 0, 1, 0, 1];
        let p = [1, 0, 1, 0, 0, 1, 0, 1, 0, 0];
        let (tp, tn, fp, fn_) = (3.0, 4.0, 1.0, 2.0);
        let binary = (tp * tn - fp * fn_) / f64::sqrt((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_));
        assert!((mcc(&y, &p).unwrap() - binary).abs() < 1e-14);
    }
}
