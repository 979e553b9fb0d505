use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrMethod {
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrMethod {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pearson" => Ok(CorrMethod::Pearson),
            "spearman" => Ok(CorrMethod::Spearman),
            _ => Err(StatsError::Config(format!("unknown correlation method {s:?}"))),
        }
    }
}

/// Symmetric correlation matrix. Entries touching a zero-variance column are
/// NaN and listed in `undefined` as `(i, j)` with `i <= j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub method: CorrMethod,
    pub values: Vec<Vec<f64>>,
    pub undefined: Vec<(usize, usize)>,
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn centred(x: &[f64]) -> (Vec<f64>, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    (c, norm)
}

pub fn correlation_matrix(columns: &[Vec<f64>], method: CorrMethod) -> Result<CorrMatrix, StatsError> {
    if columns.len() < 2 {
        return Err(StatsError::Config("need at least two columns".into()));
    }
    let n = columns[0].len();
    if n < 2 || columns.iter().any(|c| c.len() != n) {
        return Err(StatsError::Config("columns must share a length of at least 2".into()));
    }
    if columns.iter().flatten().any(|v| !v.is_finite()) {
        return Err(StatsError::Config("non-finite value in correlation input".into()));
    }
    let prepared: Vec<(Vec<f64>, f64)> = columns
        .iter()
        .map(|c| match method {
            CorrMethod::Pearson => centred(c),
            CorrMethod::Spearman => centred(&average_ranks(c)),
        })
        .collect();
    let k = columns.len();
    let mut values = vec![vec![f64::NAN; k]; k];
    let mut undefined = Vec::new();
    for i in 0..k {
        for j in i..k {
            let (ci, ni) = &prepared[i];
            let (cj, nj) = &prepared[j];
            let r = if *ni == 0.0 || *nj == 0.0 {
                undefined.push((i, j));
                f64::NAN
            } else if i == j {
                1.0
            } else {
                let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                (dot / (ni * nj)).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrMatrix { method, values, undefined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_correlation_and_monotone() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 10.0 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        let p = correlation_matrix(&[x.clone(), y.clone()], CorrMethod::Pearson).unwrap();
        let s = correlation_matrix(&[x, y], CorrMethod::Spearman).unwrap();
        assert_eq!(p.values[0][0], 1.0);
        assert!(p.values[0][1] < 1.0 && p.values[0][1] > 0.8);
        assert!((s.values[0][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_get_average_ranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn independent_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..10_000).map(|_| rng.random::<f64>()).collect()).collect();
        for m in [CorrMethod::Pearson, CorrMethod::Spearman] {
            let c = correlation_matrix(&cols, m).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(c.values[i][j], c.values[j][i]);
                    if i != j {
                        assert!(c.values[i][j].abs() < 0.05);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_variance_flagged() {
        let c = correlation_matrix(&[vec![1.0, 2.0, 3.0], vec![4.0, 4.0, 4.0]], CorrMethod::Pearson).unwrap();
        assert!(c.values[0][1].is_nan());
        assert_eq!(c.undefined, vec![(0, 1), (1, 1)]);
        assert_eq!(c.values[0][0], 1.0);
    }
}
