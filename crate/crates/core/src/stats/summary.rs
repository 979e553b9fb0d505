use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::ingest::CurveRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    A4,
    A6,
}

impl std::str::FromStr for Coefficient {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a4" => Ok(Coefficient::A4),
            "a6" => Ok(Coefficient::A6),
            _ => Err(StatsError::Config(format!("unknown coefficient {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub a1: i8,
    pub a2: i8,
    pub a3: i8,
    pub rank: u8,
    pub size: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` for a single record.
    pub std: Option<f64>,
    pub median: f64,
    pub zero_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub p2_5: f64,
    pub p97_5: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn boxplot_summary(values: &[f64]) -> Result<BoxSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(BoxSummary {
        median: quantile_sorted(&s, 0.5),
        q25: quantile_sorted(&s, 0.25),
        q75: quantile_sorted(&s, 0.75),
        p2_5: quantile_sorted(&s, 0.025),
        p97_5: quantile_sorted(&s, 0.975),
    })
}

/// One row per occupied `(a1, a2, a3, rank)` cell, in key order.
pub fn group_stats(records: &[CurveRecord], value: Coefficient) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(i8, i8, i8, u8), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let Some((a1, a2, a3)) = r.triple() else { continue };
        let v = match value {
            Coefficient::A4 => &r.curve.a4,
            Coefficient::A6 => &r.curve.a6,
        };
        let cell = cells.entry((a1, a2, a3, r.rank)).or_default();
        cell.0.push(v.to_f64().unwrap_or(f64::NAN));
        cell.1 += v.is_zero() as usize;
    }
    cells
        .into_iter()
        .map(|((a1, a2, a3, rank), (mut xs, zero_count))| {
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let std = (n > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
            xs.sort_by(f64::total_cmp);
            SummaryRow { a1, a2, a3, rank, size: n, mean, std, median: quantile_sorted(&xs, 0.5), zero_count }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::WeierstrassCurve;

    #[test]
    fn nine_values() {
        let v = [7.0, 1.0, 9.0, 3.0, 5.0, 2.0, 8.0, 4.0, 6.0];
        let b = boxplot_summary(&v).unwrap();
        // h = 8q over sorted 1..=9
        assert_eq!(b.median, 5.0);
        assert_eq!(b.q25, 3.0);
        assert_eq!(b.q75, 7.0);
        assert!((b.p2_5 - 1.2).abs() < 1e-12);
        assert!((b.p97_5 - 8.8).abs() < 1e-12);
    }

    #[test]
    fn constant_values() {
        let b = boxplot_summary(&[4.0; 6]).unwrap();
        assert!([b.median, b.q25, b.q75, b.p2_5, b.p97_5].iter().all(|&x| x == 4.0));
    }

    fn rec(coeffs: [i64; 5], rank: u8) -> CurveRecord {
        CurveRecord {
            label: format!("{coeffs:?}{rank}"),
            curve: WeierstrassCurve::from_coeffs(coeffs),
            conductor: 11,
            rank,
            torsion_order: 1,
            tamagawa_product: 1,
            omega: 1.0,
            regulator: 1.0,
            sha_order: 1.0,
            generators: None,
        }
    }

    #[test]
    fn grouped_rows() {
        let recs = vec![
            rec([0, 0, 1, -1, 0], 1),
            rec([0, 0, 1, 0, 3], 1),
            rec([0, 0, 1, -7, 3], 1),
            rec([1, -1, 0, -79, 342], 4),
        ];
        let rows = group_stats(&recs, Coefficient::A4);
        assert_eq!(rows.len(), 2);
        let r = &rows[0];
        assert_eq!((r.a1, r.a2, r.a3, r.rank, r.size, r.zero_count), (0, 0, 1, 1, 3, 1));
        assert!((r.mean + 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.median, -1.0);
        assert!((r.std.unwrap() - 3.785_938_897_200_182).abs() < 1e-12);
        assert_eq!(rows[1].std, None);
        assert_eq!(rows[1].median, -79.0);
    }
}
