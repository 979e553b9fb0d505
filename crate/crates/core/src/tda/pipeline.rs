use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::persistence::{persistence_with, Barcode};
use super::rips::{build_rips, PointCloud, DEFAULT_SIMPLEX_BUDGET};
use super::TdaError;
use crate::features::{matrix, ColumnSpec};
use crate::ingest::{CurveRecord, DatasetView, Filter};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    None,
    Rank,
    Parity,
    Mod3,
}

impl std::str::FromStr for Split {
    type Err = TdaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Split::None),
            "rank" => Ok(Split::Rank),
            "parity" => Ok(Split::Parity),
            "mod3" => Ok(Split::Mod3),
            _ => Err(TdaError::Config(format!("unknown split {s:?}"))),
        }
    }
}

impl Split {
    /// Rank splits cover r = 0, 1, 2 only.
    fn groups(&self) -> Vec<(String, Filter)> {
        let residues = |m: u64, names: &[&str]| -> Vec<(String, Filter)> {
            (0..m)
                .map(|r| (names[r as usize].to_string(), Filter { conductor_residue: Some((m, r)), ..Default::default() }))
                .collect()
        };
        match self {
            Split::None => vec![("all".into(), Filter::default())],
            Split::Rank => (0..=2).map(|r| (format!("rank={r}"), Filter::rank(r))).collect(),
            Split::Parity => residues(2, &["N even", "N odd"]),
            Split::Mod3 => residues(3, &["N=0 mod 3", "N=1 mod 3", "N=2 mod 3"]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub columns: Vec<ColumnSpec>,
    pub n_sample: usize,
    pub seed: u64,
    pub max_dim: usize,
    pub max_eps: f64,
    pub budget: usize,
    pub split: Split,
    /// Keep birth = death pairs.
    pub keep_zero: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            columns: Vec::new(),
            n_sample: 100,
            seed: 0,
            max_dim: 1,
            max_eps: f64::INFINITY,
            budget: DEFAULT_SIMPLEX_BUDGET,
            split: Split::None,
            keep_zero: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarcodeReport {
    pub group: String,
    pub available: usize,
    pub config: PipelineConfig,
    /// Effective filtration cut-off; the configured one unless that was infinite.
    pub max_eps: f64,
    /// Times the automatic cut-off was halved to fit the simplex budget.
    pub eps_halvings: u32,
    pub n_simplices: usize,
    pub barcode: Barcode,
}

/// Smallest radius at which some point is within reach of every other one;
/// beyond it the Rips complex is a cone.
pub fn enclosing_radius(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| cloud.distance(i, j)).fold(0.0, f64::max))
        .min_by(f64::total_cmp)
        .unwrap_or(0.0)
}

/// Longest edge of a Euclidean minimum spanning tree (Prim, O(n^2)): the
/// scale at which the 1-skeleton becomes connected.
pub fn connectivity_radius(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    let mut best = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut longest: f64 = 0.0;
    let mut cur = 0;
    for _ in 1..n {
        done[cur] = true;
        let mut next = usize::MAX;
        for j in 0..n {
            if done[j] {
                continue;
            }
            best[j] = best[j].min(cloud.distance(cur, j));
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        longest = longest.max(best[next]);
        cur = next;
    }
    longest
}

const MAX_HALVINGS: u32 = 40;

/// With an infinite `max_eps` the cut-off starts at the smaller of the
/// enclosing and connectivity radii and is halved until the filtration fits
/// the budget.
pub fn barcode_for_records(records: &[CurveRecord], cfg: &PipelineConfig, group: &str, available: usize) -> Result<BarcodeReport, TdaError> {
    let rows = matrix(records, &cfg.columns).map_err(TdaError::Cloud)?;
    let labels = cfg.columns.iter().map(|c| c.to_string()).collect();
    let cloud = PointCloud::new(&rows, labels)?;
    let auto = !cfg.max_eps.is_finite();
    let mut max_eps = if auto {
        enclosing_radius(&cloud).min(connectivity_radius(&cloud)).max(f64::MIN_POSITIVE)
    } else {
        cfg.max_eps
    };
    let mut eps_halvings = 0;
    let filtration = loop {
        match build_rips(&cloud, cfg.max_dim, max_eps, cfg.budget) {
            Err(TdaError::Budget { .. }) if auto && eps_halvings < MAX_HALVINGS => {
                max_eps /= 2.0;
                eps_halvings += 1;
            }
            other => break other?,
        }
    };
    let barcode = persistence_with(&filtration, cfg.keep_zero);
    Ok(BarcodeReport {
        group: group.to_string(),
        available,
        config: cfg.clone(),
        max_eps,
        eps_halvings,
        n_simplices: filtration.simplices.len(),
        barcode,
    })
}

/// Samples `n_sample` records per split group, transforms the chosen columns
/// and computes one barcode per group.
pub fn barcode_pipeline(records: &[CurveRecord], source: &str, cfg: &PipelineConfig) -> Result<Vec<BarcodeReport>, TdaError> {
    if cfg.columns.is_empty() {
        return Err(TdaError::Config("no columns selected".into()));
    }
    let groups = cfg.split.groups();
    groups
        .par_iter()
        .map(|(name, filter)| {
            let view = DatasetView::new(source, records, filter.clone(), cfg.seed);
            let picked = view.sample(cfg.n_sample, cfg.seed).map_err(|e| TdaError::Sample(format!("{name}: {e}")))?;
            barcode_for_records(&picked, cfg, name, view.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::WeierstrassCurve;
    use crate::features::{Column, Transform};

    fn records(n: usize) -> Vec<CurveRecord> {
        (0..n)
            .map(|i| CurveRecord {
                label: format!("c{i}"),
                curve: WeierstrassCurve::from_coeffs([(i % 2) as i64, 0, 1, (i * i) as i64 - 40, 3 * i as i64 - 17]),
                conductor: 11 + i as u64,
                rank: (i % 3) as u8,
                torsion_order: 1,
                tamagawa_product: 1 + (i % 4) as u64,
                omega: 1.0 + i as f64 / 10.0,
                regulator: 1.0,
                sha_order: 1.0,
                generators: None,
            })
            .collect()
    }

    fn cfg(split: Split, n: usize) -> PipelineConfig {
        let columns = [(Column::A1, Transform::Identity), (Column::A4, Transform::Slog), (Column::A6, Transform::Slog)]
            .into_iter()
            .map(|(column, transform)| ColumnSpec { column, transform })
            .collect();
        PipelineConfig { columns, n_sample: n, seed: 3, split, ..Default::default() }
    }

    #[test]
    fn h0_count_and_single_component() {
        let recs = records(60);
        let rep = &barcode_pipeline(&recs, "mem", &cfg(Split::None, 40)).unwrap()[0];
        let h0: Vec<_> = rep.barcode.dim(0).collect();
        assert_eq!(h0.len(), 40);
        assert!(h0.iter().all(|b| b.birth == 0.0));
        assert_eq!(h0.iter().filter(|b| b.death.is_infinite()).count(), 1);
        assert_eq!(rep.eps_halvings, 0);
    }

    #[test]
    fn split_groups_and_determinism() {
        let mut recs = records(90);
        recs[0].rank = 4;
        let a = barcode_pipeline(&recs, "mem", &cfg(Split::Rank, 20)).unwrap();
        assert_eq!(a.iter().map(|r| r.group.as_str()).collect::<Vec<_>>(), ["rank=0", "rank=1", "rank=2"]);
        assert_eq!(a, barcode_pipeline(&recs, "mem", &cfg(Split::Rank, 20)).unwrap());
        let p = barcode_pipeline(&recs, "mem", &cfg(Split::Parity, 30)).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn budget_shrinks_automatic_cutoff() {
        let recs = records(60);
        let mut c = cfg(Split::None, 60);
        c.max_dim = 2;
        c.budget = 400;
        let rep = &barcode_pipeline(&recs, "mem", &c).unwrap()[0];
        assert!(rep.eps_halvings > 0 && rep.n_simplices <= 400);
        assert_eq!(rep.barcode.dim(0).count(), 60);
        c.max_eps = 1e6;
        assert!(matches!(barcode_pipeline(&recs, "mem", &c), Err(TdaError::Budget { .. })));
    }

    #[test]
    fn oversampling_is_reported() {
        let recs = records(10);
        assert!(matches!(barcode_pipeline(&recs, "mem", &cfg(Split::None, 11)), Err(TdaError::Sample(_))));
    }
}
