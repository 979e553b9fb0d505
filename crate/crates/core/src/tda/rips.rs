//! Vietoris-Rips filtrations.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TdaError;

pub const DEFAULT_SIMPLEX_BUDGET: usize = 5_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    /// Row-major, `n * dim` entries.
    pub coords: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<String>,
}

impl PointCloud {
    pub fn new(rows: &[Vec<f64>], labels: Vec<String>) -> Result<PointCloud, TdaError> {
        let Some(first) = rows.first() else {
            return Err(TdaError::Cloud("point cloud is empty".into()));
        };
        let dim = first.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(TdaError::Cloud("rows must share a positive dimension".into()));
        }
        if !labels.is_empty() && labels.len() != dim {
            return Err(TdaError::Cloud(format!("{} labels for dimension {dim}", labels.len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(TdaError::Cloud("non-finite coordinate".into()));
        }
        Ok(PointCloud { coords: rows.concat(), dim, labels })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    /// Strictly increasing vertex indices.
    pub vertices: Vec<u32>,
    pub diameter: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Filtration {
    pub simplices: Vec<Simplex>,
    /// Highest homology dimension the filtration supports; simplices go up to `max_dim + 1`.
    pub max_dim: usize,
    pub max_eps: f64,
    pub n_points: usize,
}

struct Expander<'a> {
    dist: &'a [f64],
    n: usize,
    top: usize,
    max_eps: f64,
    count: &'a AtomicUsize,
    budget: usize,
}

impl Expander<'_> {
    fn d(&self, u: u32, v: u32) -> f64 {
        self.dist[u as usize * self.n + v as usize]
    }

    fn expand(&self, clique: &mut Vec<u32>, diameter: f64, candidates: &[u32], out: &mut Vec<Simplex>) -> Result<(), ()> {
        out.push(Simplex { vertices: clique.clone(), diameter });
        if self.count.fetch_add(1, Ordering::Relaxed) + 1 > self.budget {
            return Err(());
        }
        if clique.len() > self.top {
            return Ok(());
        }
        for (k, &v) in candidates.iter().enumerate() {
            let d = clique.iter().map(|&u| self.d(u, v)).fold(diameter, f64::max);
            if d > self.max_eps {
                continue;
            }
            let rest: Vec<u32> = candidates[k + 1..].iter().copied().filter(|&w| self.d(v, w) <= self.max_eps).collect();
            clique.push(v);
            self.expand(clique, d, &rest, out)?;
            clique.pop();
        }
        Ok(())
    }
}

/// Every simplex of dimension at most `max_dim + 1` whose diameter is at most
/// `max_eps`, sorted by (diameter, dimension, vertices).
pub fn build_rips(cloud: &PointCloud, max_dim: usize, max_eps: f64, budget: usize) -> Result<Filtration, TdaError> {
    if !(max_eps > 0.0) {
        return Err(TdaError::Config(format!("max_eps must be positive, got {max_eps}")));
    }
    let n = cloud.len();
    let mut dist = vec![0.0; n * n];
    dist.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = cloud.distance(i, j);
        }
    });
    let count = AtomicUsize::new(0);
    let ex = Expander { dist: &dist, n, top: max_dim + 1, max_eps, count: &count, budget };
    let parts: Vec<Result<Vec<Simplex>, ()>> = (0..n as u32)
        .into_par_iter()
        .map(|v| {
            let cands: Vec<u32> = (v + 1..n as u32).filter(|&w| dist[v as usize * n + w as usize] <= max_eps).collect();
            let mut out = Vec::new();
            ex.expand(&mut vec![v], 0.0, &cands, &mut out)?;
            Ok(out)
        })
        .collect();
    if parts.iter().any(|p| p.is_err()) {
        return Err(TdaError::Budget { budget, reached: count.load(Ordering::Relaxed) });
    }
    let mut simplices: Vec<Simplex> = parts.into_iter().flat_map(|p| p.unwrap()).collect();
    simplices.par_sort_unstable_by(|a, b| {
        a.diameter
            .total_cmp(&b.diameter)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(Filtration { simplices, max_dim, max_eps, n_points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn square() -> PointCloud {
        PointCloud::new(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], vec![]).unwrap()
    }

    #[test]
    fn two_points() {
        let c = PointCloud::new(&[vec![0.0], vec![1.0]], vec!["x".into()]).unwrap();
        let f = build_rips(&c, 1, 2.0, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let dims: Vec<usize> = f.simplices.iter().map(|s| s.dim()).collect();
        assert_eq!(dims, vec![0, 0, 1]);
        assert_eq!(f.simplices[2].diameter, 1.0);
    }

    #[test]
    fn unit_square() {
        let f = build_rips(&square(), 1, 2.0, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let count = |d| f.simplices.iter().filter(|s| s.dim() == d).count();
        assert_eq!((count(0), count(1), count(2), count(3)), (4, 6, 4, 0));
        let r2 = 2f64.sqrt();
        assert_eq!(f.simplices.iter().filter(|s| s.dim() == 1 && s.diameter == 1.0).count(), 4);
        assert_eq!(f.simplices.iter().filter(|s| s.dim() == 1 && s.diameter == r2).count(), 2);
        assert!(f.simplices.iter().filter(|s| s.dim() == 2).all(|s| s.diameter == r2));
        let f3 = build_rips(&square(), 2, 2.0, DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert_eq!(f3.simplices.iter().filter(|s| s.dim() == 3).count(), 1);
    }

    #[test]
    fn below_min_distance() {
        let f = build_rips(&square(), 2, 0.5, DEFAULT_SIMPLEX_BUDGET).unwrap();
        assert!(f.simplices.iter().all(|s| s.dim() == 0));
    }

    #[test]
    fn budget_reported() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 * 0.01]).collect();
        let c = PointCloud::new(&pts, vec![]).unwrap();
        match build_rips(&c, 3, 10.0, 1000) {
            Err(TdaError::Budget { budget: 1000, reached }) => assert!(reached > 1000),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ordering_invariants() {
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 1.7).sin(), (i as f64 * 0.9).cos()]).collect();
        let c = PointCloud::new(&pts, vec![]).unwrap();
        let f = build_rips(&c, 2, 1.5, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let mut seen = std::collections::HashSet::new();
        for w in f.simplices.windows(2) {
            assert!(w[0].diameter <= w[1].diameter);
        }
        for s in &f.simplices {
            let diam = s
                .vertices
                .iter()
                .flat_map(|&a| s.vertices.iter().map(move |&b| (a, b)))
                .map(|(a, b)| c.distance(a as usize, b as usize))
                .fold(0.0, f64::max);
            assert_eq!(diam, s.diameter);
            if s.vertices.len() > 1 {
                for skip in 0..s.vertices.len() {
                    let mut face = s.vertices.clone();
                    face.remove(skip);
                    assert!(seen.contains(&face), "face after coface");
                }
            }
            seen.insert(s.vertices.clone());
        }
    }
}
