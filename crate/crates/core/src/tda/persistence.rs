//! Persistent homology over the two-element field.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rips::Filtration;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub dim: usize,
    pub birth: f64,
    #[serde(serialize_with = "ser_death", deserialize_with = "de_death")]
    pub death: f64,
}

fn ser_death<S: Serializer>(d: &f64, s: S) -> Result<S::Ok, S::Error> {
    if d.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*d)
    }
}

fn de_death<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Death {
        Finite(f64),
        Text(String),
    }
    match Death::deserialize(d)? {
        Death::Finite(x) => Ok(x),
        Death::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Death::Text(t) => Err(serde::de::Error::custom(format!("bad death {t:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub max_dim: usize,
    pub n_points: usize,
    pub max_eps: f64,
    /// Sorted by (dim, birth, death).
    pub intervals: Vec<Interval>,
}

impl Barcode {
    pub fn dim(&self, k: usize) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |i| i.dim == k)
    }
}

/// Symmetric difference of two increasing index lists.
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn persistence(f: &Filtration) -> Barcode {
    persistence_with(f, false)
}

/// Column reduction from the top dimension down, clearing the columns of
/// simplices already known to be pivots. `keep_zero` retains birth = death
/// pairs in positive dimensions; in dimension 0 they are always kept, so a
/// cloud with coincident points still has one bar per point.
pub fn persistence_with(f: &Filtration, keep_zero: bool) -> Barcode {
    let simplices = &f.simplices;
    let index: HashMap<&[u32], usize> = simplices.iter().enumerate().map(|(i, s)| (s.vertices.as_slice(), i)).collect();
    let top = f.max_dim + 1;
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (i, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(i);
    }
    let mut pivot_row = vec![false; simplices.len()];
    let mut negative = vec![false; simplices.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for k in (1..=top).rev() {
        let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
        for &j in &by_dim[k] {
            if pivot_row[j] {
                continue;
            }
            let verts = &simplices[j].vertices;
            let mut col: Vec<usize> = (0..verts.len())
                .map(|skip| {
                    let face: Vec<u32> = verts.iter().enumerate().filter(|&(t, _)| t != skip).map(|(_, &v)| v).collect();
                    index[face.as_slice()]
                })
                .collect();
            col.sort_unstable();
            while let Some(&low) = col.last() {
                match reduced.get(&low) {
                    Some(other) => col = add_columns(&col, other),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_row[low] = true;
                negative[j] = true;
                pairs.push((low, j));
                reduced.insert(low, col);
            }
        }
    }
    let mut intervals = Vec::new();
    for (b, d) in pairs {
        let (birth, death) = (simplices[b].diameter, simplices[d].diameter);
        if birth < death || keep_zero || simplices[b].dim() == 0 {
            intervals.push(Interval { dim: simplices[b].dim(), birth, death });
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        if s.dim() <= f.max_dim && !pivot_row[i] && !negative[i] {
            intervals.push(Interval { dim: s.dim(), birth: s.diameter, death: f64::INFINITY });
        }
    }
    intervals.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
    Barcode { max_dim: f.max_dim, n_points: f.n_points, max_eps: f.max_eps, intervals }
}

/// Number of bars of each dimension alive at `eps` (birth <= eps < death).
pub fn betti_at(barcode: &Barcode, eps: f64) -> Vec<usize> {
    let mut b = vec![0; barcode.max_dim + 1];
    for i in &barcode.intervals {
        if i.birth <= eps && eps < i.death {
            b[i.dim] += 1;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tda::rips::{build_rips, PointCloud, DEFAULT_SIMPLEX_BUDGET};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square() -> PointCloud {
        PointCloud::new(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], vec![]).unwrap()
    }

    fn barcode(c: &PointCloud, max_dim: usize, eps: f64) -> Barcode {
        persistence(&build_rips(c, max_dim, eps, DEFAULT_SIMPLEX_BUDGET).unwrap())
    }

    /// Rank over GF(2) of a dense 0/1 matrix.
    fn rank_gf2(mut rows: Vec<Vec<bool>>) -> usize {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..ncols {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else { continue };
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r][c] {
                    let pivot = rows[rank].clone();
                    for (x, y) in rows[r].iter_mut().zip(pivot) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Betti numbers of the Rips complex at `eps` from boundary-matrix ranks.
    fn brute_betti(c: &PointCloud, max_dim: usize, eps: f64) -> Vec<usize> {
        let f = build_rips(c, max_dim, eps, DEFAULT_SIMPLEX_BUDGET).unwrap();
        let by_dim: Vec<Vec<&Vec<u32>>> =
            (0..=max_dim + 1).map(|k| f.simplices.iter().filter(|s| s.dim() == k).map(|s| &s.vertices).collect()).collect();
        let boundary_rank = |k: usize| -> usize {
            if k == 0 || k > max_dim + 1 || by_dim[k].is_empty() {
                return 0;
            }
            let rows: Vec<Vec<bool>> = by_dim[k - 1]
                .iter()
                .map(|face| by_dim[k].iter().map(|s| face.iter().all(|v| s.contains(v))).collect())
                .collect();
            rank_gf2(rows)
        };
        (0..=max_dim).map(|k| by_dim[k].len() - boundary_rank(k) - boundary_rank(k + 1)).collect()
    }

    #[test]
    fn square_has_one_loop() {
        let b = barcode(&square(), 1, 2.0);
        let h1: Vec<_> = b.dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, 2f64.sqrt()));
        assert_eq!(betti_at(&b, 1.2), vec![1, 1]);
        assert_eq!(betti_at(&b, 0.0), vec![4, 0]);
        assert_eq!(brute_betti(&square(), 1, 1.2), vec![1, 1]);
        assert_eq!(brute_betti(&square(), 1, 1.5), vec![1, 0]);
    }

    #[test]
    fn isolated_points_merge() {
        let c = PointCloud::new(&[vec![0.0], vec![1.0], vec![3.0], vec![7.0]], vec![]).unwrap();
        let b = barcode(&c, 0, 10.0);
        let h0: Vec<_> = b.dim(0).collect();
        assert_eq!(h0.len(), 4);
        assert!(h0.iter().all(|i| i.birth == 0.0));
        let mut deaths: Vec<f64> = h0.iter().map(|i| i.death).collect();
        deaths.sort_by(f64::total_cmp);
        assert_eq!(deaths, vec![1.0, 2.0, 4.0, f64::INFINITY]);
        let capped = barcode(&c, 0, 1.5);
        assert_eq!(capped.dim(0).filter(|i| i.death.is_infinite()).count(), 3);
    }

    #[test]
    fn coincident_points_keep_their_h0_bars() {
        let c = PointCloud::new(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]], vec![]).unwrap();
        let b = barcode(&c, 1, 5.0);
        let h0: Vec<_> = b.dim(0).collect();
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.iter().filter(|i| i.death == 0.0).count(), 2);
        assert_eq!(b.dim(1).count(), 0);
    }

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        PointCloud::new(&rows, vec![]).unwrap()
    }

    #[test]
    fn matches_dense_rank_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..25 {
            let n = rng.random_range(3..=8);
            let c = random_cloud(&mut rng, n, 2 + trial % 2);
            let max_dim = 1 + trial % 2;
            let b = barcode(&c, max_dim, 2.0);
            for _ in 0..20 {
                let eps = rng.random::<f64>() * 1.5;
                assert_eq!(betti_at(&b, eps), brute_betti(&c, max_dim, eps), "trial {trial} eps {eps}");
            }
        }
    }

    #[test]
    fn permutation_and_stability() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let c = random_cloud(&mut rng, 20, 2);
        let base = barcode(&c, 1, 2.0);
        let mut rows: Vec<Vec<f64>> = (0..20).map(|i| c.point(i).to_vec()).collect();
        rows.reverse();
        let permuted = barcode(&PointCloud::new(&rows, vec![]).unwrap(), 1, 2.0);
        assert_eq!(base.intervals, permuted.intervals);
        let delta = 1e-6;
        for r in rows.iter_mut() {
            for v in r.iter_mut() {
                *v += delta * (rng.random::<f64>() * 2.0 - 1.0) / 2f64.sqrt();
            }
        }
        let moved = barcode(&PointCloud::new(&rows, vec![]).unwrap(), 1, 2.0);
        assert_eq!(base.intervals.len(), moved.intervals.len());
        for (a, b) in base.intervals.iter().zip(&moved.intervals) {
            assert_eq!(a.dim, b.dim);
            assert!((a.birth - b.birth).abs() <= 2.0 * delta);
            assert!(a.death == b.death || (a.death - b.death).abs() <= 2.0 * delta);
        }
    }

    #[test]
    fn h0_count_and_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = random_cloud(&mut rng, 40, 3);
        let b = barcode(&c, 1, 5.0);
        assert_eq!(b.dim(0).count(), 40);
        assert_eq!(b.dim(0).filter(|i| i.death.is_infinite()).count(), 1);
        assert_eq!(betti_at(&b, 10.0), vec![1, 0]);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"inf\""));
        let back: Barcode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }
}
