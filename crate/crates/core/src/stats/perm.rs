//! Two-sample permutation tests.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;

/// Below this many permutations the smallest attainable p-value exceeds 0.01.
pub const MIN_RECOMMENDED_PERMUTATIONS: usize = 99;
/// Pooled sizes up to this use a precomputed distance matrix.
const MATRIX_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `2 E|X-Y| - E|X-X'| - E|Y-Y'|` with Euclidean distance.
    EnergyDistance,
    /// Absolute difference of the means of the first coordinate.
    MeanDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub statistic: Statistic,
    pub observed: f64,
    pub p_value: f64,
    pub n_perm: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub seed: u64,
    pub warning: Option<String>,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

enum Distances<'a> {
    Matrix { n: usize, d: Vec<f64> },
    Lazy(&'a [&'a [f64]]),
}

impl Distances<'_> {
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Distances::Matrix { n, d } => d[i * n + j],
            Distances::Lazy(p) => euclid(p[i], p[j]),
        }
    }
}

/// Energy distance between the points labelled `true` and those labelled `false`.
fn energy(dist: &Distances<'_>, in_a: &[bool]) -> f64 {
    let n = in_a.len();
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist.get(i, j);
            match (in_a[i], in_a[j]) {
                (true, true) => aa += d,
                (false, false) => bb += d,
                _ => ab += d,
            }
        }
    }
    let na = in_a.iter().filter(|&&x| x).count() as f64;
    let nb = n as f64 - na;
    2.0 * ab / (na * nb) - 2.0 * aa / (na * na) - 2.0 * bb / (nb * nb)
}

fn mean_difference(points: &[&[f64]], in_a: &[bool]) -> f64 {
    let (mut sa, mut sb, mut na, mut nb) = (0.0, 0.0, 0usize, 0usize);
    for (p, &a) in points.iter().zip(in_a) {
        if a {
            sa += p[0];
            na += 1;
        } else {
            sb += p[0];
            nb += 1;
        }
    }
    (sa / na as f64 - sb / nb as f64).abs()
}

fn permutation_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Permutation p-value `(1 + #{T_perm >= T_obs}) / (1 + n_perm)`; each
/// replicate draws its own labelling from a seed derived from `seed` and its index.
pub fn permutation_test(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    statistic: Statistic,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    let dim = a[0].len();
    if dim == 0 || a.iter().chain(b).any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(StatsError::Config("samples must be finite points of one common dimension".into()));
    }
    if n_perm == 0 {
        return Err(StatsError::Config("n_perm must be positive".into()));
    }
    let points: Vec<&[f64]> = a.iter().chain(b).map(|p| p.as_slice()).collect();
    let n = points.len();
    let dist = if statistic == Statistic::EnergyDistance && n <= MATRIX_LIMIT {
        let mut d = vec![0.0; n * n];
        d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = euclid(points[i], points[j]);
            }
        });
        Distances::Matrix { n, d }
    } else {
        Distances::Lazy(&points)
    };
    let stat = |labels: &[bool]| match statistic {
        Statistic::EnergyDistance => energy(&dist, labels),
        Statistic::MeanDifference => mean_difference(&points, labels),
    };
    let labels: Vec<bool> = (0..n).map(|i| i < a.len()).collect();
    let observed = stat(&labels);
    // Relative slack so permutations reproducing the observed split count as ties.
    let threshold = observed - 1e-12 * observed.abs();
    let exceed = (0..n_perm)
        .into_par_iter()
        .map_init(
            || labels.clone(),
            |lab, k| {
                let mut rng = ChaCha8Rng::seed_from_u64(permutation_seed(seed, k));
                lab.copy_from_slice(&labels);
                lab.shuffle(&mut rng);
                (stat(lab) >= threshold) as usize
            },
        )
        .sum::<usize>();
    let warning = (n_perm < MIN_RECOMMENDED_PERMUTATIONS).then(|| {
        format!("n_perm = {n_perm} < {MIN_RECOMMENDED_PERMUTATIONS}: p-values cannot reach 0.01")
    });
    Ok(PermutationResult {
        statistic,
        observed,
        p_value: (1 + exceed) as f64 / (1 + n_perm) as f64,
        n_perm,
        n_a: a.len(),
        n_b: b.len(),
        seed,
        warning,
    })
}
