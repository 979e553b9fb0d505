use std::path::PathBuf;

use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::CurveRecord;
use super::IngestError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignFilter {
    Negative,
    Zero,
    Positive,
}

impl SignFilter {
    fn matches(&self, n: &num_bigint::BigInt) -> bool {
        match self {
            SignFilter::Negative => n.is_negative(),
            SignFilter::Zero => n.sign() == num_bigint::Sign::NoSign,
            SignFilter::Positive => n.is_positive(),
        }
    }
}

/// Row predicate of a view. Unset fields accept everything.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filter {
    pub rank: Option<u8>,
    /// `(modulus, residue)` on the conductor.
    pub conductor_residue: Option<(u64, u64)>,
    pub a4_sign: Option<SignFilter>,
    pub a6_sign: Option<SignFilter>,
}

impl Filter {
    pub fn rank(r: u8) -> Self {
        Filter { rank: Some(r), ..Default::default() }
    }

    pub fn matches(&self, r: &CurveRecord) -> bool {
        self.rank.is_none_or(|k| r.rank == k)
            && self.conductor_residue.is_none_or(|(m, res)| m > 0 && r.conductor % m == res % m)
            && self.a4_sign.is_none_or(|s| s.matches(&r.curve.a4))
            && self.a6_sign.is_none_or(|s| s.matches(&r.curve.a6))
    }
}

/// A filtered window onto a loaded table. Indices are strictly increasing.
#[derive(Clone, Debug)]
pub struct DatasetView<'a> {
    pub source: PathBuf,
    pub records: &'a [CurveRecord],
    pub row_indices: Vec<usize>,
    pub seed: u64,
    pub filters: Filter,
}

impl<'a> DatasetView<'a> {
    pub fn new(source: impl Into<PathBuf>, records: &'a [CurveRecord], filters: Filter, seed: u64) -> Self {
        let row_indices = (0..records.len()).filter(|&i| filters.matches(&records[i])).collect();
        DatasetView { source: source.into(), records, row_indices, seed, filters }
    }

    pub fn len(&self) -> usize {
        self.row_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a CurveRecord> + '_ {
        self.row_indices.iter().map(move |&i| &self.records[i])
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<CurveRecord>, IngestError> {
        sample(self, n, seed)
    }
}

/// Uniform sample without replacement, in a seed-determined order.
pub fn sample_indices(len: usize, n: usize, seed: u64) -> Result<Vec<usize>, IngestError> {
    if n > len {
        return Err(IngestError::Size { requested: n, available: len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, len, n).into_vec())
}

pub fn sample(view: &DatasetView<'_>, n: usize, seed: u64) -> Result<Vec<CurveRecord>, IngestError> {
    let picks = sample_indices(view.len(), n, seed)?;
    Ok(picks.into_iter().map(|k| view.records[view.row_indices[k]].clone()).collect())
}
