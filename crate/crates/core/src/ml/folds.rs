use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MlError;

/// `(train, test)` index pairs. Indices are shuffled by `seed` and cut into
/// `k` contiguous test folds whose sizes differ by at most one; both lists
/// come back sorted.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>, MlError> {
    if k < 2 {
        return Err(MlError::Config(format!("k must be at least 2, got {k}")));
    }
    if n < k {
        return Err(MlError::Size(format!("{n} rows cannot fill {k} folds")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = n / k + usize::from(f < n % k);
        let mut test = idx[start..start + len].to_vec();
        let mut train: Vec<usize> = idx[..start].iter().chain(&idx[start + len..]).copied().collect();
        test.sort_unstable();
        train.sort_unstable();
        out.push((train, test));
        start += len;
    }
    Ok(out)
}
