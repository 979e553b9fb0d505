use serde::{Deserialize, Serialize};

use crate::ingest::CurveRecord;

/// The twelve normalized `(a1, a2, a3)` triples in lexicographic order.
pub const TRIPLES: [(i8, i8, i8); 12] = [
    (0, -1, 0),
    (0, -1, 1),
    (0, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (0, 1, 1),
    (1, -1, 0),
    (1, -1, 1),
    (1, 0, 0),
    (1, 0, 1),
    (1, 1, 0),
    (1, 1, 1),
];

pub const MAX_RANK: usize = 4;

/// Curve counts by `(a1, a2, a3)` and rank 0..=4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTally {
    pub rows: Vec<((i8, i8, i8), [u64; MAX_RANK + 1])>,
    /// Records outside the table (non-normalized triple or rank above 4).
    pub skipped: u64,
}

impl RankTally {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c.iter().sum::<u64>()).sum()
    }

    pub fn rank_totals(&self) -> [u64; MAX_RANK + 1] {
        let mut t = [0; MAX_RANK + 1];
        for (_, c) in &self.rows {
            for (acc, v) in t.iter_mut().zip(c) {
                *acc += v;
            }
        }
        t
    }

    pub fn get(&self, triple: (i8, i8, i8), rank: usize) -> u64 {
        self.rows.iter().find(|(t, _)| *t == triple).map(|(_, c)| c[rank]).unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("a1,a2,a3,r0,r1,r2,r3,r4\n");
        for ((a1, a2, a3), c) in &self.rows {
            s.push_str(&format!("{a1},{a2},{a3},{},{},{},{},{}\n", c[0], c[1], c[2], c[3], c[4]));
        }
        s
    }
}

pub fn tally_rank_by_triple<'a>(records: impl IntoIterator<Item = &'a CurveRecord>) -> RankTally {
    let mut rows: Vec<((i8, i8, i8), [u64; MAX_RANK + 1])> = TRIPLES.iter().map(|t| (*t, [0; MAX_RANK + 1])).collect();
    let mut skipped = 0;
    for r in records {
        let slot = r
            .triple()
            .and_then(|t| TRIPLES.iter().position(|x| *x == t))
            .filter(|_| (r.rank as usize) <= MAX_RANK);
        match slot {
            Some(i) => rows[i].1[r.rank as usize] += 1,
            None => skipped += 1,
        }
    }
    RankTally { rows, skipped }
}
