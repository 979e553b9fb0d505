//! Gradient-boosted regression trees with second-order (Newton) leaf weights
//! and exact greedy split search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MlError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_child_weight: f64,
    pub subsample: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum gain for a split.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 200,
            max_depth: 6,
            learning_rate: 0.1,
            min_child_weight: 1.0,
            subsample: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            seed: 0,
        }
    }
}

impl GbtParams {
    fn check(&self) -> Result<(), MlError> {
        let ok = self.n_trees >= 1
            && self.learning_rate > 0.0
            && self.learning_rate <= 1.0
            && self.min_child_weight >= 0.0
            && self.subsample > 0.0
            && self.subsample <= 1.0
            && self.lambda >= 0.0
            && self.gamma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(MlError::Config(format!("boosting parameters out of range: {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Squared,
    Softmax,
}

#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Real(&'a [f64]),
    Class(&'a [usize]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { weight: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    pub fn is_single_leaf(&self) -> bool {
        self.nodes.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: GbtParams,
    pub loss: Loss,
    /// Class indices seen in training (softmax only); score column `k` belongs to `classes[k]`.
    pub classes: Vec<usize>,
    pub base_score: Vec<f64>,
    /// One group per boosting round, one tree per score column.
    pub rounds: Vec<Vec<Tree>>,
    pub n_features: usize,
    /// Total split gain per feature.
    pub gain: Vec<f64>,
    /// Training loss after each round.
    pub train_loss: Vec<f64>,
}

struct Candidate {
    gain: f64,
    threshold: f64,
    gl: f64,
    hl: f64,
}

struct Grower<'a> {
    cols: &'a [Vec<f64>],
    sorted: &'a [Vec<u32>],
    p: &'a GbtParams,
}

impl Grower<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.p.lambda)
    }

    fn leaf(&self, g: f64, h: f64) -> Node {
        Node::Leaf { weight: -self.p.learning_rate * g / (h + self.p.lambda) }
    }

    /// Grows one tree level by level; `node_of[i]` is -1 for rows outside the bag.
    fn grow(&self, g: &[f64], h: &[f64], mut node_of: Vec<i32>, gain: &mut [f64]) -> Tree {
        let (mut g0, mut h0) = (0.0, 0.0);
        for i in 0..g.len() {
            if node_of[i] >= 0 {
                g0 += g[i];
                h0 += h[i];
            }
        }
        let mut nodes = vec![Node::Leaf { weight: 0.0 }];
        let mut stats = vec![(g0, h0)];
        let mut frontier = vec![0usize];
        for _ in 0..self.p.max_depth {
            if frontier.is_empty() {
                break;
            }
            let mut pos_of = vec![-1i32; nodes.len()];
            for (k, &nid) in frontier.iter().enumerate() {
                pos_of[nid] = k as i32;
            }
            let per_feature: Vec<Vec<Option<Candidate>>> = (0..self.cols.len())
                .into_par_iter()
                .map(|f| self.scan(f, g, h, &node_of, &pos_of, &frontier, &stats))
                .collect();
            let mut next = Vec::new();
            let mut splits: Vec<(usize, usize, f64, usize, usize)> = Vec::new();
            for (k, &nid) in frontier.iter().enumerate() {
                let mut best: Option<(usize, &Candidate)> = None;
                for (f, cands) in per_feature.iter().enumerate() {
                    if let Some(c) = &cands[k] {
                        if best.is_none_or(|(_, b)| c.gain > b.gain) {
                            best = Some((f, c));
                        }
                    }
                }
                let (gn, hn) = stats[nid];
                match best {
                    Some((f, c)) => {
                        let (l, r) = (nodes.len(), nodes.len() + 1);
                        nodes.push(Node::Leaf { weight: 0.0 });
                        nodes.push(Node::Leaf { weight: 0.0 });
                        stats.push((c.gl, c.hl));
                        stats.push((gn - c.gl, hn - c.hl));
                        nodes[nid] = Node::Split { feature: f, threshold: c.threshold, left: l, right: r };
                        gain[f] += c.gain;
                        splits.push((nid, f, c.threshold, l, r));
                        next.push(l);
                        next.push(r);
                    }
                    None => nodes[nid] = self.leaf(gn, hn),
                }
            }
            if splits.is_empty() {
                frontier.clear();
                break;
            }
            let mut route = vec![None; nodes.len()];
            for &(nid, f, t, l, r) in &splits {
                route[nid] = Some((f, t, l, r));
            }
            for (i, slot) in node_of.iter_mut().enumerate() {
                if *slot < 0 {
                    continue;
                }
                if let Some((f, t, l, r)) = route[*slot as usize] {
                    *slot = if self.cols[f][i] <= t { l as i32 } else { r as i32 };
                }
            }
            frontier = next;
        }
        for nid in frontier {
            let (gn, hn) = stats[nid];
            nodes[nid] = self.leaf(gn, hn);
        }
        Tree { nodes }
    }

    /// Best split of every frontier node along feature `f`.
    #[allow(clippy::too_many_arguments)]
    fn scan(
        &self,
        f: usize,
        g: &[f64],
        h: &[f64],
        node_of: &[i32],
        pos_of: &[i32],
        frontier: &[usize],
        stats: &[(f64, f64)],
    ) -> Vec<Option<Candidate>> {
        let k = frontier.len();
        let mut gl = vec![0.0; k];
        let mut hl = vec![0.0; k];
        let mut last = vec![f64::NAN; k];
        let mut best: Vec<Option<Candidate>> = (0..k).map(|_| None).collect();
        let col = &self.cols[f];
        let mcw = self.p.min_child_weight;
        for &i in &self.sorted[f] {
            let i = i as usize;
            let nid = node_of[i];
            if nid < 0 {
                continue;
            }
            let pos = pos_of[nid as usize];
            if pos < 0 {
                continue;
            }
            let pos = pos as usize;
            let x = col[i];
            if x > last[pos] {
                let (gt, ht) = stats[frontier[pos]];
                let (gr, hr) = (gt - gl[pos], ht - hl[pos]);
                if hl[pos] >= mcw && hr >= mcw {
                    let gain = 0.5 * (self.score(gl[pos], hl[pos]) + self.score(gr, hr) - self.score(gt, ht)) - self.p.gamma;
                    if gain > 0.0 && best[pos].as_ref().is_none_or(|b| gain > b.gain) {
                        let v = last[pos];
                        let mid = v + (x - v) / 2.0;
                        let threshold = if mid < x { mid } else { v };
                        best[pos] = Some(Candidate { gain, threshold, gl: gl[pos], hl: hl[pos] });
                    }
                }
            }
            gl[pos] += g[i];
            hl[pos] += h[i];
            last[pos] = x;
        }
        best
    }
}

fn softmax(scores: &[f64], out: &mut [f64]) {
    let mx = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (o, v) in out.iter_mut().zip(scores) {
        *o = (v - mx).exp();
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
}

pub fn gbt_fit(x: &[Vec<f64>], target: Target<'_>, params: &GbtParams) -> Result<GbtModel, MlError> {
    params.check()?;
    let n = x.len();
    if n == 0 {
        return Err(MlError::Size("no training rows".into()));
    }
    let m = x[0].len();
    if x.iter().any(|r| r.len() != m) || x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MlError::Config("features must be finite with a common width".into()));
    }
    let cols: Vec<Vec<f64>> = (0..m).map(|j| x.iter().map(|r| r[j]).collect()).collect();
    let sorted: Vec<Vec<u32>> = cols
        .par_iter()
        .map(|c| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
            idx
        })
        .collect();
    let (loss, classes, yk): (Loss, Vec<usize>, Vec<usize>) = match target {
        Target::Real(y) => {
            if y.len() != n || y.iter().any(|v| !v.is_finite()) {
                return Err(MlError::Size("target length or values invalid".into()));
            }
            (Loss::Squared, Vec::new(), Vec::new())
        }
        Target::Class(y) => {
            if y.len() != n {
                return Err(MlError::Size("target length mismatch".into()));
            }
            let mut cl = y.to_vec();
            cl.sort_unstable();
            cl.dedup();
            let yk = y.iter().map(|c| cl.binary_search(c).unwrap()).collect();
            (Loss::Softmax, cl, yk)
        }
    };
    let k = if loss == Loss::Squared { 1 } else { classes.len() };
    let base_score = match target {
        Target::Real(y) => vec![y.iter().sum::<f64>() / n as f64],
        Target::Class(_) => vec![0.0; k],
    };
    let mut scores: Vec<f64> = (0..n).flat_map(|_| base_score.iter().copied()).collect();
    let grower = Grower { cols: &cols, sorted: &sorted, p: params };
    let mut gain = vec![0.0; m];
    let mut rounds = Vec::with_capacity(params.n_trees);
    let mut train_loss = Vec::with_capacity(params.n_trees);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut prob = vec![0.0; n * k];
    for _ in 0..params.n_trees {
        let in_bag: Vec<i32> = (0..n)
            .map(|_| if params.subsample >= 1.0 || rng.random::<f64>() < params.subsample { 0 } else { -1 })
            .collect();
        let grads: Vec<(Vec<f64>, Vec<f64>)> = match target {
            Target::Real(y) => vec![((0..n).map(|i| scores[i] - y[i]).collect(), vec![1.0; n])],
            Target::Class(_) => {
                for i in 0..n {
                    softmax(&scores[i * k..(i + 1) * k], &mut prob[i * k..(i + 1) * k]);
                }
                (0..k)
                    .map(|c| {
                        let g = (0..n).map(|i| prob[i * k + c] - f64::from(u8::from(yk[i] == c))).collect();
                        let h = (0..n).map(|i| (prob[i * k + c] * (1.0 - prob[i * k + c])).max(1e-16)).collect();
                        (g, h)
                    })
                    .collect()
            }
        };
        let grown: Vec<(Tree, Vec<f64>)> = grads
            .par_iter()
            .map(|(g, h)| {
                let mut ledger = vec![0.0; m];
                let t = grower.grow(g, h, in_bag.clone(), &mut ledger);
                (t, ledger)
            })
            .collect();
        let mut group = Vec::with_capacity(k);
        for (c, (tree, ledger)) in grown.into_iter().enumerate() {
            for (a, b) in gain.iter_mut().zip(ledger) {
                *a += b;
            }
            for i in 0..n {
                scores[i * k + c] += tree.predict_row(&x[i]);
            }
            group.push(tree);
        }
        rounds.push(group);
        train_loss.push(match target {
            Target::Real(y) => (0..n).map(|i| 0.5 * (y[i] - scores[i]).powi(2)).sum::<f64>() / n as f64,
            Target::Class(_) => {
                let mut pr = vec![0.0; k];
                (0..n)
                    .map(|i| {
                        softmax(&scores[i * k..(i + 1) * k], &mut pr);
                        -pr[yk[i]].max(f64::MIN_POSITIVE).ln()
                    })
                    .sum::<f64>()
                    / n as f64
            }
        });
    }
    Ok(GbtModel { params: *params, loss, classes, base_score, rounds, n_features: m, gain, train_loss })
}

impl GbtModel {
    pub fn raw_scores(&self, row: &[f64]) -> Vec<f64> {
        let mut s = self.base_score.clone();
        for group in &self.rounds {
            for (v, t) in s.iter_mut().zip(group) {
                *v += t.predict_row(row);
            }
        }
        s
    }

    pub fn predict_real(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.par_iter().map(|r| self.raw_scores(r)[0]).collect()
    }

    /// Highest-scoring class; ties go to the smaller class.
    pub fn predict_class(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.par_iter()
            .map(|r| {
                let s = self.raw_scores(r);
                let best = (0..s.len()).fold(0, |b, i| if s[i] > s[b] { i } else { b });
                self.classes[best]
            })
            .collect()
    }

    /// Gain shares summing to 1, or all zero when no split was made.
    pub fn importances(&self) -> Vec<f64> {
        normalize(&self.gain)
    }
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter().map(|x| x / s).collect()
    } else {
        vec![0.0; v.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::logistic::logistic_fit;

    fn small(n_trees: usize, depth: usize) -> GbtParams {
        GbtParams { n_trees, max_depth: depth, ..Default::default() }
    }

    fn xor(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
            x.push(vec![a * 4.0 + rng.random::<f64>() - 0.5, b * 4.0 + rng.random::<f64>() - 0.5]);
            y.push((i % 2) ^ ((i / 2) % 2));
        }
        (x, y)
    }

    #[test]
    fn constant_target_gives_single_leaves() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let y = vec![3.5; 50];
        let m = gbt_fit(&x, Target::Real(&y), &small(10, 3)).unwrap();
        assert!(m.rounds.iter().flatten().all(|t| t.is_single_leaf()));
        assert!(m.predict_real(&x).iter().all(|&p| p == 3.5));
        assert_eq!(m.importances(), vec![0.0, 0.0]);
    }

    #[test]
    fn xor_needs_trees() {
        let (x, y) = xor(1, 400);
        let (xt, yt) = xor(2, 400);
        let m = gbt_fit(&x, Target::Class(&y), &small(30, 2)).unwrap();
        let acc = |p: Vec<usize>| p.iter().zip(&yt).filter(|(a, b)| a == b).count() as f64 / yt.len() as f64;
        assert!(acc(m.predict_class(&xt)) >= 0.95);
        let lin = logistic_fit(&x, &y).unwrap();
        assert!((acc(lin.predict(&xt)) - 0.5).abs() < 0.15);
    }

    #[test]
    fn informative_feature_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<Vec<f64>> = (0..1000).map(|_| vec![rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>()]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * r[0]).collect();
        let m = gbt_fit(&x, Target::Real(&y), &small(50, 4)).unwrap();
        let imp = m.importances();
        assert!(imp[0] > 0.9, "{imp:?}");
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.rounds.iter().flatten().all(|t| t.depth() <= 4));
        assert!(m.gain.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn training_loss_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y: Vec<f64> = x.iter().map(|r| (6.0 * r[0]).sin() + r[1]).collect();
        let m = gbt_fit(&x, Target::Real(&y), &small(40, 3)).unwrap();
        assert!(m.train_loss.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn deterministic_with_subsampling() {
        let (x, y) = xor(6, 200);
        let p = GbtParams { subsample: 0.7, seed: 9, ..small(15, 3) };
        let a = gbt_fit(&x, Target::Class(&y), &p).unwrap();
        let b = gbt_fit(&x, Target::Class(&y), &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_params() {
        let p = GbtParams { learning_rate: 0.0, ..Default::default() };
        assert!(gbt_fit(&[vec![1.0]], Target::Real(&[1.0]), &p).is_err());
    }
}
