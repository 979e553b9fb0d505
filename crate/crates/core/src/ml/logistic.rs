//! Multinomial logistic regression by damped Newton steps.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MlError;

pub const RIDGE: f64 = 1e-6;
pub const GRAD_TOL: f64 = 1e-8;
pub const MAX_NEWTON: usize = 200;
/// Rows per parallel work unit; fixed so sums are reproducible.
const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Class indices seen in training; `weights[k]` scores `classes[k + 1]`
    /// against the reference `classes[0]`.
    pub classes: Vec<usize>,
    /// Per non-reference class: intercept then one slope per standardized feature.
    pub weights: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

fn standardize(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let m = x[0].len();
    let mean: Vec<f64> = (0..m).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let scale: Vec<f64> = (0..m)
        .map(|j| {
            let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 0.0 { sd } else { 1.0 }
        })
        .collect();
    (mean, scale)
}

/// Softmax probabilities over all classes, reference first.
fn probs(w: &[f64], k: usize, z: &[f64], out: &mut [f64]) {
    let p = z.len();
    out[0] = 0.0;
    for c in 1..k {
        out[c] = w[(c - 1) * p..c * p].iter().zip(z).map(|(a, b)| a * b).sum();
    }
    let mx = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in out.iter_mut() {
        *v = (*v - mx).exp();
        s += *v;
    }
    for v in out.iter_mut() {
        *v /= s;
    }
}

struct Problem {
    z: Vec<Vec<f64>>,
    y: Vec<usize>,
    k: usize,
}

impl Problem {
    fn dim(&self) -> usize {
        (self.k - 1) * self.z[0].len()
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let n = self.z.len() as f64;
        let parts: Vec<f64> = self
            .z
            .par_chunks(CHUNK)
            .zip(self.y.par_chunks(CHUNK))
            .map(|(zs, ys)| {
                let mut pr = vec![0.0; self.k];
                zs.iter()
                    .zip(ys)
                    .map(|(z, &y)| {
                        probs(w, self.k, z, &mut pr);
                        -pr[y].max(f64::MIN_POSITIVE).ln()
                    })
                    .sum()
            })
            .collect();
        parts.iter().sum::<f64>() / n + 0.5 * RIDGE * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient_hessian(&self, w: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (k, p, d) = (self.k, self.z[0].len(), self.dim());
        let n = self.z.len() as f64;
        let parts: Vec<(Vec<f64>, Vec<f64>)> = self
            .z
            .par_chunks(CHUNK)
            .zip(self.y.par_chunks(CHUNK))
            .map(|(zs, ys)| {
                let (mut g, mut h, mut pr) = (vec![0.0; d], vec![0.0; d * d], vec![0.0; k]);
                for (z, &y) in zs.iter().zip(ys) {
                    probs(w, k, z, &mut pr);
                    for a in 1..k {
                        let ra = pr[a] - f64::from(u8::from(y == a));
                        for i in 0..p {
                            g[(a - 1) * p + i] += ra * z[i];
                        }
                        for b in 1..k {
                            let c = pr[a] * (f64::from(u8::from(a == b)) - pr[b]);
                            for i in 0..p {
                                let row = ((a - 1) * p + i) * d + (b - 1) * p;
                                let ci = c * z[i];
                                for j in 0..p {
                                    h[row + j] += ci * z[j];
                                }
                            }
                        }
                    }
                }
                (g, h)
            })
            .collect();
        let (mut g, mut h) = (vec![0.0; d], vec![0.0; d * d]);
        for (pg, ph) in parts {
            g.iter_mut().zip(pg).for_each(|(a, b)| *a += b);
            h.iter_mut().zip(ph).for_each(|(a, b)| *a += b);
        }
        let g = DVector::from_iterator(d, g.iter().zip(w).map(|(gi, wi)| gi / n + RIDGE * wi));
        let mut h = DMatrix::from_row_slice(d, d, &h) / n;
        for i in 0..d {
            h[(i, i)] += RIDGE;
        }
        (g, h)
    }
}

/// Fits class probabilities for labels `y`; only the classes present in `y` are modelled.
pub fn logistic_fit(x: &[Vec<f64>], y: &[usize]) -> Result<LogisticModel, MlError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(MlError::Size(format!("{} rows vs {} labels", x.len(), y.len())));
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(MlError::Degenerate("logistic regression needs at least two classes".into()));
    }
    let (mean, scale) = standardize(x);
    let z: Vec<Vec<f64>> = x
        .iter()
        .map(|r| std::iter::once(1.0).chain(r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s)).collect())
        .collect();
    let yi: Vec<usize> = y.iter().map(|c| classes.binary_search(c).unwrap()).collect();
    let prob = Problem { z, y: yi, k: classes.len() };
    let mut w = vec![0.0; prob.dim()];
    let mut f = prob.loss(&w);
    let mut grad_norm = f64::INFINITY;
    for it in 0..MAX_NEWTON {
        let (g, h) = prob.gradient_hessian(&w);
        grad_norm = g.norm();
        if grad_norm < GRAD_TOL {
            return Ok(finish(classes, w, mean, scale, it, grad_norm, prob.z[0].len()));
        }
        let step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => g.clone(),
        };
        let slope = -g.dot(&step);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = w.iter().zip(step.iter()).map(|(a, b)| a - t * b).collect();
            let fc = prob.loss(&cand);
            if fc <= f + 1e-4 * t * slope || t < 1e-12 {
                if fc <= f {
                    w = cand;
                    f = fc;
                }
                break;
            }
            t *= 0.5;
        }
        if t < 1e-12 {
            break;
        }
    }
    Err(MlError::NoConvergence { iterations: MAX_NEWTON, grad_norm })
}

fn finish(classes: Vec<usize>, w: Vec<f64>, mean: Vec<f64>, scale: Vec<f64>, iterations: usize, grad_norm: f64, p: usize) -> LogisticModel {
    let weights = w.chunks(p).map(|c| c.to_vec()).collect();
    LogisticModel { classes, weights, mean, scale, iterations, grad_norm }
}

impl LogisticModel {
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let z: Vec<f64> =
            std::iter::once(1.0).chain(row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s)).collect();
        let flat: Vec<f64> = self.weights.concat();
        let mut out = vec![0.0; self.classes.len()];
        probs(&flat, self.classes.len(), &z, &mut out);
        out
    }

    /// Most probable class; ties go to the smaller class index.
    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        x.iter()
            .map(|r| {
                let p = self.predict_proba_row(r);
                let best = (0..p.len()).fold(0, |b, i| if p[i] > p[b] { i } else { b });
                self.classes[best]
            })
            .collect()
    }

    /// Sum over non-reference classes of absolute standardized slopes.
    pub fn slope_magnitudes(&self) -> Vec<f64> {
        let m = self.mean.len();
        (0..m).map(|j| self.weights.iter().map(|w| w[j + 1].abs()).sum()).collect()
    }
}
