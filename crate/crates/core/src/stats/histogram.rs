use serde::{Deserialize, Serialize};

use super::transform::{symlog, symlog_inv};
use super::StatsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    Linear,
    Log,
    /// Linear on (-1, 1), logarithmic outside; symmetric about 0.
    Symlog,
}

impl std::str::FromStr for Binning {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Binning::Linear),
            "log" => Ok(Binning::Log),
            "symlog" => Ok(Binning::Symlog),
            _ => Err(StatsError::Config(format!("unknown binning {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    /// `masses[i][j]` for x bin `i` and y bin `j`.
    pub masses: Vec<Vec<f64>>,
}

/// Uniform bins in a transformed coordinate.
struct Axis {
    binning: Binning,
    lo: f64,
    width: f64,
    nbins: usize,
}

impl Axis {
    fn fit(values: &[f64], binning: Binning, nbins: usize) -> Result<Axis, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if nbins == 0 {
            return Err(StatsError::Config("nbins must be at least 1".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Config("non-finite value in histogram input".into()));
        }
        if binning == Binning::Log && values.iter().any(|&v| v <= 0.0) {
            return Err(StatsError::Config("log binning needs positive values".into()));
        }
        let t: Vec<f64> = values.iter().map(|&v| forward(binning, v)).collect();
        let (mut lo, mut hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if binning == Binning::Symlog {
            let m = lo.abs().max(hi.abs());
            lo = -m;
            hi = m;
        }
        if hi <= lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Ok(Axis { binning, lo, width: (hi - lo) / nbins as f64, nbins })
    }

    fn index(&self, v: f64) -> usize {
        let t = forward(self.binning, v);
        if self.binning == Binning::Symlog && t < 0.0 {
            // mirror so that symmetric data gives symmetric masses
            return self.nbins - 1 - self.raw_index(-t);
        }
        self.raw_index(t)
    }

    fn raw_index(&self, t: f64) -> usize {
        let k = ((t - self.lo) / self.width).floor();
        (k.max(0.0) as usize).min(self.nbins - 1)
    }

    fn edges(&self) -> Vec<f64> {
        (0..=self.nbins).map(|i| inverse(self.binning, self.lo + i as f64 * self.width)).collect()
    }
}

fn forward(b: Binning, v: f64) -> f64 {
    match b {
        Binning::Linear => v,
        Binning::Log => v.log10(),
        Binning::Symlog => symlog(v),
    }
}

fn inverse(b: Binning, t: f64) -> f64 {
    match b {
        Binning::Linear => t,
        Binning::Log => 10f64.powf(t),
        Binning::Symlog => symlog_inv(t),
    }
}

/// Probability masses over `nbins` bins; odd `nbins` keeps 0 inside the
/// middle symlog bin.
pub fn histogram(values: &[f64], binning: Binning, nbins: usize) -> Result<Histogram, StatsError> {
    let axis = Axis::fit(values, binning, nbins)?;
    let mut counts = vec![0u64; nbins];
    for &v in values {
        counts[axis.index(v)] += 1;
    }
    let n = values.len() as f64;
    Ok(Histogram { edges: axis.edges(), masses: counts.iter().map(|&c| c as f64 / n).collect() })
}

pub fn joint_histogram(x: &[f64], y: &[f64], binning: Binning, nbins: usize) -> Result<JointHistogram, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::Config(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let ax = Axis::fit(x, binning, nbins)?;
    let ay = Axis::fit(y, binning, nbins)?;
    let mut counts = vec![vec![0u64; nbins]; nbins];
    for (&u, &v) in x.iter().zip(y) {
        counts[ax.index(u)][ay.index(v)] += 1;
    }
    let n = x.len() as f64;
    Ok(JointHistogram {
        x_edges: ax.edges(),
        y_edges: ay.edges(),
        masses: counts.iter().map(|row| row.iter().map(|&c| c as f64 / n).collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn single_value() {
        let h = histogram(&[3.0, 3.0], Binning::Linear, 5).unwrap();
        assert_eq!(h.masses.iter().filter(|&&m| m == 1.0).count(), 1);
        assert!(matches!(histogram(&[], Binning::Linear, 5), Err(StatsError::Empty)));
    }

    #[test]
    fn symmetric_symlog() {
        let vals: Vec<f64> = [0.0, 0.5, 1.0, 7.0, 300.0, 1e6, 2.0].iter().flat_map(|&v| [v, -v]).collect();
        for nbins in [7, 8, 21] {
            let h = histogram(&vals, Binning::Symlog, nbins).unwrap();
            let n = h.masses.len();
            for i in 0..n {
                let (a, b) = (h.masses[i], h.masses[n - 1 - i]);
                // zeros sit on the centre edge when nbins is even
                if nbins % 2 == 1 || (i != n / 2 && i != n / 2 - 1) {
                    assert_eq!(a, b, "nbins {nbins} bin {i}");
                }
            }
            assert!((h.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (e, f) in h.edges.iter().zip(h.edges.iter().rev()) {
                assert!((e + f).abs() <= 1e-9 * e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn uniform_sample_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vals: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let h = histogram(&vals, Binning::Linear, 20).unwrap();
        let expected = vals.len() as f64 / 20.0;
        let chi2: f64 = h.masses.iter().map(|m| (m * vals.len() as f64 - expected).powi(2) / expected).sum();
        let crit = ChiSquared::new(19.0).unwrap().inverse_cdf(0.999);
        assert!(chi2 < crit, "{chi2} vs {crit}");
    }

    #[test]
    fn log_bins_and_joint_mass() {
        let h = histogram(&[1.0, 10.0, 100.0, 1000.0], Binning::Log, 3).unwrap();
        assert!((h.edges[1] - 10.0).abs() < 1e-9);
        assert!(histogram(&[0.0, 1.0], Binning::Log, 3).is_err());
        let j = joint_histogram(&[1.0, -2.0, 3.0], &[0.0, 5.0, -5.0], Binning::Symlog, 5).unwrap();
        let total: f64 = j.masses.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
