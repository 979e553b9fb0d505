use pyo3::prelude::*;

#[pymodule]
mod bsdlab_py {
    use std::path::PathBuf;

    use bsdlab::ec::{self, RationalPoint, WeierstrassCurve};
    use bsdlab::{jobs, stats, tda};
    use num_bigint::BigInt;
    use pyo3::exceptions::{PyRuntimeError, PyValueError};
    use pyo3::prelude::*;

    fn value_err(e: impl std::fmt::Display) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn curve(a: Vec<BigInt>) -> PyResult<WeierstrassCurve> {
        let [a1, a2, a3, a4, a6]: [BigInt; 5] = a.try_into().map_err(|_| value_err("expected [a1, a2, a3, a4, a6]"))?;
        let c = WeierstrassCurve::new(a1, a2, a3, a4, a6);
        if !c.is_smooth() {
            return Err(value_err("singular curve"));
        }
        Ok(c)
    }

    fn point(s: &str) -> PyResult<RationalPoint> {
        s.parse::<RationalPoint>().map_err(value_err)
    }

    /// Discriminant and j-invariant as `(delta, (j_num, j_den))`.
    #[pyfunction]
    fn invariants(a: Vec<BigInt>) -> PyResult<(BigInt, (BigInt, BigInt))> {
        let c = curve(a)?;
        let j = c.j_invariant().map_err(value_err)?;
        Ok((c.discriminant(), (j.numer().clone(), j.denom().clone())))
    }

    /// Point `"[x:y]"` or `"[x:y:z]"` on the curve.
    #[pyfunction]
    #[pyo3(signature = (a, p, tol = 1e-12))]
    fn canonical_height(a: Vec<BigInt>, p: &str, tol: f64) -> PyResult<f64> {
        ec::canonical_height(&curve(a)?, &point(p)?, tol).map_err(value_err)
    }

    #[pyfunction]
    #[pyo3(signature = (a, points, tol = 1e-12))]
    fn regulator(a: Vec<BigInt>, points: Vec<String>, tol: f64) -> PyResult<f64> {
        let pts = points.iter().map(|s| point(s)).collect::<PyResult<Vec<_>>>()?;
        ec::regulator(&curve(a)?, &pts, tol).map_err(value_err)
    }

    #[pyfunction]
    #[pyo3(signature = (a, tol = 1e-12))]
    fn real_period(a: Vec<BigInt>, tol: f64) -> PyResult<f64> {
        ec::real_period(&curve(a)?, tol).map_err(value_err)
    }

    /// `(a_p, reduction)` with reduction one of good, multiplicative, additive.
    #[pyfunction]
    fn ap(a: Vec<BigInt>, p: u64) -> PyResult<(i64, &'static str)> {
        let pc = ec::count_points_mod_p(&curve(a)?, p).map_err(value_err)?;
        Ok((pc.trace(), pc.reduction.as_str()))
    }

    #[pyfunction]
    fn bsd_rhs(sha: f64, omega: f64, regulator: f64, tamagawa: f64, torsion: f64) -> f64 {
        ec::bsd_rhs_from_parts(sha, omega, regulator, tamagawa, torsion)
    }

    /// Energy-distance permutation test; returns `(observed, p_value)`.
    #[pyfunction]
    #[pyo3(signature = (a, b, n_perm = 999, seed = 0))]
    fn permutation_test(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, n_perm: usize, seed: u64) -> PyResult<(f64, f64)> {
        let r = stats::permutation_test(&a, &b, stats::Statistic::EnergyDistance, n_perm, seed).map_err(value_err)?;
        Ok((r.observed, r.p_value))
    }

    /// Vietoris-Rips barcode as `(dim, birth, death)` triples; death is `inf`
    /// for bars that never close.
    #[pyfunction]
    #[pyo3(signature = (points, max_dim = 1, max_eps = f64::INFINITY))]
    fn barcode(points: Vec<Vec<f64>>, max_dim: usize, max_eps: f64) -> PyResult<Vec<(usize, f64, f64)>> {
        let cloud = tda::PointCloud::new(&points, vec![]).map_err(value_err)?;
        let f = tda::build_rips(&cloud, max_dim, max_eps, tda::DEFAULT_SIMPLEX_BUDGET).map_err(value_err)?;
        Ok(tda::persistence(&f).intervals.iter().map(|i| (i.dim, i.birth, i.death)).collect())
    }

    /// Runs a job config and returns the manifest exit code.
    #[pyfunction]
    fn run(py: Python<'_>, config: PathBuf) -> PyResult<i32> {
        match py.detach(|| jobs::run(&config)) {
            Ok(m) => Ok(m.exit_code),
            Err(e) if e.exit_code() == 2 => Err(value_err(e)),
            Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
        }
    }
}
