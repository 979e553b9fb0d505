//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the PASS/FAIL lines are
//! always printed. Checks that need the pinned Cremona release read it from
//! `BSDLAB_CREMONA` (a `bsdlab ingest` cache or a concatenated allbsd file);
//! without it they are reported as FAIL (not evaluated).
//!
//! The process exits 0 once every check has run, so the rest of the test
//! suite still runs; the lines and the summary are the verdict. With
//! `BSDLAB_ACCEPTANCE_STRICT=1` any FAIL line makes it exit with status 1.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

use bsdlab::ec::{bsd_rhs, canonical_height, count_points_mod_p, local_factor, real_period, RationalPoint, WeierstrassCurve};
use bsdlab::features::Column;
use bsdlab::ingest::{parse_table, read_cache, sample_indices, ColumnMap, CurveRecord};
use bsdlab::jobs::reproduce::{reproduce, ReproduceOptions};
use bsdlab::jobs::tasks::{self, FeatureSet, ValidateSettings};
use bsdlab::ml::{f1, mcc, nmae, rmse, Average, ExperimentSpec, ModelKind};
use bsdlab::stats::{
    fit_beta_scaled, fit_select_aic, permutation_test, tally_rank_by_triple, Family, FitOptions, Sample, Statistic, REGISTRY, TRIPLES,
};
use bsdlab::tda::{betti_at, build_rips, persistence, PointCloud, DEFAULT_SIMPLEX_BUDGET};

const PAPER_TALLY: [[u64; 5]; 12] = [
    [126135, 155604, 30236, 659, 0],
    [17238, 24593, 7582, 399, 0],
    [172238, 213780, 40731, 698, 0],
    [28440, 39235, 11187, 506, 0],
    [118942, 157003, 34585, 722, 0],
    [18016, 27360, 9609, 426, 0],
    [102769, 127198, 25793, 551, 1],
    [96995, 128957, 28940, 604, 0],
    [66411, 98092, 25286, 612, 0],
    [71309, 94595, 20907, 548, 0],
    [69759, 88403, 18293, 496, 0],
    [67834, 91717, 21197, 458, 0],
];

enum Status {
    Pass,
    Fail,
    Unavailable,
}

struct Ledger {
    lines: Vec<(String, Status)>,
}

impl Ledger {
    fn record(&mut self, id: &str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((id.to_string(), status));
    }

    fn unavailable(&mut self, id: &str, detail: &str) {
        println!("FAIL {id}: not evaluated, pinned Cremona database unavailable (set BSDLAB_CREMONA); {detail}");
        self.lines.push((id.to_string(), Status::Unavailable));
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO {id}: {detail}");
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn fixture(name: &str) -> Vec<CurveRecord> {
    let t = parse_table(&data(name), &ColumnMap::fixture_csv()).expect("fixture parses");
    assert!(t.errors.is_empty(), "{name}: {:?}", &t.errors[..t.errors.len().min(3)]);
    t.records
}

fn database() -> Option<Vec<CurveRecord>> {
    let path = PathBuf::from(std::env::var_os("BSDLAB_CREMONA")?);
    let head = std::fs::read(&path).map(|b| b.starts_with(b"BSDC")).unwrap_or(false);
    let records = if head {
        read_cache(&path).expect("BSDLAB_CREMONA cache")
    } else {
        let map = ColumnMap::load(&data("maps/cremona_allbsd.toml")).expect("map");
        parse_table(&path, &map).expect("BSDLAB_CREMONA table").records
    };
    Some(records)
}

fn pick(records: &[CurveRecord], n: usize, seed: u64) -> Vec<&CurveRecord> {
    sample_indices(records.len(), n.min(records.len()), seed).unwrap().into_iter().map(|i| &records[i]).collect()
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn c1_worked_example(l: &mut Ledger) {
    let t = Instant::now();
    let e = WeierstrassCurve::from_coeffs([1, -1, 0, -453981, 117847851]);
    let delta = e.discriminant();
    let want_delta = big(2) * big(3).pow(3) * big(11) * big(23).pow(8);
    let j = e.j_invariant().unwrap();
    let want_j = BigRational::new(big(27) * big(23) * big(199).pow(3), big(2) * big(11));
    let secs = t.elapsed().as_secs_f64();
    l.record("1 worked example", delta == want_delta && j == want_j && secs < 1.0, format!("Δ = {delta}, j = {j}, {secs:.4} s"));
}

fn c2_bsd_rhs(l: &mut Ledger, small: &[CurveRecord]) {
    let r = small.iter().find(|r| r.label == "314226b1").expect("314226b1 in fixture");
    let rhs = bsd_rhs(r);
    // Ω = 0.56262 (5 digits printed), R = 1, ∏c_p = 3, |T| = 3, |Ш| = 1
    let printed: f64 = 0.56262 * 3.0 / 9.0;
    l.record(
        "2 BSD RHS",
        (rhs - 0.187540).abs() <= 1e-5 && (printed - 0.187540).abs() <= 1e-5,
        format!("bsd_rhs = {rhs:.7}, from printed values {printed:.7}"),
    );
}

fn rank_expectations(records: &[CurveRecord]) -> (bool, String) {
    let s = ValidateSettings { recompute: false, expect_rank: vec!["[0,1,1,-10,20]=3".into(), "[0,1,1,10,20]=1".into()] };
    let (_, report) = tasks::validation(records, None, &s).unwrap();
    let ok = report.expectations.iter().all(|e| e.ok) && report.expectations.len() == 2;
    let found: Vec<String> =
        report.expectations.iter().map(|e| format!("{} {:?} rank {:?}", e.coefficients, e.label, e.found)).collect();
    (ok, found.join("; "))
}

fn c3_rank_asymmetry(l: &mut Ledger, small: &[CurveRecord], db: Option<&[CurveRecord]>) {
    let (ok, detail) = rank_expectations(small);
    l.record("3 rank asymmetry (1k fixture)", ok, detail);
    match db {
        Some(db) => {
            let (ok, detail) = rank_expectations(db);
            l.record("3 rank asymmetry (database)", ok, detail);
        }
        None => l.unavailable("3 rank asymmetry (database)", "fixture rows checked above"),
    }
}

fn c4_tally(l: &mut Ledger, small: &[CurveRecord], db: Option<&[CurveRecord]>) {
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tally_1k.csv")).unwrap();
    let mut want = Vec::new();
    for line in golden.lines().skip(1) {
        let v: Vec<i64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        want.push(((v[0] as i8, v[1] as i8, v[2] as i8), [v[3], v[4], v[5], v[6], v[7]].map(|x| x as u64)));
    }
    let t = tally_rank_by_triple(small);
    let ok = want.len() == 12 && want.iter().all(|(tr, row)| (0..5).all(|r| t.get(*tr, r) == row[r])) && t.skipped == 0;
    l.record("4 tally (1k fixture vs golden)", ok, format!("{} curves, rank totals {:?}", t.total(), t.rank_totals()));
    match db {
        Some(db) => {
            let t = tally_rank_by_triple(db);
            let t = &t;
            let bad: Vec<String> = TRIPLES
                .iter()
                .zip(PAPER_TALLY)
                .flat_map(|(tr, row)| (0..5).filter(move |&r| t.get(*tr, r) != row[r]).map(move |r| format!("{tr:?} r{r}")))
                .collect();
            l.record("4 tally (database)", bad.is_empty(), format!("{} curves, mismatches {:?}", t.total(), bad));
        }
        None => l.unavailable("4 tally (database)", "12x5 table not compared"),
    }
}

fn c5_heights(l: &mut Ledger, big_fixture: &[CurveRecord]) {
    let rank1: Vec<CurveRecord> =
        big_fixture.iter().filter(|r| r.rank == 1 && r.generators.as_ref().is_some_and(|g| g.len() == 1)).cloned().collect();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    let sample = pick(&rank1, 60, 5);
    for r in &sample {
        match canonical_height(&r.curve, &r.generators.as_ref().unwrap()[0], 1e-10) {
            Ok(h) => worst = worst.max((h - r.regulator).abs()),
            Err(e) => errors.push(format!("{}: {e}", r.label)),
        }
    }
    let torsion = std::fs::read_to_string(data("torsion_20k.csv")).unwrap();
    let by_label: std::collections::HashMap<&str, &CurveRecord> = big_fixture.iter().map(|r| (r.label.as_str(), r)).collect();
    let mut worst_t = 0.0f64;
    let mut n_t = 0;
    for line in torsion.lines().skip(1).take(300) {
        let f: Vec<&str> = line.split(',').collect();
        let r = by_label[f[0]];
        let p = RationalPoint::new(f[1].parse().unwrap(), f[2].parse().unwrap());
        match canonical_height(&r.curve, &p, 1e-12) {
            Ok(h) => worst_t = worst_t.max(h.abs()),
            Err(e) => errors.push(format!("{} torsion: {e}", r.label)),
        }
        n_t += 1;
    }
    l.record(
        "5 heights/regulator",
        sample.len() >= 50 && worst <= 1e-3 && worst_t < 1e-6 && errors.is_empty(),
        format!(
            "{} rank-1 generators, max |ĥ - R| = {worst:.2e}; {n_t} torsion points, max ĥ = {worst_t:.2e}; errors {:?}",
            sample.len(),
            errors
        ),
    );
}

fn naive_count(c: &WeierstrassCurve, p: u64) -> u64 {
    let p = p as i128;
    let a: Vec<i128> = c.coeffs().iter().map(|x| (*x % BigInt::from(p)).try_into().unwrap()).collect();
    let m = |x: i128| x.rem_euclid(p);
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = m(y * y + a[0] * x * y + a[2] * y);
            let rhs = m(x * x * x + a[1] * x * x + a[3] * x + a[4]);
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

fn primes_below(n: u64) -> Vec<u64> {
    (2..n).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

fn c6_point_counts(l: &mut Ledger, big_fixture: &[CurveRecord]) {
    let primes = primes_below(500);
    let mut checked = 0;
    let mut bad = Vec::new();
    for r in pick(big_fixture, 20, 6) {
        for &p in primes.iter().filter(|&&p| r.conductor % p != 0) {
            let pc = count_points_mod_p(&r.curve, p).unwrap();
            let ap = p as i64 + 1 - pc.count as i64;
            if pc.count != naive_count(&r.curve, p) || (ap * ap) as f64 > 4.0 * p as f64 {
                bad.push(format!("{} p={p}", r.label));
            }
            checked += 1;
        }
    }
    let mut additive = 0;
    for r in big_fixture.iter() {
        for p in primes_below(10_000).into_iter().filter(|p| r.conductor % (p * p) == 0) {
            if local_factor(&r.curve, p, r.conductor).map(|f| f.ap).ok() != Some(0) {
                bad.push(format!("{} p={p} additive", r.label));
            }
            additive += 1;
        }
        if additive >= 200 {
            break;
        }
    }
    l.record(
        "6 point counts",
        bad.is_empty() && checked > 0 && additive > 0,
        format!("{checked} good (curve, p) pairs vs naive oracle, {additive} primes with p^2 | N give a_p = 0; mismatches {bad:?}"),
    );
}

fn c7_period(l: &mut Ledger, big_fixture: &[CurveRecord]) {
    let sample = pick(big_fixture, 200, 7);
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for r in &sample {
        match real_period(&r.curve, 1e-12) {
            Ok(om) => worst = worst.max((om - r.omega).abs() / r.omega),
            Err(e) => errors.push(format!("{}: {e}", r.label)),
        }
    }
    let per = t.elapsed().as_secs_f64() / sample.len() as f64;
    l.record(
        "7 real period",
        worst <= 1e-4 && per < 0.05 && errors.is_empty(),
        format!("{} curves, max relative error {worst:.2e}, {:.2} ms per curve; errors {errors:?}", sample.len(), per * 1e3),
    );
}

fn c8_beta(l: &mut Ledger, big_fixture: &[CurveRecord], db: Option<&[CurveRecord]>) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let beta = Beta::new(4.1, 25.0).unwrap();
    let xs: Vec<f64> = (0..100_000).map(|_| 44.1 * beta.sample(&mut rng)).collect();
    let fit = fit_beta_scaled(&xs, &FitOptions { restarts: 10, seed: 8, ..Default::default() }).unwrap();
    let want = [4.1, 25.0, 44.1];
    let rel: Vec<f64> = fit.params.iter().zip(want).map(|(g, w)| (g - w).abs() / w).collect();
    let ll_true = Family::Beta.loglik(&want, &Sample::new(&xs).unwrap());
    l.record(
        "8 Beta recovery",
        rel.iter().all(|e| *e <= 0.05),
        format!(
            "fitted (a, b, s) = ({:.3}, {:.3}, {:.3}), relative errors {:.3?}; loglik {:.2} at the fit vs {:.2} at the generator",
            fit.params[0], fit.params[1], fit.params[2], rel, fit.loglik, ll_true
        ),
    );
    let select = |records: &[CurveRecord]| {
        let rhs: Vec<f64> = records.iter().map(bsd_rhs).collect();
        fit_select_aic(&rhs, &REGISTRY, &FitOptions { restarts: 10, seed: 8, ..Default::default() }).unwrap()
    };
    match db {
        Some(db) => {
            let out = select(db);
            let best = out[0].fit.as_ref().unwrap();
            let want = [1.55, 14.28, 62.71];
            let ok = best.family == Family::Beta
                && best.params.iter().zip(want).all(|(g, w)| (g - w).abs() / w <= 0.15);
            l.record("8 RHS selects Beta (database)", ok, format!("{} {:?}", best.family.name(), best.params));
        }
        None => {
            let out = select(big_fixture);
            let best = out[0].fit.as_ref().unwrap();
            l.info("8 RHS selection", format!("20k fixture stand-in selects {} {:?}", best.family.name(), best.params));
            l.unavailable("8 RHS selects Beta (database)", "fixture curves are random equations, not the Cremona distribution");
        }
    }
}

fn c9_permutation(l: &mut Ledger) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 500;
    let mut rejections = 0;
    for t in 0..trials {
        let a: Vec<Vec<f64>> = (0..50).map(|_| vec![normal.sample(&mut rng)]).collect();
        let b: Vec<Vec<f64>> = (0..50).map(|_| vec![normal.sample(&mut rng)]).collect();
        if permutation_test(&a, &b, Statistic::EnergyDistance, 199, 900 + t).unwrap().p_value <= 0.01 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    let a: Vec<Vec<f64>> = (0..200).map(|_| vec![normal.sample(&mut rng)]).collect();
    let b: Vec<Vec<f64>> = (0..200).map(|_| vec![5.0 + normal.sample(&mut rng)]).collect();
    let power = permutation_test(&a, &b, Statistic::EnergyDistance, 199, 9).unwrap().p_value;
    l.record(
        "9 permutation calibration",
        (rate - 0.01).abs() <= 0.007 && power <= 0.01,
        format!("null rejection rate {rate:.4} over {trials} trials, N(0,1) vs N(5,1) p = {power:.4}"),
    );
}

fn gf2_rank(mut cols: Vec<u128>) -> usize {
    let mut rank = 0;
    while let Some(c) = cols.pop() {
        if c == 0 {
            continue;
        }
        rank += 1;
        let low = c.trailing_zeros();
        for d in cols.iter_mut() {
            if (*d >> low) & 1 == 1 {
                *d ^= c;
            }
        }
    }
    rank
}

/// Betti numbers of the Rips complex at `eps` from boundary-matrix ranks.
fn brute_betti(pts: &[Vec<f64>], eps: f64, max_dim: usize) -> Vec<usize> {
    let n = pts.len();
    let d = |i: usize, j: usize| pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 2];
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize - 1;
        if k > max_dim + 1 {
            continue;
        }
        let v: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if v.iter().all(|&i| v.iter().all(|&j| d(i, j) <= eps)) {
            by_dim[k].push(mask);
        }
    }
    let boundary_rank = |k: usize| {
        if k == 0 {
            return 0;
        }
        let faces = &by_dim[k - 1];
        let cols = by_dim[k]
            .iter()
            .map(|&s| {
                (0..n).filter(|i| s >> i & 1 == 1).fold(0u128, |acc, i| {
                    let f = s & !(1 << i);
                    acc | 1u128 << faces.iter().position(|&g| g == f).unwrap()
                })
            })
            .collect();
        gf2_rank(cols)
    };
    let ranks: Vec<usize> = (0..=max_dim + 1).map(boundary_rank).collect();
    (0..=max_dim).map(|k| by_dim[k].len() - ranks[k] - ranks[k + 1]).collect()
}

fn c10_tda(l: &mut Ledger) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mismatches = 0;
    let mut evaluations = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let dim = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
        let cloud = PointCloud::new(&pts, vec![]).unwrap();
        let diam = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| cloud.distance(i, j)).fold(0.0, f64::max);
        let bc = persistence(&build_rips(&cloud, 2, diam * 1.1, DEFAULT_SIMPLEX_BUDGET).unwrap());
        for _ in 0..20 {
            let eps = rng.random::<f64>() * diam * 1.05;
            if betti_at(&bc, eps) != brute_betti(&pts, eps, 2) {
                mismatches += 1;
            }
            evaluations += 1;
        }
    }
    let square = PointCloud::new(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], vec![]).unwrap();
    let sq = persistence(&build_rips(&square, 1, 2.0, DEFAULT_SIMPLEX_BUDGET).unwrap());
    let h1: Vec<_> = sq.dim(1).collect();
    let square_ok = h1.len() == 1 && (h1[0].birth - 1.0).abs() < 1e-9 && (h1[0].death - 2f64.sqrt()).abs() < 1e-9;
    let secs = t.elapsed().as_secs_f64();
    l.record(
        "10 TDA oracle",
        mismatches == 0 && square_ok && secs < 10.0,
        format!("{evaluations} Betti evaluations, {mismatches} mismatches; square H1 {:?}; {secs:.2} s", h1.iter().map(|i| (i.birth, i.death)).collect::<Vec<_>>()),
    );
}

struct MlOutcome {
    ok: bool,
    detail: String,
}

fn ml_directional(records: &[CurveRecord]) -> MlOutcome {
    let spec = |model| ExperimentSpec { model, k: 5, seed: 11, ..Default::default() };
    let score = |f: FeatureSet, t: Column, m: ModelKind| {
        let r = tasks::experiment(records, f, t, &spec(m)).unwrap();
        if t == Column::Rank { r.summary.mcc.unwrap().mean } else { r.summary.nmae.unwrap().mean }
    };
    let om = (score(FeatureSet::Coefficients, Column::Omega, ModelKind::Gbt), score(FeatureSet::Coefficients, Column::Omega, ModelKind::Dummy));
    let cp = (
        score(FeatureSet::Coefficients, Column::Tamagawa, ModelKind::Gbt),
        score(FeatureSet::Coefficients, Column::Tamagawa, ModelKind::Dummy),
    );
    let sha = (score(FeatureSet::Mixed, Column::Sha, ModelKind::Gbt), score(FeatureSet::Mixed, Column::Sha, ModelKind::Dummy));
    let rank = score(FeatureSet::Mixed, Column::Rank, ModelKind::Gbt);
    MlOutcome {
        ok: om.0 < om.1 && cp.0 < cp.1 && sha.0 <= sha.1 / 3.0 && rank >= 0.7,
        detail: format!(
            "{} rows; NMAE Ω gbt {:.4} vs dummy {:.4}; ∏c_p {:.4} vs {:.4}; mixed Sha {:.4} vs {:.4}; mixed rank MCC {:.4}",
            records.len(),
            om.0,
            om.1,
            cp.0,
            cp.1,
            sha.0,
            sha.1,
            rank
        ),
    }
}

fn c11_ml(l: &mut Ledger, big_fixture: &[CurveRecord], db: Option<&[CurveRecord]>) {
    match db {
        Some(db) => {
            let rows: Vec<CurveRecord> = pick(db, 100_000, 11).into_iter().cloned().collect();
            let o = ml_directional(&rows);
            l.record("11 ML directional (database subsample)", o.ok, o.detail);
        }
        None => {
            let o = ml_directional(big_fixture);
            l.info("11 ML directional", format!("20k fixture stand-in {}: {}", if o.ok { "meets thresholds" } else { "misses thresholds" }, o.detail));
            l.unavailable("11 ML directional (database subsample)", "stand-in result above");
        }
    }
}

fn c12_metrics(l: &mut Ledger, small: &[CurveRecord]) {
    let r = tasks::experiment(small, FeatureSet::Coefficients, Column::Rank, &ExperimentSpec { model: ModelKind::Dummy, ..Default::default() })
        .unwrap();
    let dummy_zero = r.folds.len() == 5 && r.folds.iter().all(|f| f.mcc == Some(0.0));
    let y = [0usize, 2, 1, 1, 0, 3];
    let v = [0.5, -2.0, 7.25, 1e3];
    let perfect = f1(&y, &y, Average::Micro).ok() == Some(1.0)
        && f1(&y, &y, Average::Macro).ok() == Some(1.0)
        && mcc(&y, &y).ok() == Some(1.0)
        && nmae(&v, &v).ok() == Some(0.0)
        && rmse(&v, &v).ok() == Some(0.0);
    l.record("12 metric identities", dummy_zero && perfect, format!("dummy fold MCCs {:?}, perfect-prediction identities {perfect}", r.folds.iter().map(|f| f.mcc).collect::<Vec<_>>()));
}

fn c13_determinism(l: &mut Ledger, small: &[CurveRecord]) {
    let opts = ReproduceOptions { restarts: 5, n_perm: 49, perm_sample: 100, ml_rows: Some(300), ..Default::default() };
    let ids = ["fig1", "table-tally", "fig2c", "fig3", "rhs-fit", "corr-matrix", "barcodes-parity", "table3", "table9"];
    let render = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            ids.iter()
                .flat_map(|id| reproduce(id, small, 13, &opts).unwrap())
                .map(|(_, d)| d.to_bytes().unwrap())
                .collect::<Vec<_>>()
        })
    };
    let a = render(1);
    let b = render(4);
    let c = render(4);
    let same = a == b && b == c;
    l.record("13 determinism", same, format!("{} reports from {} ids identical across repeats and 1 vs 4 threads", a.len(), ids.len()));
}

fn main() {
    let mut l = Ledger { lines: Vec::new() };
    let small = fixture("curves_1k.csv");
    let big_fixture = fixture("curves_20k.csv");
    let db = database();
    let db = db.as_deref();
    c1_worked_example(&mut l);
    c2_bsd_rhs(&mut l, &small);
    c3_rank_asymmetry(&mut l, &small, db);
    c4_tally(&mut l, &small, db);
    c5_heights(&mut l, &big_fixture);
    c6_point_counts(&mut l, &big_fixture);
    c7_period(&mut l, &big_fixture);
    c8_beta(&mut l, &big_fixture, db);
    c9_permutation(&mut l);
    c10_tda(&mut l);
    c11_ml(&mut l, &big_fixture, db);
    c12_metrics(&mut l, &small);
    c13_determinism(&mut l, &small);
    let count = |f: fn(&Status) -> bool| l.lines.iter().filter(|(_, s)| f(s)).count();
    let (pass, fail, unavailable) =
        (count(|s| matches!(s, Status::Pass)), count(|s| matches!(s, Status::Fail)), count(|s| matches!(s, Status::Unavailable)));
    println!("acceptance: {pass} passed, {fail} failed, {unavailable} not evaluated without the database");
    if std::env::var("BSDLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") && fail + unavailable > 0 {
        std::process::exit(1);
    }
}
