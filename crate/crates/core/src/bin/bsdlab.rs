use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bsdlab::ec::WeierstrassCurve;
use bsdlab::features::Column;
use bsdlab::ingest::{parse_table, write_cache, ColumnMap, CurveRecord};
use bsdlab::jobs::reproduce::{reproduce, ReproduceOptions, IDS};
use bsdlab::jobs::tasks::{self, FeatureSet, PermSettings, ValidateSettings};
use bsdlab::jobs::{self, load_records, load_table, sha256_hex, write_doc, Doc, JobError, Manifest};
use bsdlab::ml::{ExperimentSpec, GbtParams, ModelKind};
use bsdlab::stats::{Coefficient, FitOptions};
use bsdlab::tda::{PipelineConfig, Split, DEFAULT_SIMPLEX_BUDGET};

#[derive(Parser)]
#[command(name = "bsdlab", version, about = "Elliptic-curve database statistics, topology and learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a curve table and write the binary cache.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Column-mapping TOML, or "fixture" for the headered CSV layout.
        #[arg(long, default_value = "fixture")]
        map: String,
        #[arg(long)]
        out: PathBuf,
        /// Cache the well-formed rows even when others fail to parse.
        #[arg(long)]
        skip_bad_rows: bool,
    },
    /// Check record invariants and write a validation report.
    Validate {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Also recompute real periods, regulators and local factors.
        #[arg(long)]
        recompute: bool,
        /// Expected rank, as "[a1,a2,a3,a4,a6]=r"; repeatable.
        #[arg(long = "expect-rank")]
        expect_rank: Vec<String>,
    },
    /// Traces of Frobenius a_p for all primes up to a bound.
    Ap {
        /// Coefficients "[a1,a2,a3,a4,a6]" or a label found in --cache.
        #[arg(long)]
        curve: String,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Required when the curve is not looked up in a cache.
        #[arg(long)]
        conductor: Option<u64>,
        #[arg(long, default_value_t = 500)]
        pmax: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Descriptive statistics, distribution fits and permutation tests.
    Stats(StatsArgs),
    /// Vietoris-Rips barcodes of sampled point clouds.
    Tda(TdaArgs),
    /// Cross-validated prediction of one column.
    Ml(MlArgs),
    /// Data behind one figure or table.
    Reproduce(ReproduceArgs),
    /// Run every job of a config file and write a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a run directory against its manifest and summarise it.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    cache: PathBuf,
    /// tally, scatter, pmf, joint, fit-d, fit-rhs, perm, rank-panels, boxplots, corr, groupstats
    #[arg(long)]
    job: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 199)]
    n_perm: usize,
    #[arg(long, default_value_t = 500)]
    perm_sample: usize,
    #[arg(long, default_value_t = 60)]
    nbins: usize,
}

#[derive(Args)]
struct TdaArgs {
    #[arg(long)]
    cache: PathBuf,
    /// Comma-separated columns with optional transforms, e.g. a1,a4:slog.
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    #[arg(long, default_value = "none")]
    split: String,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    maxdim: usize,
    /// Filtration cut-off; chosen automatically when omitted.
    #[arg(long)]
    max_eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_BUDGET)]
    budget: usize,
    /// Keep zero-length intervals.
    #[arg(long)]
    keep_zero: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MlArgs {
    #[arg(long)]
    cache: PathBuf,
    #[arg(long)]
    target: String,
    /// coefficients or mixed
    #[arg(long, default_value = "coefficients")]
    features: String,
    /// gbt, linear, logistic or dummy
    #[arg(long, default_value = "gbt")]
    model: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeded subsample size.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 200)]
    n_trees: usize,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Figure or table id; see --list.
    #[arg(long, required_unless_present = "list")]
    id: Option<String>,
    #[arg(long, required_unless_present = "list")]
    cache: Option<PathBuf>,
    /// Output directory.
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rows drawn before the learning tables.
    #[arg(long)]
    ml_rows: Option<usize>,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long)]
    list: bool,
}

fn config<E: std::fmt::Display>(e: E) -> JobError {
    JobError::Config(e.to_string())
}

/// Writes the first document to `out` and the others next to it, suffix
/// inserted before the extension.
fn write_docs(out: &Path, docs: &[(String, Doc)]) -> Result<(), JobError> {
    for (suffix, doc) in docs {
        let path = if suffix.is_empty() {
            out.to_path_buf()
        } else {
            let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.with_file_name(format!("{stem}{suffix}.{}", doc.extension()))
        };
        let a = write_doc(&path, doc)?;
        eprintln!("wrote {} ({} bytes, sha256 {})", path.display(), a.bytes, a.sha256);
    }
    Ok(())
}

fn ingest(input: &Path, map: &str, out: &Path, skip_bad_rows: bool) -> Result<(), JobError> {
    let map = if map == "fixture" { ColumnMap::fixture_csv() } else { ColumnMap::load(Path::new(map))? };
    let table = parse_table(input, &map)?;
    for e in table.errors.iter().take(20) {
        eprintln!("line {}: {}: {}", e.line, e.field, e.message);
    }
    if !table.errors.is_empty() && !skip_bad_rows {
        return Err(JobError::Data(format!("{} malformed rows; nothing written (use --skip-bad-rows to cache the rest)", table.errors.len())));
    }
    write_cache(&table.records, out)?;
    eprintln!("cached {} records to {} ({} rows skipped)", table.records.len(), out.display(), table.errors.len());
    Ok(())
}

fn validate(cache: &Path, report: &Path, recompute: bool, expect_rank: Vec<String>) -> Result<(), JobError> {
    let (records, lines) = load_table(cache)?;
    let settings = ValidateSettings { recompute, expect_rank };
    let (doc, rep) = tasks::validation(&records, lines.as_deref(), &settings)?;
    write_docs(report, &[(String::new(), doc)])?;
    for e in &rep.expectations {
        let found = match (&e.label, e.found) {
            (Some(l), Some(r)) => format!("{l} has rank {r}"),
            _ => "no such record".into(),
        };
        eprintln!("{} expected rank {}: {found} [{}]", e.coefficients, e.expected, if e.ok { "ok" } else { "MISMATCH" });
    }
    eprintln!("{} records checked, {} violations", rep.records, rep.issues.len());
    if rep.clean() {
        Ok(())
    } else {
        Err(JobError::Data("validation found problems; see the report".into()))
    }
}

fn ap(curve: &str, cache: Option<&Path>, conductor: Option<u64>, pmax: u64, out: Option<&Path>) -> Result<(), JobError> {
    let record = match cache {
        Some(c) => {
            let records = load_records(c)?;
            let parsed: Option<WeierstrassCurve> = curve.parse().ok();
            records
                .into_iter()
                .find(|r| r.label == curve || parsed.as_ref() == Some(&r.curve))
                .ok_or_else(|| JobError::Config(format!("curve {curve} not found in {}", c.display())))?
        }
        None => {
            let conductor = conductor.ok_or_else(|| JobError::Config("--conductor is required without --cache".into()))?;
            CurveRecord {
                label: String::new(),
                curve: curve.parse()?,
                conductor,
                rank: 0,
                torsion_order: 1,
                tamagawa_product: 1,
                omega: 1.0,
                regulator: 1.0,
                sha_order: 1.0,
                generators: None,
            }
        }
    };
    let doc = tasks::ap_table(&record, pmax)?;
    match out {
        Some(p) => write_docs(p, &[(String::new(), doc)]),
        None => {
            print!("{}", String::from_utf8_lossy(&doc.to_bytes()?));
            Ok(())
        }
    }
}

fn stats(a: StatsArgs) -> Result<(), JobError> {
    if !jobs::config::STATS_JOBS.contains(&a.job.as_str()) {
        return Err(JobError::Config(format!("unknown stats job {:?}; valid jobs: {}", a.job, jobs::config::STATS_JOBS.join(", "))));
    }
    let records = load_records(&a.cache)?;
    let fit = FitOptions { restarts: a.restarts, seed: a.seed, ..Default::default() };
    let perm = PermSettings { n_perm: a.n_perm, sample: a.perm_sample, seed: a.seed };
    let docs = match a.job.as_str() {
        "tally" => vec![tasks::tally(&records)],
        "scatter" => vec![tasks::scatter(&records)],
        "pmf" => vec![tasks::pmf(&records, a.nbins)?],
        "joint" => vec![tasks::joint(&records, a.nbins)?],
        "fit-d" => vec![tasks::fit_distance(&records, &fit, a.nbins)?],
        "fit-rhs" => vec![tasks::fit_rhs(&records, &fit, a.nbins)?],
        "perm" => vec![tasks::perm(&records, &perm)?],
        "rank-panels" => vec![tasks::rank_panels(&records, a.nbins, &fit, &perm)?],
        "boxplots" => vec![tasks::boxplots(&records)?],
        "corr" => vec![tasks::correlations(&records)?],
        _ => vec![tasks::group_summary(&records, Coefficient::A4), tasks::group_summary(&records, Coefficient::A6)],
    };
    let named: Vec<(String, Doc)> = if docs.len() == 2 {
        docs.into_iter().zip(["-a4", "-a6"]).map(|(d, s)| (s.to_string(), d)).collect()
    } else {
        docs.into_iter().map(|d| (String::new(), d)).collect()
    };
    write_docs(&a.out, &named)
}

fn tda(a: TdaArgs) -> Result<(), JobError> {
    if let Some(e) = a.max_eps.filter(|e| !(*e > 0.0)) {
        return Err(JobError::Config(format!("--max-eps must be positive, got {e}")));
    }
    let cfg = PipelineConfig {
        columns: tasks::parse_columns(&a.columns)?,
        n_sample: a.n,
        seed: a.seed,
        max_dim: a.maxdim,
        max_eps: a.max_eps.unwrap_or(f64::INFINITY),
        budget: a.budget,
        split: a.split.parse::<Split>()?,
        keep_zero: a.keep_zero,
    };
    let records = load_records(&a.cache)?;
    let (doc, reports) = tasks::barcodes(&records, &a.cache.display().to_string(), &cfg)?;
    for r in &reports {
        let h0 = r.barcode.dim(0).count();
        let h1 = r.barcode.dim(1).count();
        eprintln!("{}: {} simplices up to eps {:.6}, {h0} H0 bars, {h1} H1 bars", r.group, r.n_simplices, r.max_eps);
    }
    write_docs(&a.out, &[(String::new(), doc)])
}

fn ml(a: MlArgs) -> Result<(), JobError> {
    let target: Column = a.target.parse().map_err(JobError::Config)?;
    let features: FeatureSet = a.features.parse()?;
    let model: ModelKind = a.model.parse()?;
    let records = load_records(&a.cache)?;
    let rows: Vec<CurveRecord> = match a.sample {
        Some(n) => bsdlab::ingest::sample_indices(records.len(), n, a.seed)?.into_iter().map(|i| records[i].clone()).collect(),
        None => records,
    };
    let params = GbtParams { n_trees: a.n_trees, max_depth: a.max_depth, learning_rate: a.learning_rate, seed: a.seed, ..Default::default() };
    let spec = ExperimentSpec { model, params, k: a.k, seed: a.seed };
    let report = tasks::experiment(&rows, features, target, &spec)?;
    let s = &report.summary;
    for (name, m) in [("nmae", s.nmae), ("rmse", s.rmse), ("f1_micro", s.f1_micro), ("f1_macro", s.f1_macro), ("mcc", s.mcc)] {
        if let Some(m) = m {
            eprintln!("{name}: {:.6} +- {:.6}", m.mean, m.std);
        }
    }
    let settings = serde_json::json!({
        "target": a.target, "features": a.features, "model": a.model, "sample": a.sample, "spec": spec,
    });
    write_docs(&a.out, &[(String::new(), Doc::json("model-report", &settings, &report)?)])
}

fn reproduce_cmd(a: ReproduceArgs) -> Result<(), JobError> {
    if a.list {
        for (id, about) in IDS {
            println!("{id:16} {about}");
        }
        return Ok(());
    }
    let (id, cache, out) = (a.id.unwrap_or_default(), a.cache.unwrap_or_default(), a.out.unwrap_or_default());
    if !jobs::reproduce::is_known(&id) {
        return Err(jobs::reproduce::unknown_id(&id));
    }
    let records = load_records(&cache)?;
    let opts = ReproduceOptions { ml_rows: a.ml_rows, restarts: a.restarts, ..Default::default() };
    let docs = reproduce(&id, &records, a.seed, &opts)?;
    let first = out.join(format!("{id}.{}", docs[0].1.extension()));
    write_docs(&first, &docs)
}

fn run_cmd(config: &Path) -> Result<(), JobError> {
    let m = jobs::run(config)?;
    for j in &m.jobs {
        let files: Vec<&str> = j.artifacts.iter().map(|a| a.file.as_str()).collect();
        match &j.error {
            None => eprintln!("ok      {:20} {}", j.name, files.join(" ")),
            Some(e) => eprintln!("FAILED  {:20} {e}", j.name),
        }
    }
    match m.exit_code {
        0 => Ok(()),
        2 => Err(JobError::Config("some jobs failed; see manifest.json".into())),
        3 => Err(JobError::Data("some jobs failed; see manifest.json".into())),
        _ => Err(JobError::Numeric("some jobs failed; see manifest.json".into())),
    }
}

fn report(dir: &Path) -> Result<(), JobError> {
    let path = dir.join("manifest.json");
    let text = std::fs::read_to_string(&path).map_err(|e| JobError::Config(format!("reading {}: {e}", path.display())))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| JobError::Data(format!("{}: {e}", path.display())))?;
    println!("run {} (bsdlab {}, seed {}, config sha256 {})", m.name, m.code_version, m.seed, m.config_sha256);
    println!("cache {} sha256 {}", m.cache, m.cache_sha256);
    let mut bad = 0;
    for j in &m.jobs {
        println!("  {:20} {:?}{}", j.name, j.status, j.error.as_ref().map(|e| format!(": {e}")).unwrap_or_default());
        for a in &j.artifacts {
            let state = match std::fs::read(dir.join(&a.file)) {
                Ok(b) if sha256_hex(&b) == a.sha256 => "ok",
                Ok(_) => "CHANGED",
                Err(_) => "MISSING",
            };
            if state != "ok" {
                bad += 1;
            }
            println!("    {:32} {:>10} bytes  {state}", a.file, a.bytes);
        }
    }
    if bad > 0 {
        return Err(JobError::Data(format!("{bad} artifacts do not match the manifest")));
    }
    if m.exit_code != 0 {
        println!("run failed with exit code {}", m.exit_code);
    }
    Ok(())
}

fn init_threads() -> Result<(), JobError> {
    if let Ok(v) = std::env::var("BSDLAB_THREADS") {
        let n: usize = v.parse().ok().filter(|n| *n > 0).ok_or_else(|| config(format!("BSDLAB_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match cli.command {
        Command::Ingest { input, map, out, skip_bad_rows } => ingest(&input, &map, &out, skip_bad_rows),
        Command::Validate { cache, report: r, recompute, expect_rank } => validate(&cache, &r, recompute, expect_rank),
        Command::Ap { curve, cache, conductor, pmax, out } => ap(&curve, cache.as_deref(), conductor, pmax, out.as_deref()),
        Command::Stats(a) => stats(a),
        Command::Tda(a) => tda(a),
        Command::Ml(a) => ml(a),
        Command::Reproduce(a) => reproduce_cmd(a),
        Command::Run { config } => run_cmd(&config),
        Command::Report { dir } => report(&dir),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bsdlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
