use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Job, JobConfig, PlannedJob};
use super::output::{sha256_hex, Artifact, Doc, Outputs, SCHEMA_VERSION};
use super::reproduce::reproduce;
use super::tasks::{self, PermSettings};
use super::{load_table, JobError};
use crate::ingest::{sample_indices, CurveRecord};
use crate::ml::ExperimentSpec;
use crate::stats::{Coefficient, FitOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobEntry {
    pub name: String,
    pub seed: u64,
    pub status: JobStatus,
    pub exit_code: i32,
    pub error: Option<String>,
    pub artifacts: Vec<Artifact>,
}

/// Written as `manifest.json` next to the outputs; the only file carrying
/// timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub name: String,
    pub code_version: String,
    pub config_sha256: String,
    pub cache: String,
    pub cache_sha256: String,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub status: JobStatus,
    /// 0, or the exit code of the first failed job in plan order.
    pub exit_code: i32,
    pub jobs: Vec<JobEntry>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

type Docs = Vec<(String, Doc)>;

struct Data<'a> {
    records: &'a [CurveRecord],
    lines: Option<&'a [usize]>,
}

fn execute(cfg: &JobConfig, p: &PlannedJob, data: &Data<'_>) -> (Docs, Option<JobError>) {
    let records = data.records;
    let one = |d: Result<Doc, JobError>| match d {
        Ok(d) => (vec![(String::new(), d)], None),
        Err(e) => (Vec::new(), Some(e)),
    };
    match &p.job {
        Job::Validate(s) => match tasks::validation(records, data.lines, s) {
            Ok((doc, report)) => {
                let err = (!report.clean()).then(|| {
                    let failed = report.expectations.iter().filter(|e| !e.ok).count();
                    JobError::Data(format!("{} invariant violations, {failed} failed rank expectations", report.issues.len()))
                });
                (vec![(String::new(), doc)], err)
            }
            Err(e) => (Vec::new(), Some(e)),
        },
        Job::Stats(name, s) => {
            let fit = FitOptions { restarts: s.restarts, seed: p.seed, ..Default::default() };
            let perm = PermSettings { n_perm: s.n_perm, sample: s.perm_sample, seed: p.seed };
            match name.as_str() {
                "tally" => one(Ok(tasks::tally(records))),
                "scatter" => one(Ok(tasks::scatter(records))),
                "pmf" => one(tasks::pmf(records, s.nbins)),
                "joint" => one(tasks::joint(records, s.nbins)),
                "fit-d" => one(tasks::fit_distance(records, &fit, s.nbins)),
                "fit-rhs" => one(tasks::fit_rhs(records, &fit, s.nbins)),
                "perm" => one(tasks::perm(records, &perm)),
                "rank-panels" => one(tasks::rank_panels(records, s.nbins, &fit, &perm)),
                "boxplots" => one(tasks::boxplots(records)),
                "corr" => one(tasks::correlations(records)),
                "groupstats" => (
                    vec![
                        ("-a4".into(), tasks::group_summary(records, Coefficient::A4)),
                        ("-a6".into(), tasks::group_summary(records, Coefficient::A6)),
                    ],
                    None,
                ),
                other => (Vec::new(), Some(JobError::Config(format!("unknown stats job {other:?}")))),
            }
        }
        Job::Tda(t) => one(t.pipeline(p.seed).and_then(|c| Ok(tasks::barcodes(records, &cfg.cache.display().to_string(), &c)?.0))),
        Job::Ml(m) => one((|| {
            let (target, features, model) = m.parsed()?;
            let rows: Vec<CurveRecord> = match m.sample {
                Some(n) => sample_indices(records.len(), n, p.seed)?.into_iter().map(|i| records[i].clone()).collect(),
                None => records.to_vec(),
            };
            let spec = ExperimentSpec { model, params: crate::ml::GbtParams { seed: p.seed, ..m.gbt }, k: m.k, seed: p.seed };
            let report = tasks::experiment(&rows, features, target, &spec)?;
            Doc::json("model-report", m, &report)
        })()),
        Job::Reproduce(id) => match reproduce(id, records, p.seed, &cfg.reproduce_options) {
            Ok(docs) => (docs, None),
            Err(e) => (Vec::new(), Some(e)),
        },
    }
}

/// Runs every sub-job of a config file. Config and input errors abort before
/// anything is written; sub-job failures are recorded in the manifest, leave
/// a `<job>.FAILED` marker and make the run's exit code nonzero.
pub fn run(config_path: &Path) -> Result<Manifest, JobError> {
    let started_unix = now();
    let (cfg, text) = JobConfig::load(config_path)?;
    let plan = cfg.plan()?;
    let cache_bytes = std::fs::read(&cfg.cache).map_err(|e| JobError::Config(format!("reading {}: {e}", cfg.cache.display())))?;
    let (records, lines) = load_table(&cfg.cache)?;
    let data = Data { records: &records, lines: lines.as_deref() };
    let out = Outputs::new(&cfg.output_dir)?;
    let jobs: Vec<JobEntry> = plan
        .par_iter()
        .map(|p| {
            let (docs, mut err) = execute(&cfg, p, &data);
            let mut artifacts = Vec::new();
            for (suffix, doc) in &docs {
                match out.write(&format!("{}{suffix}", p.name), doc) {
                    Ok(a) => artifacts.push(a),
                    Err(e) => {
                        err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = &err {
                if let Ok(a) = out.mark_failed(&p.name, e) {
                    artifacts.push(a);
                }
            }
            JobEntry {
                name: p.name.clone(),
                seed: p.seed,
                status: if err.is_some() { JobStatus::Failed } else { JobStatus::Ok },
                exit_code: err.as_ref().map_or(0, |e| e.exit_code()),
                error: err.map(|e| e.to_string()),
                artifacts,
            }
        })
        .collect();
    let exit_code = jobs.iter().map(|j| j.exit_code).find(|&c| c != 0).unwrap_or(0);
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(text.as_bytes()),
        cache: cfg.cache.display().to_string(),
        cache_sha256: sha256_hex(&cache_bytes),
        seed: cfg.seed,
        started_unix,
        finished_unix: now(),
        status: if exit_code == 0 { JobStatus::Ok } else { JobStatus::Failed },
        exit_code,
        jobs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| JobError::Numeric(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(out.dir.join("manifest.json"), bytes).map_err(|e| JobError::Config(format!("writing manifest: {e}")))?;
    Ok(manifest)
}
