//! Run configuration (TOML, versioned).
//!
//! ```toml
//! version = 1
//! name = "fixture"
//! cache = "curves.bsdc"        # relative paths resolve against the config file
//! output_dir = "out"
//! seed = 7
//! reproduce = ["fig1", "table-tally"]
//!
//! [validate]
//! recompute = true
//! expect_rank = ["[0,1,1,-10,20]=3"]
//!
//! [stats]
//! jobs = ["tally", "fit-rhs"]
//!
//! [[tda]]
//! name = "coeffs"
//! columns = ["a1", "a2", "a3", "a4:slog", "a6:slog"]
//!
//! [[ml]]
//! name = "rank-mixed"
//! target = "rank"
//! features = "mixed"
//! ```
//!
//! Sub-job seeds are `derive_seed(seed, i)` where `i` counts sub-jobs in
//! plan order: validate, stats jobs, tda blocks, ml blocks, reproduce ids.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::reproduce::{self, ReproduceOptions};
use super::tasks::{parse_columns, FeatureSet, ValidateSettings};
use super::JobError;
use crate::features::Column;
use crate::ml::{GbtParams, ModelKind};
use crate::tda::{PipelineConfig, Split, DEFAULT_SIMPLEX_BUDGET};

pub const CONFIG_VERSION: u32 = 1;

pub const STATS_JOBS: &[&str] =
    &["tally", "scatter", "pmf", "joint", "fit-d", "fit-rhs", "perm", "rank-panels", "boxplots", "corr", "groupstats"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub version: u32,
    pub name: String,
    pub cache: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub validate: Option<ValidateSettings>,
    pub stats: Option<StatsConfig>,
    #[serde(default)]
    pub tda: Vec<TdaConfig>,
    #[serde(default)]
    pub ml: Vec<MlConfig>,
    #[serde(default)]
    pub reproduce: Vec<String>,
    #[serde(default)]
    pub reproduce_options: ReproduceOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub jobs: Vec<String>,
    pub restarts: usize,
    pub n_perm: usize,
    pub perm_sample: usize,
    pub nbins: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig { jobs: Vec::new(), restarts: 50, n_perm: 199, perm_sample: 500, nbins: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdaConfig {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(default)]
    pub split: Split,
    #[serde(default = "default_tda_n")]
    pub n: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Omitted: chosen automatically.
    pub max_eps: Option<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub keep_zero: bool,
}

fn default_tda_n() -> usize {
    100
}

fn default_max_dim() -> usize {
    1
}

fn default_budget() -> usize {
    DEFAULT_SIMPLEX_BUDGET
}

impl TdaConfig {
    pub fn pipeline(&self, seed: u64) -> Result<PipelineConfig, JobError> {
        if let Some(e) = self.max_eps.filter(|e| !(*e > 0.0)) {
            return Err(JobError::Config(format!("tda {}: max_eps must be positive, got {e}", self.name)));
        }
        Ok(PipelineConfig {
            columns: parse_columns(&self.columns)?,
            n_sample: self.n,
            seed,
            max_dim: self.max_dim,
            max_eps: self.max_eps.unwrap_or(f64::INFINITY),
            budget: self.budget,
            split: self.split,
            keep_zero: self.keep_zero,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlConfig {
    pub name: String,
    pub target: String,
    #[serde(default = "default_features")]
    pub features: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Seeded subsample size; all rows when omitted.
    pub sample: Option<usize>,
    #[serde(default)]
    pub gbt: GbtParams,
}

fn default_features() -> String {
    "coefficients".into()
}

fn default_model() -> String {
    "gbt".into()
}

fn default_k() -> usize {
    5
}

impl MlConfig {
    pub fn parsed(&self) -> Result<(Column, FeatureSet, ModelKind), JobError> {
        let target: Column = self.target.parse().map_err(|e: String| JobError::Config(format!("ml {}: {e}", self.name)))?;
        let features: FeatureSet = self.features.parse()?;
        let model: ModelKind = self.model.parse()?;
        Ok((target, features, model))
    }
}

/// One schedulable unit of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    Validate(ValidateSettings),
    Stats(String, StatsConfig),
    Tda(TdaConfig),
    Ml(MlConfig),
    Reproduce(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannedJob {
    /// Unique name; also the stem of the job's output files.
    pub name: String,
    pub seed: u64,
    pub job: Job,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<JobConfig, JobError> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| JobError::Config(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(JobError::Config(format!("config version {} is not supported (expected {CONFIG_VERSION})", cfg.version)));
        }
        Ok(cfg)
    }

    /// Reads a config and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<(JobConfig, String), JobError> {
        let text = std::fs::read_to_string(path).map_err(|e| JobError::Config(format!("reading {}: {e}", path.display())))?;
        let mut cfg = JobConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.cache, &mut cfg.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok((cfg, text))
    }

    /// Expands the config into sub-jobs and checks every parameter that can
    /// be checked without data.
    pub fn plan(&self) -> Result<Vec<PlannedJob>, JobError> {
        let mut jobs: Vec<(String, Job)> = Vec::new();
        if let Some(v) = &self.validate {
            for e in &v.expect_rank {
                e.parse::<super::tasks::RankExpectation>()?;
            }
            jobs.push(("validate".into(), Job::Validate(v.clone())));
        }
        if let Some(s) = &self.stats {
            for j in &s.jobs {
                if !STATS_JOBS.contains(&j.as_str()) {
                    return Err(JobError::Config(format!("unknown stats job {j:?}; valid jobs: {}", STATS_JOBS.join(", "))));
                }
                jobs.push((format!("stats-{j}"), Job::Stats(j.clone(), s.clone())));
            }
        }
        for t in &self.tda {
            t.pipeline(0)?;
            jobs.push((format!("tda-{}", t.name), Job::Tda(t.clone())));
        }
        for m in &self.ml {
            m.parsed()?;
            jobs.push((format!("ml-{}", m.name), Job::Ml(m.clone())));
        }
        for id in &self.reproduce {
            if !reproduce::is_known(id) {
                return Err(reproduce::unknown_id(id));
            }
            jobs.push((id.clone(), Job::Reproduce(id.clone())));
        }
        if jobs.is_empty() {
            return Err(JobError::Config("config selects no jobs".into()));
        }
        let mut names: Vec<&str> = jobs.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(JobError::Config(format!("duplicate job name {:?}", w[0])));
        }
        if let Some((n, _)) = jobs.iter().find(|(n, _)| n.is_empty() || n.contains(['/', '\\'])) {
            return Err(JobError::Config(format!("job name {n:?} is not a valid file stem")));
        }
        Ok(jobs
            .into_iter()
            .enumerate()
            .map(|(i, (name, job))| PlannedJob { name, seed: super::derive_seed(self.seed, i as u64), job })
            .collect())
    }
}
