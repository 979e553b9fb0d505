//! Job orchestration behind the command-line tool: config files, artifact
//! writers, the reproduction registry and run manifests.

pub mod config;
mod output;
pub mod reproduce;
mod run;
pub mod tasks;

use std::path::Path;

pub use config::JobConfig;
pub use output::{cell, sha256_hex, write_doc, Artifact, CsvDoc, Doc, Envelope, Outputs, SCHEMA_VERSION};
pub use run::{run, JobEntry, JobStatus, Manifest};

use crate::ec::EcError;
use crate::ingest::{parse_table, read_cache, ColumnMap, CurveRecord, IngestError};
use crate::ml::MlError;
use crate::stats::StatsError;
use crate::tda::TdaError;

/// Failure of a job, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum JobError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl JobError {
    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Config(_) => 2,
            JobError::Data(_) => 3,
            JobError::Numeric(_) => 4,
        }
    }
}

impl From<IngestError> for JobError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::MissingColumn(_) | IngestError::Config(_) | IngestError::Io(..) | IngestError::Size { .. } => {
                JobError::Config(e.to_string())
            }
            IngestError::Version { .. } | IngestError::Integrity(_) => JobError::Data(e.to_string()),
        }
    }
}

impl From<StatsError> for JobError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Config(_) => JobError::Config(e.to_string()),
            StatsError::FitFailed(_) => JobError::Numeric(e.to_string()),
            StatsError::Empty | StatsError::Degenerate | StatsError::Domain(_) => JobError::Data(e.to_string()),
        }
    }
}

impl From<TdaError> for JobError {
    fn from(e: TdaError) -> Self {
        match e {
            TdaError::Config(_) | TdaError::Sample(_) | TdaError::Budget { .. } => JobError::Config(e.to_string()),
            TdaError::Cloud(_) => JobError::Data(e.to_string()),
        }
    }
}

impl From<MlError> for JobError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::Config(_) => JobError::Config(e.to_string()),
            MlError::Size(_) | MlError::UndefinedRange | MlError::Degenerate(_) => JobError::Data(e.to_string()),
            MlError::RankDeficient(_) | MlError::NoConvergence { .. } => JobError::Numeric(e.to_string()),
        }
    }
}

impl From<EcError> for JobError {
    fn from(e: EcError) -> Self {
        match e {
            EcError::Precision(_) => JobError::Numeric(e.to_string()),
            EcError::Parse(_) | EcError::Argument(_) | EcError::NotPrime(_) | EcError::PrimeBeyondBound { .. } => {
                JobError::Config(e.to_string())
            }
            _ => JobError::Data(e.to_string()),
        }
    }
}

/// Loads records from a binary cache, or from a table in the fixture CSV
/// layout when the file lacks the cache magic.
pub fn load_records(path: &Path) -> Result<Vec<CurveRecord>, JobError> {
    Ok(load_table(path)?.0)
}

/// Like [`load_records`], also returning source line numbers for CSV input.
pub fn load_table(path: &Path) -> Result<(Vec<CurveRecord>, Option<Vec<usize>>), JobError> {
    if !path.exists() {
        return Err(JobError::Config(format!("input {} does not exist", path.display())));
    }
    let mut head = [0u8; 4];
    let is_cache = std::fs::File::open(path)
        .and_then(|mut f| std::io::Read::read_exact(&mut f, &mut head))
        .map(|_| &head == b"BSDC")
        .unwrap_or(false);
    if is_cache {
        return Ok((read_cache(path)?, None));
    }
    let table = parse_table(path, &ColumnMap::fixture_csv())?;
    if let Some(e) = table.errors.first() {
        return Err(JobError::Data(format!(
            "{}: {} malformed rows, first at line {} ({}: {})",
            path.display(),
            table.errors.len(),
            e.line,
            e.field,
            e.message
        )));
    }
    Ok((table.records, Some(table.lines)))
}

/// Seed of the `index`-th sub-job: a Weyl-sequence step away from the master.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
