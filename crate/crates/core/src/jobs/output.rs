use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::JobError;

/// Version of every JSON envelope and CSV preamble written by the jobs.
pub const SCHEMA_VERSION: u32 = 1;

/// A report ready to be written: a JSON envelope or a documented CSV table.
#[derive(Clone, Debug, PartialEq)]
pub enum Doc {
    Json(Envelope),
    Csv(CsvDoc),
}

/// Field order is the on-disk key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema_version: u32,
    pub kind: String,
    pub settings: serde_json::Value,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvDoc {
    pub kind: String,
    /// `(column, description)`, one per header column.
    pub columns: Vec<(String, String)>,
    pub notes: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Doc {
    pub fn json<S: Serialize, D: Serialize>(kind: &str, settings: &S, data: &D) -> Result<Doc, JobError> {
        let enc = |v: serde_json::Result<serde_json::Value>| v.map_err(|e| JobError::Numeric(format!("serializing {kind}: {e}")));
        Ok(Doc::Json(Envelope {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            settings: enc(serde_json::to_value(settings))?,
            data: enc(serde_json::to_value(data))?,
        }))
    }

    pub fn csv(kind: &str, columns: &[(&str, &str)], rows: Vec<Vec<String>>) -> Doc {
        Doc::Csv(CsvDoc {
            kind: kind.to_string(),
            columns: columns.iter().map(|(c, d)| (c.to_string(), d.to_string())).collect(),
            notes: Vec::new(),
            rows,
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Doc {
        if let Doc::Csv(c) = &mut self {
            c.notes.push(note.into());
        }
        self
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Doc::Json(_) => "json",
            Doc::Csv(_) => "csv",
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, JobError> {
        match self {
            Doc::Json(v) => {
                let mut b = serde_json::to_vec_pretty(v).map_err(|e| JobError::Numeric(e.to_string()))?;
                b.push(b'\n');
                Ok(b)
            }
            Doc::Csv(c) => {
                let mut out = format!("# schema_version={SCHEMA_VERSION} kind={}\n", c.kind);
                for (col, doc) in &c.columns {
                    out.push_str(&format!("# {col}: {doc}\n"));
                }
                for n in &c.notes {
                    out.push_str(&format!("# {n}\n"));
                }
                let mut w = csv::Writer::from_writer(out.into_bytes());
                let io = |e: csv::Error| JobError::Numeric(e.to_string());
                w.write_record(c.columns.iter().map(|(col, _)| col)).map_err(io)?;
                for r in &c.rows {
                    w.write_record(r).map_err(io)?;
                }
                w.into_inner().map_err(|e| JobError::Numeric(e.to_string()))
            }
        }
    }
}

/// Formats a float for CSV cells: shortest round-trip form, `inf`/`nan` spelled out.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn write_doc(path: &Path, doc: &Doc) -> Result<Artifact, JobError> {
    let bytes = doc.to_bytes()?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| JobError::Config(format!("creating {}: {e}", dir.display())))?;
    }
    std::fs::write(path, &bytes).map_err(|e| JobError::Config(format!("writing {}: {e}", path.display())))?;
    Ok(Artifact {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Output directory of a run.
#[derive(Clone, Debug)]
pub struct Outputs {
    pub dir: PathBuf,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Outputs, JobError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| JobError::Config(format!("creating {}: {e}", dir.display())))?;
        Ok(Outputs { dir })
    }

    /// Writes `<stem>.<ext>` and returns its record.
    pub fn write(&self, stem: &str, doc: &Doc) -> Result<Artifact, JobError> {
        let name = format!("{stem}.{}", doc.extension());
        let mut a = write_doc(&self.dir.join(&name), doc)?;
        a.file = name;
        Ok(a)
    }

    /// Failure marker left next to partial outputs.
    pub fn mark_failed(&self, stem: &str, err: &JobError) -> Result<Artifact, JobError> {
        let name = format!("{stem}.FAILED");
        let text = format!("exit_code={}\n{err}\n", err.exit_code());
        std::fs::write(self.dir.join(&name), &text).map_err(|e| JobError::Config(format!("writing {name}: {e}")))?;
        Ok(Artifact { file: name, sha256: sha256_hex(text.as_bytes()), bytes: text.len() as u64 })
    }
}
