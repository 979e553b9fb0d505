//! Curve tables: parsing, validation, the binary cache and sampled views.

mod cache;
mod parse;
mod record;
mod validate;
mod view;

pub use cache::{read_cache, read_cache_from, write_cache, write_cache_to, FORMAT_VERSION};
pub use parse::{parse_generators, parse_str, parse_table, write_csv, ColumnMap, ColumnRef, Delimiter, ParsedTable, RowError};
pub use record::{CurveRecord, TORSION_ORDERS};
pub use validate::{validate, Violation};
pub use view::{sample, sample_indices, DatasetView, Filter, SignFilter};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("configuration error: missing column for field {0}")]
    MissingColumn(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("cache format version {found}, this build reads version {expected}; re-run ingest to migrate")]
    Version { found: u8, expected: u8 },
    #[error("cache integrity error: {0}")]
    Integrity(String),
    #[error("requested {requested} rows from a view of {available}")]
    Size { requested: usize, available: usize },
}
