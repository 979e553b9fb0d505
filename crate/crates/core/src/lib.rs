pub mod ec;
pub mod ingest;
pub mod serde_bigint;
pub mod stats;
pub mod features;
pub mod tda;
pub mod ml;
pub mod jobs;
