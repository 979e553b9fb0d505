//! Vietoris-Rips persistent homology.

mod persistence;
mod pipeline;
mod rips;

pub use persistence::{betti_at, persistence, persistence_with, Barcode, Interval};
pub use pipeline::{barcode_for_records, barcode_pipeline, connectivity_radius, enclosing_radius, BarcodeReport, PipelineConfig, Split};
pub use rips::{build_rips, Filtration, PointCloud, Simplex, DEFAULT_SIMPLEX_BUDGET};

#[derive(Debug, thiserror::Error)]
pub enum TdaError {
    #[error("invalid point cloud: {0}")]
    Cloud(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("simplex budget {budget} exceeded ({reached} simplices generated); lower max_eps, max_dim or the sample size")]
    Budget { budget: usize, reached: usize },
    #[error("sampling failed: {0}")]
    Sample(String),
}
