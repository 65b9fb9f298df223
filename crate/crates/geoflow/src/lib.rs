//! Extracts individual travel events from chronologically-ordered geotagged
//! message streams, filters spam accounts, resolves locations against the
//! GeoNames gazetteer, and builds weighted global mobility networks at city
//! and country granularity with summary reports.
//!
//! The pipeline stages, in order:
//!
//! 1. [`ingest`] — parse newline-delimited records, group by user and sort
//!    chronologically (spilling to disk beyond a memory budget).
//! 2. [`travel`] — detect travel events between successive records of each
//!    user and apply the spam filters (speed cap, per-user tweet and event
//!    caps).
//! 3. [`gazetteer`] — resolve tagged places and bare coordinates to GeoNames
//!    entries with a two-pass, radius-capped nearest match.
//! 4. [`network`] — aggregate resolved events into directed/undirected
//!    weighted networks between cities or countries.
//! 5. [`report`] — penetration ratios, top edges per continent, per-user
//!    histograms, match-type breakdowns and GeoJSON exports.
//!
//! [`pipeline`] wires the stages together behind a single [`config`] struct;
//! the `geoflow` binary exposes each stage as a subcommand.

pub mod config;
pub mod gazetteer;
pub mod geo;
pub mod ingest;
pub mod network;
pub mod pipeline;
pub mod report;
pub mod travel;

mod output;

pub use config::PipelineConfig;
pub use geo::{haversine_km, BoundingBox, GeoPoint};

use thiserror::Error;

/// Top-level error type for pipeline stages that touch the filesystem or
/// external inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    InFile {
        path: String,
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
