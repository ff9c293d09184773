//! Compressed-domain visual saliency estimation and gaze-based evaluation.
//!
//! The crate has three layers:
//!
//! * model layer ([`models`]) — saliency models operating on block-level
//!   features recovered from a partially decoded bitstream (motion vectors,
//!   DCT coefficients, bits per block), plus two gaze-derived benchmarks;
//! * metric layer ([`metrics`], [`centerbias`]) — AUC, KLD, JD, JSD, NSS and
//!   PCC against eye-tracking data, with local-maximum gaze sampling and
//!   center-bias corrected variants (AUC', JSD', NSS');
//! * reporting layer ([`stats`], [`report`]) — mean/SEM aggregation,
//!   sequence ranking, top-performer counting and SVG charts.
//!
//! [`ingest`] parses the on-disk formats (feature JSONL, gaze CSV, TOML
//! manifest) and [`synth`] generates synthetic datasets with planted
//! saliency for testing and benchmarking.

pub mod centerbias;
pub mod core;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod models;
pub mod report;
pub mod stats;
pub mod synth;

pub use crate::core::{
    FrameFeatures, FrameType, GazePoint, GroundTruthMap, MotionVector, SaliencyMap, Viewing,
    ViewingGeometry,
};
pub use crate::error::Error;
