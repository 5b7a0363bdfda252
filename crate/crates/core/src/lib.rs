//! Real-time detection of rock-type (lithotype) changes from MWD drilling
//! telemetry.
//!
//! The pipeline: ingest depth-indexed wells onto a 0.1 m grid, impute
//! missing channels, derive drilling features, train a gradient-boosted
//! tree classifier for the per-depth shale probability, and run an online
//! change-detection pass over the probability stream. The evaluation
//! harness scores everything under leave-one-well-out cross-validation;
//! a synthetic field generator provides reproducible data.
//!
//! All numeric code is generic over the scalar type via [`num::Real`];
//! the `*64` / `*32` aliases below pin the common instantiations.

pub mod detect;
pub mod error;
pub mod gbdt;
pub mod harness;
pub mod metrics;
pub mod num;
pub mod preprocess;
pub mod synth;
pub mod well;

pub use error::{Error, Result};
pub use num::Real;

pub type WellSeries64 = well::WellSeries<f64>;
pub type Dataset64 = well::Dataset<f64>;
pub type FeatureMatrix64 = preprocess::FeatureMatrix<f64>;
pub type GbdtConfig64 = gbdt::GbdtConfig<f64>;
pub type GbdtModel64 = gbdt::GbdtModel<f64>;
pub type DetectorConfig64 = detect::DetectorConfig<f64>;
pub type MetricReport64 = metrics::MetricReport<f64>;
pub type PipelineConfig64 = harness::PipelineConfig<f64>;
pub type CvResult64 = harness::CvResult<f64>;

pub type WellSeries32 = well::WellSeries<f32>;
pub type Dataset32 = well::Dataset<f32>;
pub type GbdtModel32 = gbdt::GbdtModel<f32>;
pub type DetectorConfig32 = detect::DetectorConfig<f32>;
