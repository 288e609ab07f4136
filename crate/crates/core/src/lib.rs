//! Semantic contour dataset construction and evaluation.
//!
//! * [`raster`]: masks, contour maps, probability maps, PNG I/O, morphology.
//! * [`m2c`]: segmentation mask to per-class contour ground truth.
//! * [`matching`]: one-to-one pixel matching under a distance tolerance.
//! * [`metrics`]: threshold sweeps, ODS, OIS and LineIoU.
//! * [`dataset`]: image–text–contour manifests, composition stats, validation.
//! * [`baseline`]: gradient-magnitude predictor for end-to-end runs.
//!
//! Probabilities and scores are generic over [`Scalar`] (`f32` or `f64`);
//! the `*F32` / `*F64` aliases below name the common instantiations.

pub mod baseline;
pub mod dataset;
pub mod error;
pub mod m2c;
pub mod matching;
pub mod metrics;
pub mod raster;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// JSON Schema (draft 2020-12) for a serialized [`metrics::EvalReport`].
pub const EVAL_REPORT_SCHEMA: &str = include_str!("../schema/eval_report.schema.json");

pub type ProbMapF32 = raster::ProbMap<f32>;
pub type ProbMapF64 = raster::ProbMap<f64>;
pub type GrayImageF32 = raster::GrayImage<f32>;
pub type GrayImageF64 = raster::GrayImage<f64>;
pub type EvalReportF32 = metrics::EvalReport<f32>;
pub type EvalReportF64 = metrics::EvalReport<f64>;
pub type PrfF64 = metrics::Prf<f64>;
pub type ThresholdSweepF64 = metrics::ThresholdSweep<f64>;
