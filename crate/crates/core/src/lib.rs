//! Changepoint detection for temporally ordered angular data.
//!
//! Variation of an angle is measured by the "square of an angle": the
//! proportionate area it spans on a horn torus. Averaging it over
//! mean-centered observations gives the curved variance. Three tests build on
//! it:
//!
//! * [`changepoint::sacc_test`]: change in concentration,
//! * [`changepoint::cvmc_test`]: change in mean direction at known concentration,
//! * [`changepoint::sagc_test`]: change in either or both.
//!
//! Null laws are simulated in [`calibration`]; [`segmentation`] applies a
//! test recursively to find several changepoints; [`harness`] reruns the
//! size/power and cutoff studies; [`io`] covers ingestion, reports and the
//! circular temporal plot.
//!
//! The geometry, summary statistics and CUSUM layers are generic over
//! [`Scalar`] (`f32` or `f64`); aliases for the common `f64` instantiations
//! are exported below. Simulation and calibration run in `f64`.

pub mod calibration;
pub mod changepoint;
pub mod circular;
pub mod cusum;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod quad;
pub mod scalar;
pub mod segmentation;
pub mod special;

pub use calibration::{CalibrationInfo, CalibrationKey, CalibrationSample, CalibrationStore, Law};
pub use changepoint::{CvmcFamily, CvmcModel, Method, TestReport};
pub use distributions::{DistributionSpec, RngStream, Sampler};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use segmentation::{SegmentNode, SegmentTree, SegmentationConfig};

pub type TorusPoint = geometry::TorusPoint<f64>;
pub type TorusShape = geometry::TorusShape<f64>;
pub type CornerAreas = geometry::CornerAreas<f64>;
pub type AngleSeries = circular::AngleSeries<f64>;
pub type CircularSummary = circular::CircularSummary<f64>;
pub type CusumProfile = cusum::CusumProfile<f64>;

pub type TorusPointF32 = geometry::TorusPoint<f32>;
pub type AngleSeriesF32 = circular::AngleSeries<f32>;
