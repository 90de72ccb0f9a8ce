//! Geostatistics for road weather station networks.
//!
//! The crate covers three analyses:
//!
//! * network coverage: station counts, mean nearest-neighbor spacing and
//!   counts inside regions of interest, for single networks and unions;
//! * point-pattern clustering: Ripley's K / L functions compared against
//!   envelopes of complete-spatial-randomness simulations;
//! * interpolation of weather variables with IDW, a completely regularized
//!   spline RBF and trend-removed ordinary kriging, scored by leave-one-out
//!   cross-validation.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the file loaders and
//! the command-line tool use.

// `!(x > 0)` deliberately rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluate;
pub mod geo;
pub mod ingest;
pub mod interpolate;
pub mod linalg;
pub mod pattern;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod synth;

pub use error::{Error, Result};
pub use evaluate::Method;
pub use ingest::{Network, Variable};
pub use interpolate::NeighborPolicy;
pub use pattern::Verdict;
pub use scalar::Scalar;

pub type GeoCoord = geo::GeoCoord<f64>;
pub type PlanarPoint = geo::PlanarPoint<f64>;
pub type RegionPolygon = geo::RegionPolygon<f64>;
pub type Station = ingest::Station<f64>;
pub type ObservationSet = ingest::ObservationSet<f64>;
pub type StudyWindow = pattern::StudyWindow<f64>;
pub type LFunctionResult = pattern::LFunctionResult<f64>;
pub type CoverageReport = pattern::CoverageReport<f64>;
pub type Sample = interpolate::Sample<f64>;
pub type VariogramModel = interpolate::VariogramModel<f64>;
pub type EmpiricalVariogram = interpolate::EmpiricalVariogram<f64>;
pub type MethodParams = evaluate::MethodParams<f64>;
pub type CrossValReport = evaluate::CrossValReport<f64>;
pub type SummaryStats = evaluate::SummaryStats<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type GeoCoord = crate::geo::GeoCoord<f32>;
    pub type PlanarPoint = crate::geo::PlanarPoint<f32>;
    pub type Station = crate::ingest::Station<f32>;
    pub type Sample = crate::interpolate::Sample<f32>;
    pub type VariogramModel = crate::interpolate::VariogramModel<f32>;
    pub type MethodParams = crate::evaluate::MethodParams<f32>;
}
