//! Spatial interpolation: inverse distance weighting, completely regularized
//! spline radial basis functions, and ordinary kriging with first-order trend
//! removal, plus empirical variogram construction and Gaussian model fitting.
//!
//! Radial quantities (neighbor search, basis functions, variograms) use
//! great-circle kilometers. The trend surface is fitted in projected
//! kilometers.

mod idw;
mod kriging;
mod neighbors;
mod rbf;
mod trend;
mod variogram;

pub use idw::idw_predict;
pub use kriging::{ok_full_predict, ok_predict, ok_weights, KrigingConfig, KrigingWeights};
pub use neighbors::{select_neighbors, Neighbor, NeighborPolicy, COINCIDENCE_KM};
pub use rbf::{crs_basis, rbf_predict};
pub use trend::{detrend_first_order, Trend};
pub use variogram::{
    empirical_variogram, fit_variogram, gaussian_variogram, EmpiricalVariogram, LagBin,
    VariogramModel, DEFAULT_LAGS, DEFAULT_LAG_KM, DEFAULT_RANGE_KM, MAX_PAIR_DISTANCE_KM,
};

use serde::Serialize;

use crate::geo::GeoCoord;

/// A value observed at a location, tagged with its station id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample<T> {
    pub id: String,
    pub location: GeoCoord<T>,
    pub value: T,
}

impl<T> Sample<T> {
    pub fn new(id: impl Into<String>, location: GeoCoord<T>, value: T) -> Self {
        Self {
            id: id.into(),
            location,
            value,
        }
    }
}
