//! Geographic primitives: coordinates, great-circle distance, a local planar
//! projection and polygon containment.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// A WGS84 latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeoCoord<T> {
    lat: T,
    lon: T,
}

impl<T: Scalar> GeoCoord<T> {
    pub fn new(lat: T, lon: T) -> Result<Self> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::input(format!(
                "non-finite coordinate ({lat}, {lon})"
            )));
        }
        if lat.abs() > T::lit(90.0) {
            return Err(Error::input(format!("latitude {lat} outside [-90, 90]")));
        }
        if lon.abs() > T::lit(180.0) {
            return Err(Error::input(format!("longitude {lon} outside [-180, 180]")));
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> T {
        self.lat
    }

    pub fn lon(&self) -> T {
        self.lon
    }
}

/// Kilometers east (`x`) and north (`y`) of a projection reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarPoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> PlanarPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A named polygon: first ring is the outer boundary, the rest are holes.
///
/// Rings are stored closed (first vertex repeated at the end).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPolygon<T> {
    name: String,
    rings: Vec<Vec<GeoCoord<T>>>,
}

impl<T: Scalar> RegionPolygon<T> {
    pub fn new(name: impl Into<String>, rings: Vec<Vec<GeoCoord<T>>>) -> Result<Self> {
        let name = name.into();
        if rings.is_empty() {
            return Err(Error::input(format!("region {name:?} has no rings")));
        }
        let mut closed = Vec::with_capacity(rings.len());
        for (k, mut ring) in rings.into_iter().enumerate() {
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
            if ring.len() < 3 {
                return Err(Error::input(format!(
                    "region {name:?} ring {k} has {} distinct vertices, need at least 3",
                    ring.len()
                )));
            }
            ring.push(ring[0]);
            closed.push(ring);
        }
        Ok(Self {
            name,
            rings: closed,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rings(&self) -> &[Vec<GeoCoord<T>>] {
        &self.rings
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km<T: Scalar>(a: GeoCoord<T>, b: GeoCoord<T>) -> T {
    let two = T::lit(2.0);
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    // Half-angle sines are squared, so only the magnitude of the deltas matters;
    // taking abs keeps the result bit-identical under argument swap.
    let dlat = (lat2 - lat1).abs();
    let dlon = (b.lon - a.lon).abs().to_radians();
    let s_lat = (dlat / two).sin();
    let s_lon = (dlon / two).sin();
    let cos_prod = if lat1 <= lat2 {
        lat1.cos() * lat2.cos()
    } else {
        lat2.cos() * lat1.cos()
    };
    let h = (s_lat * s_lat + cos_prod * s_lon * s_lon).min(T::one());
    two * T::lit(EARTH_RADIUS_KM) * h.sqrt().asin()
}

/// Equirectangular projection about `reference`: the reference maps to the origin.
pub fn project<T: Scalar>(points: &[GeoCoord<T>], reference: GeoCoord<T>) -> Vec<PlanarPoint<T>> {
    let r = T::lit(EARTH_RADIUS_KM);
    let cos_ref = reference.lat.to_radians().cos();
    points
        .iter()
        .map(|p| PlanarPoint {
            x: r * (p.lon - reference.lon).to_radians() * cos_ref,
            y: r * (p.lat - reference.lat).to_radians(),
        })
        .collect()
}

/// Inverse of [`project`] for a single point.
pub fn unproject<T: Scalar>(point: PlanarPoint<T>, reference: GeoCoord<T>) -> GeoCoord<T> {
    let r = T::lit(EARTH_RADIUS_KM);
    let cos_ref = reference.lat.to_radians().cos();
    GeoCoord {
        lat: reference.lat + (point.y / r).to_degrees(),
        lon: reference.lon + (point.x / (r * cos_ref)).to_degrees(),
    }
}

/// Arithmetic mean of latitudes and longitudes; a convenient projection reference.
pub fn centroid<T: Scalar>(points: &[GeoCoord<T>]) -> Option<GeoCoord<T>> {
    if points.is_empty() {
        return None;
    }
    let n = T::from_count(points.len());
    let lat = points.iter().map(|p| p.lat).sum::<T>() / n;
    let lon = points.iter().map(|p| p.lon).sum::<T>() / n;
    Some(GeoCoord { lat, lon })
}

/// Even-odd containment test over all rings. Points on any edge are inside.
pub fn point_in_polygon<T: Scalar>(p: GeoCoord<T>, poly: &RegionPolygon<T>) -> bool {
    let (px, py) = (p.lon, p.lat);
    let mut inside = false;
    for ring in &poly.rings {
        for edge in ring.windows(2) {
            let (ax, ay) = (edge[0].lon, edge[0].lat);
            let (bx, by) = (edge[1].lon, edge[1].lat);
            if on_segment(px, py, ax, ay, bx, by) {
                return true;
            }
            if (ay > py) != (by > py) {
                let x_cross = ax + (py - ay) * (bx - ax) / (by - ay);
                if px < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

fn on_segment<T: Scalar>(px: T, py: T, ax: T, ay: T, bx: T, by: T) -> bool {
    let cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    let len = (bx - ax).hypot(by - ay);
    let tol = T::lit(1e3) * T::epsilon() * len.max(T::one()) * len.max(T::one());
    cross.abs() <= tol
        && px >= ax.min(bx) - tol
        && px <= ax.max(bx) + tol
        && py >= ay.min(by) - tol
        && py <= ay.max(by) + tol
}

/// Symmetric matrix of great-circle distances with a zero diagonal.
pub fn pairwise_distances<T: Scalar>(points: &[GeoCoord<T>]) -> DenseMatrix<T> {
    let n = points.len();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = haversine_km(points[i], points[j]);
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    m
}
