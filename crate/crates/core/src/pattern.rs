//! Point-pattern statistics: nearest-neighbor spacing, Ripley's K and L
//! functions with complete-spatial-randomness envelopes, and coverage reports
//! for station networks.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{haversine_km, point_in_polygon, GeoCoord, PlanarPoint, RegionPolygon};
use crate::ingest::{merge_networks, Network, Station};
use crate::rng::substream;
use crate::scalar::Scalar;

/// Number of CSR realizations used for envelopes unless configured otherwise.
pub const DEFAULT_SIMULATIONS: usize = 9;
/// Number of distance bands in the default grid.
pub const DEFAULT_BANDS: usize = 40;
/// Fraction of the point extent added on each side of the default window.
pub const WINDOW_MARGIN: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WindowShape<T> {
    BoundingBox {
        min: PlanarPoint<T>,
        max: PlanarPoint<T>,
    },
    Polygon(Vec<PlanarPoint<T>>),
}

/// Planar region (km) within which a pattern is observed and simulated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyWindow<T> {
    shape: WindowShape<T>,
    area: T,
}

impl<T: Scalar> StudyWindow<T> {
    pub fn bounding_box(min: PlanarPoint<T>, max: PlanarPoint<T>) -> Result<Self> {
        let area = (max.x - min.x) * (max.y - min.y);
        if !(max.x > min.x && max.y > min.y && area.is_finite()) {
            return Err(Error::input(
                "study window must have positive width and height",
            ));
        }
        Ok(Self {
            shape: WindowShape::BoundingBox { min, max },
            area,
        })
    }

    /// Simple polygon window (vertices in order, not repeated at the end).
    pub fn polygon(mut vertices: Vec<PlanarPoint<T>>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::input("polygon window needs at least 3 vertices"));
        }
        let n = vertices.len();
        let twice: T = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a.x * b.y - b.x * a.y
            })
            .sum();
        let area = (twice / T::lit(2.0)).abs();
        if !(area > T::zero()) {
            return Err(Error::input("polygon window has zero area"));
        }
        Ok(Self {
            shape: WindowShape::Polygon(vertices),
            area,
        })
    }

    /// Bounding box of `points` grown by [`WINDOW_MARGIN`] of its extent on each side.
    pub fn around(points: &[PlanarPoint<T>]) -> Result<Self> {
        let (min, max) = extent(points).ok_or_else(|| Error::input("no points to bound"))?;
        let m = T::lit(WINDOW_MARGIN);
        let (dx, dy) = ((max.x - min.x) * m, (max.y - min.y) * m);
        Self::bounding_box(
            PlanarPoint::new(min.x - dx, min.y - dy),
            PlanarPoint::new(max.x + dx, max.y + dy),
        )
    }

    pub fn shape(&self) -> &WindowShape<T> {
        &self.shape
    }

    pub fn area(&self) -> T {
        self.area
    }

    pub fn bounds(&self) -> (PlanarPoint<T>, PlanarPoint<T>) {
        match &self.shape {
            WindowShape::BoundingBox { min, max } => (*min, *max),
            WindowShape::Polygon(v) => extent(v).expect("validated polygon is nonempty"),
        }
    }

    pub fn shorter_side(&self) -> T {
        let (min, max) = self.bounds();
        (max.x - min.x).min(max.y - min.y)
    }

    pub fn contains(&self, p: PlanarPoint<T>) -> bool {
        match &self.shape {
            WindowShape::BoundingBox { min, max } => {
                p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y
            }
            WindowShape::Polygon(v) => planar_contains(v, p),
        }
    }

    /// Uniform draw from the window (rejection sampling for polygons).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PlanarPoint<T> {
        let (min, max) = self.bounds();
        loop {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            let p = PlanarPoint::new(
                min.x + (max.x - min.x) * T::lit(u),
                min.y + (max.y - min.y) * T::lit(v),
            );
            if self.contains(p) {
                return p;
            }
        }
    }

    /// `bands` evenly spaced distances ending at a quarter of the shorter side.
    pub fn default_distances(&self, bands: usize) -> Vec<T> {
        let top = self.shorter_side() / T::lit(4.0);
        let n = T::from_count(bands);
        (1..=bands).map(|i| top * T::from_count(i) / n).collect()
    }
}

fn extent<T: Scalar>(points: &[PlanarPoint<T>]) -> Option<(PlanarPoint<T>, PlanarPoint<T>)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(lo, hi), p| {
        (
            PlanarPoint::new(lo.x.min(p.x), lo.y.min(p.y)),
            PlanarPoint::new(hi.x.max(p.x), hi.y.max(p.y)),
        )
    }))
}

fn planar_contains<T: Scalar>(v: &[PlanarPoint<T>], p: PlanarPoint<T>) -> bool {
    let n = v.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross == T::zero()
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
        {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

/// Mean great-circle distance from each location to its nearest other location.
pub fn mean_nn_distance_of<T: Scalar>(locations: &[GeoCoord<T>]) -> Result<T> {
    let n = locations.len();
    if n < 2 {
        return Err(Error::input(format!(
            "nearest-neighbor distance needs at least 2 stations, got {n}"
        )));
    }
    let total: T = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| haversine_km(locations[i], locations[j]))
                .fold(T::infinity(), T::min)
        })
        .sum();
    Ok(total / T::from_count(n))
}

pub fn mean_nn_distance<T: Scalar>(stations: &[Station<T>]) -> Result<T> {
    let locations: Vec<_> = stations.iter().map(|s| s.location).collect();
    mean_nn_distance_of(&locations)
}

fn validate_distances<T: Scalar>(window: &StudyWindow<T>, distances: &[T]) -> Result<()> {
    if distances.is_empty() {
        return Err(Error::input("distance grid is empty"));
    }
    if distances.iter().any(|d| !d.is_finite() || *d < T::zero()) {
        return Err(Error::input("distances must be finite and non-negative"));
    }
    if distances.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("distances must be strictly increasing"));
    }
    let cap = window.shorter_side() / T::lit(2.0);
    let last = distances[distances.len() - 1];
    if last > cap {
        return Err(Error::input(format!(
            "distance {last} km exceeds half the window's shorter side ({cap} km)"
        )));
    }
    Ok(())
}

/// K(d) without precondition checks.
fn k_values<T: Scalar>(points: &[PlanarPoint<T>], area: T, distances: &[T]) -> Vec<T> {
    let n = points.len();
    let mut pair_d: Vec<T> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pair_d.push(points[i].distance(&points[j]));
        }
    }
    pair_d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let scale = area / (T::from_count(n) * T::from_count(n - 1));
    distances
        .iter()
        .map(|&d| {
            let unordered = pair_d.partition_point(|&p| p <= d);
            scale * T::from_count(2 * unordered)
        })
        .collect()
}

/// Ripley's K without edge correction: `K(d) = A / (n(n−1)) · Σ_{i≠j} 1[d_ij ≤ d]`.
pub fn ripley_k<T: Scalar>(
    points: &[PlanarPoint<T>],
    window: &StudyWindow<T>,
    distances: &[T],
) -> Result<Vec<T>> {
    if points.len() < 2 {
        return Err(Error::input(format!(
            "Ripley's K needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
        return Err(Error::input(format!(
            "point ({}, {}) lies outside the study window",
            p.x, p.y
        )));
    }
    validate_distances(window, distances)?;
    Ok(k_values(points, window.area(), distances))
}

/// `L(d) = sqrt(K(d)/π)`.
pub fn ripley_l<T: Scalar>(k_values: &[T]) -> Result<Vec<T>> {
    k_values
        .iter()
        .map(|&k| {
            if k < T::zero() || k.is_nan() {
                Err(Error::numerical(format!("negative K value {k}")))
            } else {
                Ok((k / T::PI()).sqrt())
            }
        })
        .collect()
}

/// L curves of `n_sims` independent uniform patterns of `n_points` points.
///
/// Simulation `i` draws from `substream(seed, i)`, so the output is the same
/// for any thread count.
pub fn simulate_l_curves<T: Scalar>(
    n_points: usize,
    window: &StudyWindow<T>,
    distances: &[T],
    n_sims: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    if n_points < 2 {
        return Err(Error::input("CSR simulation needs at least 2 points"));
    }
    if n_sims < 1 {
        return Err(Error::input("at least one simulation is required"));
    }
    validate_distances(window, distances)?;
    (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let pts: Vec<_> = (0..n_points).map(|_| window.sample(&mut rng)).collect();
            ripley_l(&k_values(&pts, window.area(), distances))
        })
        .collect()
}

/// Pointwise min/max of simulated L curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope<T> {
    pub low: Vec<T>,
    pub high: Vec<T>,
}

impl<T: Scalar> Envelope<T> {
    pub fn from_curves(curves: &[Vec<T>]) -> Option<Self> {
        let first = curves.first()?;
        let mut low = first.clone();
        let mut high = first.clone();
        for curve in &curves[1..] {
            for (k, &v) in curve.iter().enumerate() {
                low[k] = low[k].min(v);
                high[k] = high[k].max(v);
            }
        }
        Some(Self { low, high })
    }
}

pub fn csr_envelope<T: Scalar>(
    n_points: usize,
    window: &StudyWindow<T>,
    distances: &[T],
    n_sims: usize,
    seed: u64,
) -> Result<Envelope<T>> {
    let curves = simulate_l_curves(n_points, window, distances, n_sims, seed)?;
    Ok(Envelope::from_curves(&curves).expect("at least one simulation"))
}

/// Observed L function with its CSR envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LFunctionResult<T> {
    pub distances: Vec<T>,
    pub l_observed: Vec<T>,
    pub envelope_low: Vec<T>,
    pub envelope_high: Vec<T>,
    pub n_simulations: usize,
    pub seed: u64,
}

/// Computes the observed L function and an envelope from `n_sims` CSR patterns
/// with the same point count in the same window.
pub fn l_function<T: Scalar>(
    points: &[PlanarPoint<T>],
    window: &StudyWindow<T>,
    distances: &[T],
    n_sims: usize,
    seed: u64,
) -> Result<LFunctionResult<T>> {
    let l_observed = ripley_l(&ripley_k(points, window, distances)?)?;
    let env = csr_envelope(points.len(), window, distances, n_sims, seed)?;
    Ok(LFunctionResult {
        distances: distances.to_vec(),
        l_observed,
        envelope_low: env.low,
        envelope_high: env.high,
        n_simulations: n_sims,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Clustered,
    Random,
    Dispersed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Clustered => "Clustered",
            Verdict::Random => "Random",
            Verdict::Dispersed => "Dispersed",
        })
    }
}

pub fn classify<T: Scalar>(observed: T, low: T, high: T) -> Verdict {
    if observed > high {
        Verdict::Clustered
    } else if observed < low {
        Verdict::Dispersed
    } else {
        Verdict::Random
    }
}

pub fn cluster_verdict<T: Scalar>(result: &LFunctionResult<T>) -> Vec<Verdict> {
    result
        .l_observed
        .iter()
        .zip(result.envelope_low.iter().zip(&result.envelope_high))
        .map(|(&l, (&lo, &hi))| classify(l, lo, hi))
        .collect()
}

/// One row of a coverage table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow<T> {
    pub label: String,
    pub networks: Vec<Network>,
    pub count_total: usize,
    pub mean_nn_km: T,
    /// Aligned with [`CoverageReport::region_names`].
    pub counts_per_region: Vec<usize>,
    /// Stations inside any listed region.
    pub count_in_regions: usize,
    /// `count_in_regions` relative to the base registry's (combined rows only).
    pub regional_ratio: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport<T> {
    pub region_names: Vec<String>,
    pub rows: Vec<CoverageRow<T>>,
}

fn registry_label<T>(stations: &[Station<T>]) -> (String, Vec<Network>) {
    let mut nets: Vec<Network> = stations.iter().map(|s| s.network).collect();
    nets.sort();
    nets.dedup();
    let label = nets
        .iter()
        .map(Network::as_str)
        .collect::<Vec<_>>()
        .join("+");
    (label, nets)
}

/// Per-registry rows followed by one combined row per non-base registry,
/// each combined row being the union of the first (base) registry with it.
pub fn coverage_report<T: Scalar>(
    registries: &[Vec<Station<T>>],
    regions: &[RegionPolygon<T>],
) -> Result<CoverageReport<T>> {
    if registries.is_empty() {
        return Err(Error::input("coverage report needs at least one registry"));
    }
    if registries.iter().any(Vec::is_empty) {
        return Err(Error::input("every registry must be nonempty"));
    }
    let mut region_names: Vec<String> = Vec::new();
    for r in regions {
        if !region_names.iter().any(|n| n == r.name()) {
            region_names.push(r.name().to_string());
        }
    }

    let row = |stations: &[Station<T>],
               label: String,
               networks: Vec<Network>|
     -> Result<CoverageRow<T>> {
        let mut counts_per_region = vec![0usize; region_names.len()];
        let mut count_in_regions = 0;
        for s in stations {
            let mut any = false;
            for (k, name) in region_names.iter().enumerate() {
                let inside = regions
                    .iter()
                    .filter(|r| r.name() == name)
                    .any(|r| point_in_polygon(s.location, r));
                if inside {
                    counts_per_region[k] += 1;
                    any = true;
                }
            }
            count_in_regions += usize::from(any);
        }
        Ok(CoverageRow {
            label,
            networks,
            count_total: stations.len(),
            mean_nn_km: mean_nn_distance(stations)?,
            counts_per_region,
            count_in_regions,
            regional_ratio: None,
        })
    };

    let mut rows = Vec::new();
    for reg in registries {
        let (label, nets) = registry_label(reg);
        rows.push(row(reg, label, nets)?);
    }
    let base = &registries[0];
    let base_regional = rows[0].count_in_regions;
    for (k, other) in registries.iter().enumerate().skip(1) {
        let merged = merge_networks(&[base.clone(), other.clone()]);
        let label = format!("{} + {}", rows[0].label, rows[k].label);
        let (_, nets) = registry_label(&merged);
        let mut combined = row(&merged, label, nets)?;
        combined.regional_ratio = (base_regional > 0)
            .then(|| T::from_count(combined.count_in_regions) / T::from_count(base_regional));
        rows.push(combined);
    }
    Ok(CoverageReport { region_names, rows })
}
