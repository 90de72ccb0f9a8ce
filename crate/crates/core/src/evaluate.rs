//! Leave-one-out cross-validation, RMS scoring, cross-validated parameter
//! search and summary statistics.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::GeoCoord;
use crate::ingest::{ObservationSet, Station, Variable};
use crate::interpolate::{
    idw_predict, ok_full_predict, rbf_predict, KrigingConfig, NeighborPolicy, Sample,
};
use crate::scalar::Scalar;

/// Grid candidates evaluated before refinement.
pub const GRID_CANDIDATES: usize = 15;
/// Golden-section iterations around the best grid cell.
pub const GOLDEN_ITERATIONS: usize = 20;

pub const DEFAULT_IDW_SEARCH: (f64, f64) = (0.5, 4.0);
pub const DEFAULT_RBF_SEARCH: (f64, f64) = (1e-3, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "IDW")]
    Idw,
    #[serde(rename = "RBF")]
    Rbf,
    #[serde(rename = "OK")]
    Ok,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Idw, Method::Rbf, Method::Ok];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Idw => "IDW",
            Method::Rbf => "RBF",
            Method::Ok => "OK",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "idw" => Ok(Method::Idw),
            "rbf" => Ok(Method::Rbf),
            "ok" => Ok(Method::Ok),
            _ => Err(Error::input(format!(
                "unknown method {s:?}; expected one of idw, rbf, ok"
            ))),
        }
    }
}

/// Parameters for all three interpolators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodParams<T> {
    pub idw_power: T,
    pub rbf_sigma: T,
    pub kriging: KrigingConfig<T>,
    pub neighbor_policy: NeighborPolicy,
}

impl<T: Scalar> Default for MethodParams<T> {
    fn default() -> Self {
        Self {
            idw_power: T::lit(2.0),
            rbf_sigma: T::lit(0.05),
            kriging: KrigingConfig::default(),
            neighbor_policy: NeighborPolicy::default(),
        }
    }
}

impl<T: Scalar> MethodParams<T> {
    /// The tunable parameter for `method`, if it has one.
    pub fn tuned(&self, method: Method) -> Option<T> {
        match method {
            Method::Idw => Some(self.idw_power),
            Method::Rbf => Some(self.rbf_sigma),
            Method::Ok => None,
        }
    }

    fn with(&self, method: Method, value: T) -> Self {
        let mut p = *self;
        match method {
            Method::Idw => p.idw_power = value,
            Method::Rbf => p.rbf_sigma = value,
            Method::Ok => {}
        }
        p
    }
}

pub fn predict<T: Scalar>(
    method: Method,
    samples: &[Sample<T>],
    target: GeoCoord<T>,
    params: &MethodParams<T>,
) -> Result<T> {
    match method {
        Method::Idw => idw_predict(samples, target, params.idw_power, params.neighbor_policy),
        Method::Rbf => rbf_predict(samples, target, params.rbf_sigma, params.neighbor_policy),
        Method::Ok => ok_full_predict(samples, target, &params.kriging, params.neighbor_policy),
    }
}

/// Joins readings with station locations, in ascending station-id order.
pub fn samples_for<T: Scalar>(
    obs: &ObservationSet<T>,
    stations: &[Station<T>],
) -> Result<Vec<Sample<T>>> {
    let by_id: HashMap<&str, &Station<T>> = stations
        .iter()
        .map(|s| (s.station_id.as_str(), s))
        .collect();
    obs.readings
        .iter()
        .map(|(id, &value)| {
            let st = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::input(format!("reading for unknown station {id:?}")))?;
            Ok(Sample::new(id.clone(), st.location, value))
        })
        .collect()
}

/// `sqrt(Σe²/n)`.
pub fn rms<T: Scalar>(errors: &[T]) -> Result<T> {
    if errors.is_empty() {
        return Err(Error::input("RMS of an empty error list"));
    }
    let ss: T = errors.iter().map(|&e| e * e).sum();
    Ok((ss / T::from_count(errors.len())).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationError<T> {
    pub station_id: String,
    pub observed: T,
    pub predicted: T,
    /// `predicted − observed`
    pub error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValReport<T> {
    pub method: Method,
    pub variable: Variable,
    pub timestamp: String,
    pub errors: Vec<StationError<T>>,
    pub rms: T,
    pub params: MethodParams<T>,
}

/// Leave-one-out errors over `samples`, in input order.
pub fn loocv_samples<T: Scalar>(
    method: Method,
    samples: &[Sample<T>],
    params: &MethodParams<T>,
) -> Result<Vec<StationError<T>>> {
    let need = params.neighbor_policy.min_neighbors() + 1;
    if samples.len() < need {
        return Err(Error::input(format!(
            "cross-validation needs at least {need} stations, got {}",
            samples.len()
        )));
    }
    (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let held = &samples[i];
            let rest: Vec<Sample<T>> = samples
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s.clone())
                .collect();
            let predicted = predict(method, &rest, held.location, params)?;
            Ok(StationError {
                station_id: held.id.clone(),
                observed: held.value,
                predicted,
                error: predicted - held.value,
            })
        })
        .collect()
}

pub fn loocv<T: Scalar>(
    method: Method,
    obs: &ObservationSet<T>,
    stations: &[Station<T>],
    params: &MethodParams<T>,
) -> Result<CrossValReport<T>> {
    let samples = samples_for(obs, stations)?;
    let errors = loocv_samples(method, &samples, params)?;
    let rms = rms(&errors.iter().map(|e| e.error).collect::<Vec<_>>())?;
    Ok(CrossValReport {
        method,
        variable: obs.variable,
        timestamp: obs.timestamp.clone(),
        errors,
        rms,
        params: *params,
    })
}

/// Closed search interval for a tuned parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchInterval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> SearchInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo > T::zero() && lo < hi && hi.is_finite()) {
            return Err(Error::input(format!(
                "search interval needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn default_for(method: Method) -> Self {
        let (lo, hi) = match method {
            Method::Rbf => DEFAULT_RBF_SEARCH,
            _ => DEFAULT_IDW_SEARCH,
        };
        Self {
            lo: T::lit(lo),
            hi: T::lit(hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tuned<T> {
    pub params: MethodParams<T>,
    pub rms: T,
}

/// Parameter search space: linear for IDW power, logarithmic for the RBF kernel.
struct Axis {
    log: bool,
}

impl Axis {
    fn forward<T: Scalar>(&self, v: T) -> T {
        if self.log {
            v.ln()
        } else {
            v
        }
    }

    fn inverse<T: Scalar>(&self, u: T) -> T {
        if self.log {
            u.exp()
        } else {
            u
        }
    }
}

/// Cross-validated search for the method's tunable parameter.
///
/// Evaluates [`GRID_CANDIDATES`] evenly spaced candidates (log-spaced for the
/// RBF kernel), then runs [`GOLDEN_ITERATIONS`] golden-section steps over the
/// cells adjacent to the best candidate. A refined value replaces the grid
/// winner only if it lowers the RMS; near-ties go to the smaller parameter.
/// Kriging has no tuned parameter and is returned unchanged.
pub fn optimize_parameter<T: Scalar>(
    method: Method,
    samples: &[Sample<T>],
    params: &MethodParams<T>,
    search: SearchInterval<T>,
) -> Result<Tuned<T>> {
    let score = |p: &MethodParams<T>| -> Result<T> {
        match loocv_samples(method, samples, p) {
            Ok(errs) => rms(&errs.iter().map(|e| e.error).collect::<Vec<_>>()),
            // ill-conditioned candidates lose rather than abort the search
            Err(Error::Numerical(_)) => Ok(T::infinity()),
            Err(e) => Err(e),
        }
    };
    if method == Method::Ok {
        return Ok(Tuned {
            params: *params,
            rms: score(params)?,
        });
    }

    let scale = samples.iter().fold(T::zero(), |m, s| m.max(s.value.abs()));
    let tie = T::lit(1e-12) * scale.max(T::one());
    let improves = |new: T, best: T| new < best - tie;

    let axis = Axis {
        log: method == Method::Rbf,
    };
    let (u_lo, u_hi) = (axis.forward(search.lo), axis.forward(search.hi));
    let step = (u_hi - u_lo) / T::from_count(GRID_CANDIDATES - 1);
    let grid: Vec<T> = (0..GRID_CANDIDATES)
        .map(|i| {
            if i == 0 {
                search.lo
            } else if i == GRID_CANDIDATES - 1 {
                search.hi
            } else {
                axis.inverse(u_lo + step * T::from_count(i))
            }
        })
        .collect();
    let scores: Vec<T> = grid
        .iter()
        .map(|&v| score(&params.with(method, v)))
        .collect::<Result<_>>()?;

    let mut best_i = 0;
    for i in 1..GRID_CANDIDATES {
        if improves(scores[i], scores[best_i]) {
            best_i = i;
        }
    }
    let (mut best_v, mut best_rms) = (grid[best_i], scores[best_i]);
    if !best_rms.is_finite() {
        return Err(Error::numerical(format!(
            "every {method} candidate in [{}, {}] failed",
            search.lo, search.hi
        )));
    }

    // golden-section refinement on the bracket around the grid winner
    let mut a = axis.forward(grid[best_i.saturating_sub(1)]);
    let mut b = axis.forward(grid[(best_i + 1).min(GRID_CANDIDATES - 1)]);
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = score(&params.with(method, axis.inverse(c)))?;
    let mut fd = score(&params.with(method, axis.inverse(d)))?;
    let mut refined = vec![(c, fc), (d, fd)];
    for _ in 0..GOLDEN_ITERATIONS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(&params.with(method, axis.inverse(c)))?;
            refined.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(&params.with(method, axis.inverse(d)))?;
            refined.push((d, fd));
        }
    }
    refined.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite parameters"));
    for (u, f) in refined {
        if improves(f, best_rms) {
            best_v = axis.inverse(u);
            best_rms = f;
        }
    }
    Ok(Tuned {
        params: params.with(method, best_v),
        rms: best_rms,
    })
}

/// Sample mean, sample standard deviation (n − 1) and CV%.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats<T> {
    pub variable: Variable,
    pub timestamp: String,
    pub count: usize,
    pub mean: T,
    pub std_dev: T,
    /// `100·std/mean`, defined only for a positive mean.
    pub cv_percent: Option<T>,
}

pub fn describe<T: Scalar>(values: &[T]) -> Result<(T, T, Option<T>)> {
    if values.len() < 2 {
        return Err(Error::input(format!(
            "summary statistics need at least 2 readings, got {}",
            values.len()
        )));
    }
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let std_dev = (ss / (n - T::one())).sqrt();
    let cv = (mean > T::zero()).then(|| T::lit(100.0) * std_dev / mean);
    Ok((mean, std_dev, cv))
}

pub fn summary_stats<T: Scalar>(obs: &ObservationSet<T>) -> Result<SummaryStats<T>> {
    let values: Vec<T> = obs.values().collect();
    let (mean, std_dev, cv_percent) = describe(&values)?;
    Ok(SummaryStats {
        variable: obs.variable,
        timestamp: obs.timestamp.clone(),
        count: values.len(),
        mean,
        std_dev,
        cv_percent,
    })
}

/// One cell of the method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmsCell<T> {
    pub method: Method,
    pub variable: Variable,
    pub timestamp: String,
    pub rms: T,
    /// The cross-validated parameter; `None` for kriging.
    pub optimized_param: Option<T>,
}

/// Tunes (IDW, RBF) and cross-validates every method on every observation
/// set. Rows are method-major, in the order given.
pub fn compare_methods<T: Scalar>(
    obs_sets: &[ObservationSet<T>],
    stations: &[Station<T>],
    methods: &[Method],
    params: &MethodParams<T>,
) -> Result<Vec<RmsCell<T>>> {
    let samples: Vec<Vec<Sample<T>>> = obs_sets
        .iter()
        .map(|o| samples_for(o, stations))
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(methods.len() * obs_sets.len());
    for &method in methods {
        for (obs, samples) in obs_sets.iter().zip(&samples) {
            let tuned =
                optimize_parameter(method, samples, params, SearchInterval::default_for(method))?;
            cells.push(RmsCell {
                method,
                variable: obs.variable,
                timestamp: obs.timestamp.clone(),
                rms: tuned.rms,
                optimized_param: tuned.params.tuned(method),
            });
        }
    }
    Ok(cells)
}
