use serde::Serialize;

use super::Sample;
use crate::error::{Error, Result};
use crate::geo::haversine_km;
use crate::scalar::Scalar;

pub const DEFAULT_LAG_KM: f64 = 10.0;
pub const DEFAULT_LAGS: usize = 20;
pub const DEFAULT_RANGE_KM: f64 = 100.0;
/// Pairs farther apart than this never enter the empirical variogram.
pub const MAX_PAIR_DISTANCE_KM: f64 = 200.0;

/// Gaussian semivariogram in the effective-range convention:
/// `γ(h) = c0 + c·(1 − exp(−3h²/a²))` for `h > 0`, `γ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariogramModel<T> {
    nugget: T,
    partial_sill: T,
    range_km: T,
}

impl<T: Scalar> VariogramModel<T> {
    pub fn gaussian(nugget: T, partial_sill: T, range_km: T) -> Result<Self> {
        if !(nugget >= T::zero() && nugget.is_finite()) {
            return Err(Error::input(format!(
                "nugget must be finite and >= 0, got {nugget}"
            )));
        }
        if !(partial_sill >= T::zero() && partial_sill.is_finite()) {
            return Err(Error::input(format!(
                "partial sill must be finite and >= 0, got {partial_sill}"
            )));
        }
        if !(range_km > T::zero() && range_km.is_finite()) {
            return Err(Error::input(format!(
                "range must be positive, got {range_km}"
            )));
        }
        Ok(Self {
            nugget,
            partial_sill,
            range_km,
        })
    }

    pub fn nugget(&self) -> T {
        self.nugget
    }

    pub fn partial_sill(&self) -> T {
        self.partial_sill
    }

    pub fn range_km(&self) -> T {
        self.range_km
    }

    pub fn sill(&self) -> T {
        self.nugget + self.partial_sill
    }

    /// Normalized structure `1 − exp(−3h²/a²)`.
    fn shape(&self, h: T) -> T {
        let u = h / self.range_km;
        T::one() - (-T::lit(3.0) * u * u).exp()
    }
}

pub fn gaussian_variogram<T: Scalar>(h: T, model: &VariogramModel<T>) -> T {
    if h <= T::zero() {
        return T::zero();
    }
    model.nugget + model.partial_sill * model.shape(h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagBin<T> {
    pub lower_km: T,
    pub upper_km: T,
    /// Mean separation of the pairs in the bin; `None` when empty.
    pub mean_h: Option<T>,
    /// Semivariance estimate; `None` when empty.
    pub gamma: Option<T>,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalVariogram<T> {
    pub lag_size_km: T,
    pub n_lags: usize,
    pub bins: Vec<LagBin<T>>,
}

impl<T: Scalar> EmpiricalVariogram<T> {
    pub fn occupied(&self) -> impl Iterator<Item = &LagBin<T>> {
        self.bins.iter().filter(|b| b.pair_count > 0)
    }
}

/// Binned semivariance `γ̂ = Σ (zᵢ − zⱼ)² / (2N)` over lags `(k·lag, (k+1)·lag]`.
///
/// Coincident pairs and pairs beyond [`MAX_PAIR_DISTANCE_KM`] or the last lag
/// are skipped.
pub fn empirical_variogram<T: Scalar>(
    samples: &[Sample<T>],
    lag_size_km: T,
    n_lags: usize,
) -> Result<EmpiricalVariogram<T>> {
    if samples.len() < 2 {
        return Err(Error::input("empirical variogram needs at least 2 samples"));
    }
    if !(lag_size_km > T::zero()) || n_lags == 0 {
        return Err(Error::input("lag size and lag count must be positive"));
    }
    let cutoff = (lag_size_km * T::from_count(n_lags)).min(T::lit(MAX_PAIR_DISTANCE_KM));
    let mut sum_sq = vec![T::zero(); n_lags];
    let mut sum_h = vec![T::zero(); n_lags];
    let mut counts = vec![0usize; n_lags];
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let h = haversine_km(samples[i].location, samples[j].location);
            if h <= T::zero() || h > cutoff {
                continue;
            }
            let k = ((h / lag_size_km).ceil().to_usize().unwrap_or(1).max(1) - 1).min(n_lags - 1);
            let dz = samples[i].value - samples[j].value;
            sum_sq[k] = sum_sq[k] + dz * dz;
            sum_h[k] = sum_h[k] + h;
            counts[k] += 1;
        }
    }
    let bins = (0..n_lags)
        .map(|k| {
            let n = counts[k];
            let nf = T::from_count(n);
            LagBin {
                lower_km: lag_size_km * T::from_count(k),
                upper_km: lag_size_km * T::from_count(k + 1),
                mean_h: (n > 0).then(|| sum_h[k] / nf),
                gamma: (n > 0).then(|| sum_sq[k] / (T::lit(2.0) * nf)),
                pair_count: n,
            }
        })
        .collect();
    Ok(EmpiricalVariogram {
        lag_size_km,
        n_lags,
        bins,
    })
}

/// Pair-count weighted least squares for nugget and partial sill with the
/// range held fixed; both parameters constrained to be non-negative.
pub fn fit_variogram<T: Scalar>(
    emp: &EmpiricalVariogram<T>,
    range_km: T,
) -> Result<VariogramModel<T>> {
    let probe = VariogramModel::gaussian(T::zero(), T::one(), range_km)?;
    // (weight, shape, gamma)
    let obs: Vec<(T, T, T)> = emp
        .occupied()
        .filter_map(|b| {
            Some((
                T::from_count(b.pair_count),
                probe.shape(b.mean_h?),
                b.gamma?,
            ))
        })
        .collect();
    if obs.len() < 2 {
        return Err(Error::input(format!(
            "variogram fit needs at least 2 occupied lag bins, got {}",
            obs.len()
        )));
    }

    let sse = |c0: T, c: T| -> T {
        obs.iter()
            .map(|&(w, s, g)| {
                let r = g - c0 - c * s;
                w * r * r
            })
            .sum()
    };
    let sw: T = obs.iter().map(|o| o.0).sum();
    let ss: T = obs.iter().map(|o| o.0 * o.1).sum();
    let sg: T = obs.iter().map(|o| o.0 * o.2).sum();
    let sss: T = obs.iter().map(|o| o.0 * o.1 * o.1).sum();
    let ssg: T = obs.iter().map(|o| o.0 * o.1 * o.2).sum();

    let mut candidates: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    // nugget only
    candidates.push(((sg / sw).max(T::zero()), T::zero()));
    // partial sill only
    if sss > T::zero() {
        candidates.push((T::zero(), (ssg / sss).max(T::zero())));
    }
    // unconstrained 2x2 normal equations, kept only when feasible
    let det = sw * sss - ss * ss;
    if det > T::epsilon() * sw * sss {
        let c0 = (sss * sg - ss * ssg) / det;
        let c = (sw * ssg - ss * sg) / det;
        if c0 >= T::zero() && c >= T::zero() {
            candidates.push((c0, c));
        }
    }
    let (c0, c) = candidates
        .into_iter()
        .map(|(c0, c)| (sse(c0, c), c0, c))
        .fold(None, |best: Option<(T, T, T)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        })
        .map(|(_, c0, c)| (c0, c))
        .expect("at least one candidate");
    VariogramModel::gaussian(c0, c, range_km)
}
