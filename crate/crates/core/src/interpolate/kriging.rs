use serde::Serialize;

use super::{
    detrend_first_order, empirical_variogram, fit_variogram, gaussian_variogram, select_neighbors,
    Neighbor, NeighborPolicy, Sample, VariogramModel, DEFAULT_LAGS, DEFAULT_LAG_KM,
    DEFAULT_RANGE_KM,
};
use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoCoord};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

/// Fixed variogram settings for the trend-removed kriging pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrigingConfig<T> {
    pub lag_size_km: T,
    pub n_lags: usize,
    pub range_km: T,
}

impl<T: Scalar> Default for KrigingConfig<T> {
    fn default() -> Self {
        Self {
            lag_size_km: T::lit(DEFAULT_LAG_KM),
            n_lags: DEFAULT_LAGS,
            range_km: T::lit(DEFAULT_RANGE_KM),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrigingWeights<'a, T> {
    pub neighbors: Vec<Neighbor<'a, T>>,
    pub weights: Vec<T>,
    pub lagrange: T,
}

/// Solves the ordinary kriging system `[Γ 1; 1ᵀ 0]·[λ; μ] = [γ(dᵢ₀); 1]`
/// over the selected neighbors.
pub fn ok_weights<'a, T: Scalar>(
    samples: &'a [Sample<T>],
    target: GeoCoord<T>,
    model: &VariogramModel<T>,
    policy: NeighborPolicy,
) -> Result<KrigingWeights<'a, T>> {
    let neighbors = select_neighbors(samples, target, policy)?;
    let k = neighbors.len();
    // weights are invariant to the overall variogram scale; solving at unit
    // sill keeps the system well conditioned for tiny residual fields
    let scale = model.sill();
    let unit = if scale > T::zero() && scale.is_finite() {
        VariogramModel::gaussian(
            model.nugget() / scale,
            model.partial_sill() / scale,
            model.range_km(),
        )?
    } else {
        *model
    };
    let model = &unit;
    let mut a = DenseMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in i + 1..k {
            let g = gaussian_variogram(
                haversine_km(neighbors[i].sample.location, neighbors[j].sample.location),
                model,
            );
            a[(i, j)] = g;
            a[(j, i)] = g;
        }
        a[(i, k)] = T::one();
        a[(k, i)] = T::one();
    }
    let mut rhs: Vec<T> = neighbors
        .iter()
        .map(|n| gaussian_variogram(n.distance_km, model))
        .collect();
    rhs.push(T::one());

    let sol = a.solve(&rhs).ok_or_else(|| {
        Error::numerical(format!(
            "kriging matrix is singular (nugget {}, partial sill {}); check for duplicate locations",
            model.nugget(),
            model.partial_sill()
        ))
    })?;
    let lagrange = if scale > T::zero() && scale.is_finite() {
        sol[k] * scale
    } else {
        sol[k]
    };
    Ok(KrigingWeights {
        neighbors,
        lagrange,
        weights: sol[..k].to_vec(),
    })
}

/// Ordinary kriging estimate `Σ λᵢ zᵢ`.
pub fn ok_predict<T: Scalar>(
    samples: &[Sample<T>],
    target: GeoCoord<T>,
    model: &VariogramModel<T>,
    policy: NeighborPolicy,
) -> Result<T> {
    let kw = ok_weights(samples, target, model, policy)?;
    Ok(kw
        .neighbors
        .iter()
        .zip(&kw.weights)
        .fold(T::zero(), |acc, (n, &w)| acc + w * n.sample.value))
}

/// Trend-removed ordinary kriging: fit a plane, build and fit the residual
/// variogram, krige the residuals and add the trend back at the target.
///
/// A residual field with zero fitted sill (samples exactly on a plane) is
/// kriged with a unit partial sill; kriging weights depend only on the
/// variogram's shape, and the residuals are all zero anyway.
pub fn ok_full_predict<T: Scalar>(
    samples: &[Sample<T>],
    target: GeoCoord<T>,
    config: &KrigingConfig<T>,
    policy: NeighborPolicy,
) -> Result<T> {
    let (trend, residuals) = detrend_first_order(samples)?;
    let emp = empirical_variogram(&residuals, config.lag_size_km, config.n_lags)?;
    let mut model = fit_variogram(&emp, config.range_km)?;
    if !(model.sill() > T::zero()) {
        model = VariogramModel::gaussian(T::zero(), T::one(), config.range_km)?;
    }
    Ok(ok_predict(&residuals, target, &model, policy)? + trend.eval(target))
}
