use super::{select_neighbors, NeighborPolicy, Sample, COINCIDENCE_KM};
use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoCoord};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;
use crate::special::ein;

/// Completely regularized spline basis `φ(r) = −[γ + ln x + E₁(x)]`, `x = (σr/2)²`.
///
/// `φ(0) = 0` and `φ(r) ≈ −x + x²/4` for small `x`.
pub fn crs_basis<T: Scalar>(r: T, sigma: T) -> T {
    let half = sigma * r / T::lit(2.0);
    -ein(half * half)
}

/// Spline prediction from the selected neighbors.
///
/// Solves `[Φ 1; 1ᵀ 0]·[w; b] = [z; 0]` and evaluates `Σ wᵢ φ(dᵢ) + b`.
pub fn rbf_predict<T: Scalar>(
    samples: &[Sample<T>],
    target: GeoCoord<T>,
    sigma: T,
    policy: NeighborPolicy,
) -> Result<T> {
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::input(format!(
            "RBF kernel parameter must be positive, got {sigma}"
        )));
    }
    let neighbors = select_neighbors(samples, target, policy)?;
    let k = neighbors.len();

    let mut a = DenseMatrix::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in i + 1..k {
            let d = haversine_km(neighbors[i].sample.location, neighbors[j].sample.location);
            if d < T::lit(COINCIDENCE_KM) {
                return Err(Error::numerical(format!(
                    "spline system is singular: samples {:?} and {:?} share a location",
                    neighbors[i].sample.id, neighbors[j].sample.id
                )));
            }
            let phi = crs_basis(d, sigma);
            a[(i, j)] = phi;
            a[(j, i)] = phi;
        }
        a[(i, k)] = T::one();
        a[(k, i)] = T::one();
    }
    let mut rhs: Vec<T> = neighbors.iter().map(|n| n.sample.value).collect();
    rhs.push(T::zero());

    let sol = a.solve(&rhs).ok_or_else(|| {
        Error::numerical(format!(
            "spline system is singular for kernel parameter {sigma}"
        ))
    })?;
    let bias = sol[k];
    Ok(neighbors.iter().zip(&sol[..k]).fold(bias, |acc, (n, &w)| {
        acc + w * crs_basis(n.distance_km, sigma)
    }))
}
