//! Synthetic point patterns and random fields for fixtures and calibration.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geo::{pairwise_distances, GeoCoord, PlanarPoint};
use crate::pattern::StudyWindow;
use crate::scalar::Scalar;

pub fn uniform_points<T: Scalar, R: Rng + ?Sized>(
    window: &StudyWindow<T>,
    n: usize,
    rng: &mut R,
) -> Vec<PlanarPoint<T>> {
    (0..n).map(|_| window.sample(rng)).collect()
}

/// Thomas cluster process with a fixed number of offspring per parent.
///
/// Parents are uniform in the window; offspring are displaced by isotropic
/// Gaussian noise with standard deviation `spread` (km). Offspring that land
/// outside the window are redrawn.
pub fn thomas_process<T: Scalar, R: Rng + ?Sized>(
    window: &StudyWindow<T>,
    parents: usize,
    offspring: usize,
    spread: T,
    rng: &mut R,
) -> Vec<PlanarPoint<T>> {
    let mut points = Vec::with_capacity(parents * offspring);
    for _ in 0..parents {
        let center = window.sample(rng);
        for _ in 0..offspring {
            loop {
                let dx: f64 = StandardNormal.sample(rng);
                let dy: f64 = StandardNormal.sample(rng);
                let p = PlanarPoint::new(
                    center.x + spread * T::lit(dx),
                    center.y + spread * T::lit(dy),
                );
                if window.contains(p) {
                    points.push(p);
                    break;
                }
            }
        }
    }
    points
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix
/// given as rows.
fn cholesky<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for (a, b) in l[i][..j].iter().zip(&l[j][..j]) {
                s = s - *a * *b;
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Zero-mean Gaussian random field with covariance
/// `variance · exp(−h² / length_scale²)` over great-circle distance `h`,
/// sampled at `locations`.
pub fn gaussian_field<T: Scalar, R: Rng + ?Sized>(
    locations: &[GeoCoord<T>],
    variance: T,
    length_scale_km: T,
    rng: &mut R,
) -> Result<Vec<T>> {
    let d = pairwise_distances(locations);
    let n = locations.len();
    // small jitter keeps the smooth kernel numerically positive definite
    let jitter = variance * T::lit(1e-8);
    let cov: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let h = d[(i, j)] / length_scale_km;
                    variance * (-h * h).exp() + if i == j { jitter } else { T::zero() }
                })
                .collect()
        })
        .collect();
    let l =
        cholesky(&cov).ok_or_else(|| Error::numerical("covariance is not positive definite"))?;
    let z: Vec<T> = (0..n).map(|_| T::lit(StandardNormal.sample(rng))).collect();
    Ok((0..n)
        .map(|i| (0..=i).map(|k| l[i][k] * z[k]).sum())
        .collect())
}

/// `n` locations uniform in a lat/lon box.
pub fn random_locations<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    lat_range: (f64, f64),
    lon_range: (f64, f64),
    rng: &mut R,
) -> Vec<GeoCoord<T>> {
    (0..n)
        .map(|_| {
            let lat = rng.random_range(lat_range.0..lat_range.1);
            let lon = rng.random_range(lon_range.0..lon_range.1);
            GeoCoord::new(T::lit(lat), T::lit(lon)).expect("box inside valid coordinate range")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn thomas_counts_and_containment() {
        let w =
            StudyWindow::bounding_box(PlanarPoint::new(0.0, 0.0), PlanarPoint::new(100.0, 100.0))
                .unwrap();
        let pts = thomas_process(&w, 20, 10, 2.0, &mut substream(3, 0));
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|p| w.contains(*p)));
    }

    #[test]
    fn gaussian_field_has_roughly_unit_variance() {
        let mut rng = substream(8, 0);
        let locs: Vec<GeoCoord<f64>> =
            random_locations(150, (43.0, 46.0), (-81.0, -76.0), &mut rng);
        // short length scale: nearly independent draws
        let z = gaussian_field(&locs, 1.0, 1.0, &mut rng).unwrap();
        let var = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
        assert!((0.6..1.5).contains(&var), "{var}");
    }
}
