use serde::Serialize;

use super::Sample;
use crate::error::{Error, Result};
use crate::geo::{centroid, project, GeoCoord};
use crate::scalar::Scalar;

/// Planar trend `β0 + β1·x + β2·y` over projected km about `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend<T> {
    pub reference: GeoCoord<T>,
    pub intercept: T,
    pub slope_x: T,
    pub slope_y: T,
}

impl<T: Scalar> Trend<T> {
    pub fn eval(&self, at: GeoCoord<T>) -> T {
        let p = project(&[at], self.reference)[0];
        self.intercept + self.slope_x * p.x + self.slope_y * p.y
    }
}

/// Ordinary least squares plane through the samples; returns the trend and
/// the residual samples `z − trend`.
pub fn detrend_first_order<T: Scalar>(samples: &[Sample<T>]) -> Result<(Trend<T>, Vec<Sample<T>>)> {
    if samples.len() < 3 {
        return Err(Error::input(format!(
            "first-order trend needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let locations: Vec<_> = samples.iter().map(|s| s.location).collect();
    let reference = centroid(&locations).expect("nonempty");
    let xy = project(&locations, reference);
    let n = T::from_count(samples.len());

    let mx = xy.iter().map(|p| p.x).sum::<T>() / n;
    let my = xy.iter().map(|p| p.y).sum::<T>() / n;
    let mz = samples.iter().map(|s| s.value).sum::<T>() / n;
    let (mut sxx, mut syy, mut sxy, mut sxz, mut syz) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (p, s) in xy.iter().zip(samples) {
        let (dx, dy, dz) = (p.x - mx, p.y - my, s.value - mz);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
        sxz = sxz + dx * dz;
        syz = syz + dy * dz;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > T::lit(1e-10) * sxx * syy) || sxx <= T::zero() || syy <= T::zero() {
        return Err(Error::input(
            "sample locations are collinear; first-order trend is rank deficient",
        ));
    }
    let slope_x = (syy * sxz - sxy * syz) / det;
    let slope_y = (sxx * syz - sxy * sxz) / det;
    let trend = Trend {
        reference,
        intercept: mz - slope_x * mx - slope_y * my,
        slope_x,
        slope_y,
    };
    let residuals = samples
        .iter()
        .zip(&xy)
        .map(|(s, p)| {
            let fitted = trend.intercept + trend.slope_x * p.x + trend.slope_y * p.y;
            Sample::new(s.id.clone(), s.location, s.value - fitted)
        })
        .collect();
    Ok((trend, residuals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scattered() -> Vec<GeoCoord<f64>> {
        [
            (43.1, -80.2),
            (43.6, -79.1),
            (44.2, -79.8),
            (43.9, -80.9),
            (44.5, -78.7),
            (43.3, -78.9),
            (44.0, -79.4),
        ]
        .iter()
        .map(|&(la, lo)| GeoCoord::new(la, lo).unwrap())
        .collect()
    }

    #[test]
    fn plane_is_fit_exactly() {
        let locs = scattered();
        let reference = centroid(&locs).unwrap();
        let xy = project(&locs, reference);
        let samples: Vec<_> = locs
            .iter()
            .zip(&xy)
            .enumerate()
            .map(|(i, (&l, p))| Sample::new(i.to_string(), l, 2.0 + 0.1 * p.x - 0.3 * p.y))
            .collect();
        let (trend, resid) = detrend_first_order(&samples).unwrap();
        assert!(resid.iter().all(|r| r.value.abs() <= 1e-9));
        assert!((trend.slope_x - 0.1).abs() < 1e-12 && (trend.slope_y + 0.3).abs() < 1e-12);
    }

    #[test]
    fn constant_field() {
        let samples: Vec<_> = scattered()
            .into_iter()
            .enumerate()
            .map(|(i, l)| Sample::new(i.to_string(), l, 5.5))
            .collect();
        let (trend, resid) = detrend_first_order(&samples).unwrap();
        assert_eq!((trend.slope_x, trend.slope_y), (0.0, 0.0));
        assert!((trend.intercept - 5.5).abs() < 1e-12);
        assert!(resid.iter().all(|r| r.value.abs() < 1e-12));
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let locs = scattered();
        let reference = centroid(&locs).unwrap();
        let xy = project(&locs, reference);
        let mut samples: Vec<_> = locs
            .iter()
            .zip(&xy)
            .enumerate()
            .map(|(i, (&l, p))| Sample::new(i.to_string(), l, 2.0 + 0.1 * p.x - 0.3 * p.y))
            .collect();
        samples[3].value += 17.0;
        let (_, resid) = detrend_first_order(&samples).unwrap();
        let dot = |f: &dyn Fn(usize) -> f64| {
            resid
                .iter()
                .enumerate()
                .map(|(i, r)| r.value * f(i))
                .sum::<f64>()
        };
        assert!(dot(&|_| 1.0).abs() < 1e-8);
        assert!(dot(&|i| xy[i].x).abs() < 1e-8);
        assert!(dot(&|i| xy[i].y).abs() < 1e-8);
        assert!(resid[3].value > 1.0);
    }

    #[test]
    fn collinear_is_rank_deficient() {
        let samples: Vec<_> = (0..5)
            .map(|i| {
                Sample::new(
                    i.to_string(),
                    GeoCoord::new(44.0, -80.0 + 0.1 * i as f64).unwrap(),
                    i as f64,
                )
            })
            .collect();
        assert!(detrend_first_order(&samples).is_err());
        assert!(detrend_first_order(&samples[..2]).is_err());
    }
}
