use super::{select_neighbors, NeighborPolicy, Sample, COINCIDENCE_KM};
use crate::error::{Error, Result};
use crate::geo::GeoCoord;
use crate::scalar::Scalar;

/// Inverse distance weighted mean of the selected neighbors, weights `d^(−p)`.
///
/// A target within [`COINCIDENCE_KM`] of a sample returns that sample's value.
pub fn idw_predict<T: Scalar>(
    samples: &[Sample<T>],
    target: GeoCoord<T>,
    power: T,
    policy: NeighborPolicy,
) -> Result<T> {
    if !(power > T::zero() && power.is_finite()) {
        return Err(Error::input(format!(
            "IDW power must be positive, got {power}"
        )));
    }
    let neighbors = select_neighbors(samples, target, policy)?;
    if let Some(hit) = neighbors
        .iter()
        .find(|n| n.distance_km < T::lit(COINCIDENCE_KM))
    {
        return Ok(hit.sample.value);
    }
    let (num, den) = neighbors
        .iter()
        .fold((T::zero(), T::zero()), |(num, den), n| {
            let w = n.distance_km.powf(-power);
            (num + w * n.sample.value, den + w)
        });
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EARTH_RADIUS_KM;
    use proptest::prelude::*;

    fn north_of(target: GeoCoord<f64>, km: f64) -> GeoCoord<f64> {
        GeoCoord::new(
            target.lat() + (km / EARTH_RADIUS_KM).to_degrees(),
            target.lon(),
        )
        .unwrap()
    }

    #[test]
    fn exact_at_samples() {
        let t = GeoCoord::new(44.0, -80.0).unwrap();
        let s = vec![
            Sample::new("a", t, 7.3),
            Sample::new("b", north_of(t, 5.0), 1.0),
            Sample::new("c", north_of(t, 9.0), 2.0),
        ];
        assert_eq!(
            idw_predict(&s, t, 2.0, NeighborPolicy::default()).unwrap(),
            7.3
        );
    }

    #[test]
    fn symmetric_pair_averages() {
        let t = GeoCoord::new(44.0, -80.0).unwrap();
        let s = vec![
            Sample::new("a", north_of(t, 3.0), 0.0),
            Sample::new("b", north_of(t, -3.0), 10.0),
        ];
        let p = idw_predict(&s, t, 2.0, NeighborPolicy::new(2, 6).unwrap()).unwrap();
        assert!((p - 5.0).abs() < 1e-9);
    }

    #[test]
    fn hand_evaluated_weights() {
        // (1·10 + 0.25·40) / 1.25 = 16
        let t = GeoCoord::new(44.0, -80.0).unwrap();
        let s = vec![
            Sample::new("a", north_of(t, 1.0), 10.0),
            Sample::new("b", north_of(t, -2.0), 40.0),
        ];
        let p = idw_predict(&s, t, 2.0, NeighborPolicy::new(2, 6).unwrap()).unwrap();
        assert!((p - 16.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn rejects_bad_power() {
        let t = GeoCoord::new(44.0, -80.0).unwrap();
        let s = vec![Sample::new("a", north_of(t, 1.0), 1.0)];
        assert!(idw_predict(&s, t, 0.0, NeighborPolicy::new(1, 2).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn prediction_within_neighbor_range(
            vals in proptest::collection::vec((-50.0..50.0f64, 0.5..40.0f64, 0.0..std::f64::consts::TAU), 3..12),
            p in 0.1..5.0f64,
        ) {
            let t = GeoCoord::new(44.0, -80.0).unwrap();
            let samples: Vec<_> = vals.iter().enumerate().map(|(i, &(v, r, a))| {
                let km = r / EARTH_RADIUS_KM;
                let loc = GeoCoord::new(44.0 + (km * a.sin()).to_degrees(),
                                        -80.0 + (km * a.cos() / 44f64.to_radians().cos()).to_degrees()).unwrap();
                Sample::new(format!("{i}"), loc, v)
            }).collect();
            let policy = NeighborPolicy::default();
            let z = idw_predict(&samples, t, p, policy).unwrap();
            let used = select_neighbors(&samples, t, policy).unwrap();
            let lo = used.iter().map(|n| n.sample.value).fold(f64::INFINITY, f64::min);
            let hi = used.iter().map(|n| n.sample.value).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(z >= lo - 1e-9 && z <= hi + 1e-9);

            let shifted: Vec<_> = samples.iter().map(|s| Sample::new(s.id.clone(), s.location, s.value + 12.5)).collect();
            let z2 = idw_predict(&shifted, t, p, policy).unwrap();
            prop_assert!((z2 - (z + 12.5)).abs() < 1e-9);
        }
    }
}
