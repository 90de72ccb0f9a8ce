use serde::Serialize;

use super::Sample;
use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoCoord};
use crate::scalar::Scalar;

/// Distance (km) below which a target is treated as coincident with a sample.
pub const COINCIDENCE_KM: f64 = 1e-9;

/// Bounds on how many nearest samples feed a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NeighborPolicy {
    min_neighbors: usize,
    max_neighbors: usize,
}

impl NeighborPolicy {
    pub fn new(min_neighbors: usize, max_neighbors: usize) -> Result<Self> {
        if min_neighbors < 1 || min_neighbors > max_neighbors {
            return Err(Error::input(format!(
                "neighbor policy needs 1 <= min <= max, got min={min_neighbors} max={max_neighbors}"
            )));
        }
        Ok(Self {
            min_neighbors,
            max_neighbors,
        })
    }

    pub fn min_neighbors(&self) -> usize {
        self.min_neighbors
    }

    pub fn max_neighbors(&self) -> usize {
        self.max_neighbors
    }
}

impl Default for NeighborPolicy {
    fn default() -> Self {
        Self {
            min_neighbors: 3,
            max_neighbors: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<'a, T> {
    pub sample: &'a Sample<T>,
    pub distance_km: T,
}

/// The `max` nearest samples, ascending by distance, ties broken by id.
pub fn select_neighbors<'a, T: Scalar>(
    samples: &'a [Sample<T>],
    target: GeoCoord<T>,
    policy: NeighborPolicy,
) -> Result<Vec<Neighbor<'a, T>>> {
    if samples.len() < policy.min_neighbors {
        return Err(Error::input(format!(
            "need at least {} samples, got {}",
            policy.min_neighbors,
            samples.len()
        )));
    }
    let mut all: Vec<Neighbor<'a, T>> = samples
        .iter()
        .map(|s| Neighbor {
            sample: s,
            distance_km: haversine_km(s.location, target),
        })
        .collect();
    all.sort_by(|a, b| {
        a.distance_km
            .partial_cmp(&b.distance_km)
            .expect("finite distances")
            .then_with(|| a.sample.id.cmp(&b.sample.id))
    });
    all.truncate(policy.max_neighbors);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Sample<f64>> {
        (0..n)
            .map(|i| {
                Sample::new(
                    format!("s{i:02}"),
                    GeoCoord::new(44.0, -80.0 + 0.1 * i as f64).unwrap(),
                    i as f64,
                )
            })
            .collect()
    }

    #[test]
    fn policy_bounds() {
        assert!(NeighborPolicy::new(0, 3).is_err());
        assert!(NeighborPolicy::new(4, 3).is_err());
        assert_eq!(
            NeighborPolicy::default(),
            NeighborPolicy::new(3, 6).unwrap()
        );
    }

    #[test]
    fn selects_nearest() {
        let s = line(10);
        let target = GeoCoord::new(44.0, -80.0).unwrap();
        let n = select_neighbors(&s, target, NeighborPolicy::default()).unwrap();
        assert_eq!(n.len(), 6);
        let ids: Vec<_> = n.iter().map(|x| x.sample.id.as_str()).collect();
        assert_eq!(ids, ["s00", "s01", "s02", "s03", "s04", "s05"]);
        assert!(n.windows(2).all(|w| w[0].distance_km <= w[1].distance_km));

        assert_eq!(
            select_neighbors(&s[..4], target, NeighborPolicy::default())
                .unwrap()
                .len(),
            4
        );
        assert!(select_neighbors(&s[..2], target, NeighborPolicy::default()).is_err());
    }

    #[test]
    fn ties_break_by_id() {
        let c = GeoCoord::new(44.0, -80.0).unwrap();
        let s = vec![
            Sample::new("b", c, 1.0),
            Sample::new("a", c, 2.0),
            Sample::new("c", c, 3.0),
        ];
        let n = select_neighbors(&s, c, NeighborPolicy::new(1, 2).unwrap()).unwrap();
        let ids: Vec<_> = n.iter().map(|x| x.sample.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
