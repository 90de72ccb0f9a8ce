//! Loading and validation of station registries, observations and region
//! polygons, plus merging of station networks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo::{haversine_km, GeoCoord, RegionPolygon};
use crate::scalar::Scalar;

pub const STATIONS_HEADER: [&str; 5] = ["station_id", "network", "name", "lat", "lon"];
pub const OBSERVATIONS_HEADER: [&str; 4] = ["station_id", "timestamp", "variable", "value"];
pub const TARGETS_HEADER: [&str; 3] = ["target_id", "lat", "lon"];

/// Source system a station belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Network {
    #[serde(rename = "RWIS")]
    Rwis,
    #[serde(rename = "MTO_CAMERA")]
    MtoCamera,
    #[serde(rename = "ENV_CANADA")]
    EnvCanada,
}

impl Network {
    pub const ALL: [Network; 3] = [Network::Rwis, Network::MtoCamera, Network::EnvCanada];

    pub fn as_str(&self) -> &'static str {
        match self {
            Network::Rwis => "RWIS",
            Network::MtoCamera => "MTO_CAMERA",
            Network::EnvCanada => "ENV_CANADA",
        }
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Network {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Network::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown network {s:?}; expected one of RWIS, MTO_CAMERA, ENV_CANADA"
                ))
            })
    }
}

/// Observed weather variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variable {
    #[serde(rename = "air_temp_C")]
    AirTemp,
    #[serde(rename = "wind_speed_kmh")]
    WindSpeed,
    #[serde(rename = "pressure_kPa")]
    Pressure,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::AirTemp, Variable::WindSpeed, Variable::Pressure];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variable::AirTemp => "air_temp_C",
            Variable::WindSpeed => "wind_speed_kmh",
            Variable::Pressure => "pressure_kPa",
        }
    }

    fn check<T: Scalar>(&self, value: T) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::input(format!("non-finite {self} value")));
        }
        match self {
            Variable::Pressure if value <= T::zero() => Err(Error::input(format!(
                "pressure must be positive, got {value}"
            ))),
            Variable::WindSpeed if value < T::zero() => Err(Error::input(format!(
                "wind speed must be non-negative, got {value}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown variable {s:?}; expected one of air_temp_C, wind_speed_kmh, pressure_kPa"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station<T> {
    pub station_id: String,
    pub network: Network,
    pub name: String,
    pub location: GeoCoord<T>,
}

/// Readings of one variable at one timestamp, keyed by station id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationSet<T> {
    pub variable: Variable,
    pub timestamp: String,
    pub readings: BTreeMap<String, T>,
}

impl<T: Scalar> ObservationSet<T> {
    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.readings.values().copied()
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn row_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn check_header(path: &Path, reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| row_error(path, 1, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(row_error(
            path,
            1,
            format!("header must be exactly `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

fn parse_field<T: FromStr>(path: &Path, line: u64, field: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| row_error(path, line, format!("cannot parse {field} from {raw:?}")))
}

/// Loads a station registry CSV. The first malformed row aborts the load.
pub fn load_stations<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Station<T>>> {
    let path = path.as_ref();
    read_stations(path, open(path)?)
}

pub fn read_stations<T: Scalar>(path: &Path, input: impl Read) -> Result<Vec<Station<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    check_header(path, &mut reader, &STATIONS_HEADER)?;

    let mut seen = HashSet::new();
    let mut stations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let station_id = record[0].to_string();
        if station_id.is_empty() {
            return Err(row_error(path, line, "empty station_id"));
        }
        let network: Network = record[1]
            .parse()
            .map_err(|e: Error| row_error(path, line, e.to_string()))?;
        let lat: T = parse_field(path, line, "lat", &record[3])?;
        let lon: T = parse_field(path, line, "lon", &record[4])?;
        let location = GeoCoord::new(lat, lon).map_err(|e| row_error(path, line, e.to_string()))?;
        if !seen.insert(station_id.clone()) {
            return Err(row_error(
                path,
                line,
                format!("duplicate station_id {station_id:?}"),
            ));
        }
        stations.push(Station {
            station_id,
            network,
            name: record[2].to_string(),
            location,
        });
    }
    Ok(stations)
}

/// Writes stations in the canonical CSV layout read by [`load_stations`].
pub fn write_stations<T: Scalar>(out: impl Write, stations: &[Station<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::input(e.to_string());
    w.write_record(STATIONS_HEADER).map_err(io)?;
    for s in stations {
        w.write_record([
            s.station_id.as_str(),
            s.network.as_str(),
            s.name.as_str(),
            &s.location.lat().to_string(),
            &s.location.lon().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))?;
    Ok(())
}

fn valid_timestamp(ts: &str) -> bool {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    const FORMATS: [&str; 3] = [
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M:%S%.f",
    ];
    FORMATS
        .iter()
        .any(|f| NaiveDateTime::parse_from_str(ts, f).is_ok())
        || DateTime::parse_from_rfc3339(ts).is_ok()
        || NaiveDate::parse_from_str(ts, "%Y-%m-%d").is_ok()
}

/// Loads observations and groups them into one set per (variable, timestamp).
///
/// Sets are returned ordered by variable, then timestamp text.
pub fn load_observations<T: Scalar>(
    path: impl AsRef<Path>,
    stations: &[Station<T>],
) -> Result<Vec<ObservationSet<T>>> {
    let path = path.as_ref();
    read_observations(path, open(path)?, stations)
}

pub fn read_observations<T: Scalar>(
    path: &Path,
    input: impl Read,
    stations: &[Station<T>],
) -> Result<Vec<ObservationSet<T>>> {
    let known: HashSet<&str> = stations.iter().map(|s| s.station_id.as_str()).collect();
    read_observations_inner(path, input, Some(&known))
}

/// Loads observations without resolving station ids against a registry.
pub fn load_observations_unresolved<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<Vec<ObservationSet<T>>> {
    let path = path.as_ref();
    read_observations_inner(path, open(path)?, None)
}

fn read_observations_inner<T: Scalar>(
    path: &Path,
    input: impl Read,
    known: Option<&HashSet<&str>>,
) -> Result<Vec<ObservationSet<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    check_header(path, &mut reader, &OBSERVATIONS_HEADER)?;

    let mut groups: BTreeMap<(Variable, String), BTreeMap<String, T>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let station_id = &record[0];
        if known.is_some_and(|k| !k.contains(station_id)) {
            return Err(row_error(
                path,
                line,
                format!("unknown station_id {station_id:?}"),
            ));
        }
        let timestamp = &record[1];
        if !valid_timestamp(timestamp) {
            return Err(row_error(
                path,
                line,
                format!("unparseable timestamp {timestamp:?}"),
            ));
        }
        let variable: Variable = record[2]
            .parse()
            .map_err(|e: Error| row_error(path, line, e.to_string()))?;
        let value: T = parse_field(path, line, "value", &record[3])?;
        variable
            .check(value)
            .map_err(|e| row_error(path, line, e.to_string()))?;

        let readings = groups.entry((variable, timestamp.to_string())).or_default();
        if readings.insert(station_id.to_string(), value).is_some() {
            return Err(row_error(
                path,
                line,
                format!("duplicate reading for station {station_id:?}, {variable} at {timestamp}"),
            ));
        }
    }
    Ok(groups
        .into_iter()
        .map(|((variable, timestamp), readings)| ObservationSet {
            variable,
            timestamp,
            readings,
        })
        .collect())
}

/// Writes observation sets in the canonical layout: sets in the given order,
/// readings by ascending station id.
pub fn write_observations<T: Scalar>(out: impl Write, sets: &[ObservationSet<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::input(e.to_string());
    w.write_record(OBSERVATIONS_HEADER).map_err(io)?;
    for set in sets {
        for (id, value) in &set.readings {
            w.write_record([
                id.as_str(),
                set.timestamp.as_str(),
                set.variable.as_str(),
                &value.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::input(e.to_string()))?;
    Ok(())
}

/// A location at which predictions are requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target<T> {
    pub target_id: String,
    pub location: GeoCoord<T>,
}

/// Loads a `target_id,lat,lon` CSV.
pub fn load_targets<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Target<T>>> {
    let path = path.as_ref();
    read_targets(path, open(path)?)
}

pub fn read_targets<T: Scalar>(path: &Path, input: impl Read) -> Result<Vec<Target<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    check_header(path, &mut reader, &TARGETS_HEADER)?;
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let lat: T = parse_field(path, line, "lat", &record[1])?;
        let lon: T = parse_field(path, line, "lon", &record[2])?;
        targets.push(Target {
            target_id: record[0].to_string(),
            location: GeoCoord::new(lat, lon).map_err(|e| row_error(path, line, e.to_string()))?,
        });
    }
    Ok(targets)
}

/// Loads a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
///
/// Each MultiPolygon part becomes its own region carrying the feature's name.
pub fn load_regions<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<RegionPolygon<T>>> {
    let path = path.as_ref();
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_regions(&text).map_err(|e| match e {
        Error::Input(msg) => Error::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_regions<T: Scalar>(text: &str) -> Result<Vec<RegionPolygon<T>>> {
    use geojson::{GeoJson, Value};

    let gj: GeoJson = text
        .parse()
        .map_err(|e: geojson::Error| Error::input(format!("invalid GeoJSON: {e}")))?;
    let GeoJson::FeatureCollection(fc) = gj else {
        return Err(Error::input("expected a GeoJSON FeatureCollection"));
    };

    let mut regions = Vec::new();
    for (k, feature) in fc.features.iter().enumerate() {
        let name = feature
            .property("name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::input(format!("feature {k} has no string `name` property")))?;
        let geometry = feature
            .geometry
            .as_ref()
            .ok_or_else(|| Error::input(format!("feature {k} ({name}) has no geometry")))?;
        let parts: Vec<&Vec<Vec<Vec<f64>>>> = match &geometry.value {
            Value::Polygon(rings) => vec![rings],
            Value::MultiPolygon(polys) => polys.iter().collect(),
            other => {
                return Err(Error::input(format!(
                "feature {k} ({name}) has {} geometry; only Polygon and MultiPolygon are supported",
                other.type_name()
            )))
            }
        };
        for rings in parts {
            let rings = rings
                .iter()
                .map(|ring| {
                    ring.iter()
                        .map(|pos| match pos.as_slice() {
                            [lon, lat, ..] => GeoCoord::new(T::lit(*lat), T::lit(*lon)),
                            _ => Err(Error::input(format!(
                                "feature {k} ({name}) has a short position"
                            ))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            regions.push(RegionPolygon::new(name, rings)?);
        }
    }
    Ok(regions)
}

/// Plain union of station registries.
///
/// Every id occurring in more than one registry is rewritten as
/// `NETWORK:id`; if that still collides, `#k` (registry index) is appended.
pub fn merge_networks<T: Scalar>(registries: &[Vec<Station<T>>]) -> Vec<Station<T>> {
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for reg in registries {
        for s in reg {
            *occurrences.entry(s.station_id.as_str()).or_default() += 1;
        }
    }
    let mut prefixed: HashMap<String, usize> = HashMap::new();
    for reg in registries {
        for s in reg {
            if occurrences[s.station_id.as_str()] > 1 {
                *prefixed
                    .entry(format!("{}:{}", s.network, s.station_id))
                    .or_default() += 1;
            }
        }
    }

    let mut merged = Vec::with_capacity(registries.iter().map(Vec::len).sum());
    for (k, reg) in registries.iter().enumerate() {
        for s in reg {
            let mut station = s.clone();
            if occurrences[s.station_id.as_str()] > 1 {
                let id = format!("{}:{}", s.network, s.station_id);
                station.station_id = if prefixed[&id] > 1 {
                    format!("{id}#{k}")
                } else {
                    id
                };
            }
            merged.push(station);
        }
    }
    merged
}

/// Drops stations within `radius_km` of an earlier kept station.
pub fn dedupe_colocated<T: Scalar>(stations: &[Station<T>], radius_km: T) -> Vec<Station<T>> {
    let mut kept: Vec<Station<T>> = Vec::new();
    for s in stations {
        if kept
            .iter()
            .all(|k| haversine_km(k.location, s.location) > radius_km)
        {
            kept.push(s.clone());
        }
    }
    kept
}

/// Splits a registry into one group per network, in [`Network::ALL`] order.
pub fn group_by_network<T: Scalar>(stations: &[Station<T>]) -> Vec<(Network, Vec<Station<T>>)> {
    Network::ALL
        .into_iter()
        .filter_map(|net| {
            let members: Vec<_> = stations
                .iter()
                .filter(|s| s.network == net)
                .cloned()
                .collect();
            (!members.is_empty()).then_some((net, members))
        })
        .collect()
}
