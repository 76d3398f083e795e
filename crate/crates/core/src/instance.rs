//! Delivery scene: depot, stations, base stations, weather, plus the instance
//! file format, distance geometry and seeded instance generation.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used by the haversine distance, in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("points are expressed in different coordinate frames")]
    FrameMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Easting/northing in km.
    #[default]
    Planar,
    /// Longitude/latitude in degrees.
    Geodetic,
}

/// A point in either frame. For geodetic points `x` is the longitude and `y`
/// the latitude, both in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub frame: Frame,
    pub x: f64,
    pub y: f64,
}

impl GeoPoint {
    pub fn planar(x: f64, y: f64) -> Self {
        GeoPoint { frame: Frame::Planar, x, y }
    }

    pub fn geodetic(lat: f64, lon: f64) -> Self {
        GeoPoint { frame: Frame::Geodetic, x: lon, y: lat }
    }

    pub fn lat(&self) -> f64 {
        self.y
    }

    pub fn lon(&self) -> f64 {
        self.x
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err("coordinates must be finite".into());
        }
        if self.frame == Frame::Geodetic {
            if !(-90.0..=90.0).contains(&self.y) {
                return Err(format!("latitude {} outside [-90, 90]", self.y));
            }
            if !(-180.0..=180.0).contains(&self.x) {
                return Err(format!("longitude {} outside [-180, 180]", self.x));
            }
        }
        Ok(())
    }

    /// Point at fraction `t` of the straight segment `self -> other`
    /// (interpolated in the point's own coordinates).
    pub fn lerp(&self, other: &GeoPoint, t: f64) -> GeoPoint {
        GeoPoint {
            frame: self.frame,
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frame {
            Frame::Planar => write!(f, "({:.3} km, {:.3} km)", self.x, self.y),
            Frame::Geodetic => write!(f, "(lat {:.5}, lon {:.5})", self.y, self.x),
        }
    }
}

/// Euclidean distance for planar points, haversine for geodetic ones (km).
pub fn distance(a: &GeoPoint, b: &GeoPoint) -> Result<f64, InstanceError> {
    if a.frame != b.frame {
        return Err(InstanceError::FrameMismatch);
    }
    Ok(distance_same_frame(a, b))
}

pub(crate) fn distance_same_frame(a: &GeoPoint, b: &GeoPoint) -> f64 {
    match a.frame {
        Frame::Planar => (a.x - b.x).hypot(a.y - b.y),
        Frame::Geodetic => {
            let (phi1, phi2) = (a.y.to_radians(), b.y.to_radians());
            let dphi = (b.y - a.y).to_radians();
            let dlambda = (b.x - a.x).to_radians();
            let s1 = (dphi / 2.0).sin();
            let s2 = (dlambda / 2.0).sin();
            let h = (s1 * s1 + phi1.cos() * phi2.cos() * s2 * s2).clamp(0.0, 1.0);
            2.0 * EARTH_RADIUS_KM * h.sqrt().atan2((1.0 - h).sqrt())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    pub location: GeoPoint,
    /// Packages to deliver.
    pub demand: u32,
    pub required_sensing_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: String,
    pub location: GeoPoint,
    pub tx_power_dbm: f64,
    pub carrier_freq_mhz: f64,
    pub bandwidth_hz: f64,
}

impl BaseStation {
    pub const DEFAULT_TX_POWER_DBM: f64 = 40.0;
    pub const DEFAULT_CARRIER_FREQ_MHZ: f64 = 2000.0;
    pub const DEFAULT_BANDWIDTH_HZ: f64 = 1.0e6;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weather {
    /// Fraction in (0, 1]; 1 is perfect visibility.
    pub visibility: f64,
    /// Carried as data only.
    #[serde(rename = "wind_speed_mps", default)]
    pub wind_speed: f64,
}

impl Default for Weather {
    fn default() -> Self {
        Weather { visibility: 1.0, wind_speed: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoFlyZone {
    pub center: GeoPoint,
    pub radius_km: f64,
}

/// The scene being solved. Immutable once validated; the depot is matrix
/// index 0 and station `k` is matrix index `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryInstance {
    pub depot: GeoPoint,
    pub stations: Vec<Station>,
    pub base_stations: Vec<BaseStation>,
    pub weather: Weather,
    pub no_fly_zones: Vec<NoFlyZone>,
}

impl DeliveryInstance {
    pub fn frame(&self) -> Frame {
        self.depot.frame
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn station_index(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    pub fn total_demand(&self) -> u64 {
        self.stations.iter().map(|s| u64::from(s.demand)).sum()
    }

    /// Location for a matrix index (0 = depot).
    pub fn node(&self, index: usize) -> &GeoPoint {
        if index == 0 {
            &self.depot
        } else {
            &self.stations[index - 1].location
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let frame = self.frame();
        let check_point = |what: &str, p: &GeoPoint| -> Result<(), InstanceError> {
            if p.frame != frame {
                return Err(InstanceError::Validation(format!(
                    "{what}: all points must share the {frame:?} frame"
                )));
            }
            p.validate()
                .map_err(|m| InstanceError::Validation(format!("{what}: {m}")))
        };
        check_point("depot", &self.depot)?;
        if self.stations.is_empty() {
            return Err(InstanceError::Validation(
                "instance must contain at least one station".into(),
            ));
        }
        let mut ids = HashSet::new();
        for s in &self.stations {
            let what = format!("station `{}`", s.id);
            if s.id.is_empty() {
                return Err(InstanceError::Validation("station id must be non-empty".into()));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(InstanceError::Validation(format!("duplicate station id `{}`", s.id)));
            }
            check_point(&what, &s.location)?;
            if s.demand < 1 {
                return Err(InstanceError::Validation(format!("{what}: demand must be >= 1")));
            }
            let acc = s.required_sensing_accuracy;
            if !(acc > 0.0 && acc <= 1.0) {
                return Err(InstanceError::Validation(format!(
                    "{what}: required_sensing_accuracy {acc} outside (0, 1]"
                )));
            }
        }
        let mut bs_ids = HashSet::new();
        for b in &self.base_stations {
            let what = format!("base station `{}`", b.id);
            if !bs_ids.insert(b.id.as_str()) {
                return Err(InstanceError::Validation(format!("duplicate base station id `{}`", b.id)));
            }
            check_point(&what, &b.location)?;
            if !b.tx_power_dbm.is_finite() {
                return Err(InstanceError::Validation(format!("{what}: tx_power_dbm must be finite")));
            }
            if !(b.carrier_freq_mhz > 0.0 && b.carrier_freq_mhz.is_finite()) {
                return Err(InstanceError::Validation(format!("{what}: carrier_freq_mhz must be > 0")));
            }
            if !(b.bandwidth_hz > 0.0 && b.bandwidth_hz.is_finite()) {
                return Err(InstanceError::Validation(format!("{what}: bandwidth_hz must be > 0")));
            }
        }
        let v = self.weather.visibility;
        if !(v > 0.0 && v <= 1.0) {
            return Err(InstanceError::Validation(format!("weather.visibility {v} outside (0, 1]")));
        }
        if !(self.weather.wind_speed >= 0.0 && self.weather.wind_speed.is_finite()) {
            return Err(InstanceError::Validation("weather.wind_speed_mps must be >= 0".into()));
        }
        for (i, z) in self.no_fly_zones.iter().enumerate() {
            check_point(&format!("no_fly_zones[{i}]"), &z.center)?;
            if !(z.radius_km >= 0.0 && z.radius_km.is_finite()) {
                return Err(InstanceError::Validation(format!("no_fly_zones[{i}]: radius_km must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Step-1 performance thresholds. Absent JSON fields take the case-study
/// values (200 kbps, 95 %, 200 Wh, 20 packages, 75 km).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Isc3Demands {
    /// bits/s
    pub min_data_rate: f64,
    pub min_sensing_accuracy: f64,
    /// Wh, per trip
    pub energy_budget_per_trip: f64,
    /// packages per trip
    pub capacity: u32,
    /// km per trip
    pub max_trip_distance: f64,
}

impl Default for Isc3Demands {
    fn default() -> Self {
        Isc3Demands {
            min_data_rate: 200_000.0,
            min_sensing_accuracy: 0.95,
            energy_budget_per_trip: 200.0,
            capacity: 20,
            max_trip_distance: 75.0,
        }
    }
}

impl Isc3Demands {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(InstanceError::Validation(format!("demands.{name} must be > 0 (got {v})")))
            }
        };
        positive("min_data_rate", self.min_data_rate)?;
        positive("min_sensing_accuracy", self.min_sensing_accuracy)?;
        positive("energy_budget_per_trip", self.energy_budget_per_trip)?;
        positive("max_trip_distance", self.max_trip_distance)?;
        if self.min_sensing_accuracy > 1.0 {
            return Err(InstanceError::Validation(format!(
                "demands.min_sensing_accuracy must be <= 1 (got {})",
                self.min_sensing_accuracy
            )));
        }
        if self.capacity == 0 {
            return Err(InstanceError::Validation("demands.capacity must be > 0".into()));
        }
        Ok(())
    }
}

/// Symmetric matrix of km over `[depot, stations...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    /// Mean of the off-diagonal entries; 0 for a 1x1 matrix.
    pub fn mean_off_diagonal(&self) -> f64 {
        if self.size < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j {
                    sum += self.get(i, j);
                }
            }
        }
        sum / (self.size * (self.size - 1)) as f64
    }
}

pub fn distance_matrix(instance: &DeliveryInstance) -> DistanceMatrix {
    let size = instance.stations.len() + 1;
    let mut data = vec![0.0; size * size];
    for i in 0..size {
        for j in (i + 1)..size {
            let d = distance_same_frame(instance.node(i), instance.node(j));
            data[i * size + j] = d;
            data[j * size + i] = d;
        }
    }
    DistanceMatrix { size, data }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    frame: Frame,
    depot: PointRecord,
    stations: Vec<StationRecord>,
    #[serde(default)]
    base_stations: Vec<BaseStationRecord>,
    weather: Weather,
    #[serde(default)]
    no_fly_zones: Vec<NoFlyRecord>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    demand: u32,
    required_sensing_accuracy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseStationRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    tx_power_dbm: f64,
    carrier_freq_mhz: f64,
    bandwidth_hz: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoFlyRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
    radius_km: f64,
}

fn point_from_parts(
    frame: Frame,
    field: &str,
    x: Option<f64>,
    y: Option<f64>,
    lat: Option<f64>,
    lon: Option<f64>,
) -> Result<GeoPoint, InstanceError> {
    let schema = |message: &str| InstanceError::Schema {
        field: field.to_string(),
        message: message.to_string(),
    };
    match frame {
        Frame::Planar => {
            if lat.is_some() || lon.is_some() {
                return Err(schema("planar frame expects `x`/`y`, found `lat`/`lon`"));
            }
            match (x, y) {
                (Some(x), Some(y)) => Ok(GeoPoint::planar(x, y)),
                (None, _) => Err(schema("missing field `x`")),
                (_, None) => Err(schema("missing field `y`")),
            }
        }
        Frame::Geodetic => {
            if x.is_some() || y.is_some() {
                return Err(schema("geodetic frame expects `lat`/`lon`, found `x`/`y`"));
            }
            match (lat, lon) {
                (Some(lat), Some(lon)) => Ok(GeoPoint::geodetic(lat, lon)),
                (None, _) => Err(schema("missing field `lat`")),
                (_, None) => Err(schema("missing field `lon`")),
            }
        }
    }
}

type CoordParts = (Option<f64>, Option<f64>, Option<f64>, Option<f64>);

fn point_parts(p: &GeoPoint) -> CoordParts {
    match p.frame {
        Frame::Planar => (Some(p.x), Some(p.y), None, None),
        Frame::Geodetic => (None, None, Some(p.lat()), Some(p.lon())),
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<DeliveryInstance, InstanceError> {
        let frame = self.frame;
        let d = self.depot;
        let depot = point_from_parts(frame, "depot", d.x, d.y, d.lat, d.lon)?;
        let stations = self
            .stations
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let location =
                    point_from_parts(frame, &format!("stations[{i}]"), s.x, s.y, s.lat, s.lon)?;
                Ok(Station {
                    id: s.id,
                    location,
                    demand: s.demand,
                    required_sensing_accuracy: s.required_sensing_accuracy,
                })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        let base_stations = self
            .base_stations
            .into_iter()
            .enumerate()
            .map(|(i, b)| {
                let location = point_from_parts(
                    frame,
                    &format!("base_stations[{i}]"),
                    b.x,
                    b.y,
                    b.lat,
                    b.lon,
                )?;
                Ok(BaseStation {
                    id: b.id,
                    location,
                    tx_power_dbm: b.tx_power_dbm,
                    carrier_freq_mhz: b.carrier_freq_mhz,
                    bandwidth_hz: b.bandwidth_hz,
                })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        let no_fly_zones = self
            .no_fly_zones
            .into_iter()
            .enumerate()
            .map(|(i, z)| {
                let center =
                    point_from_parts(frame, &format!("no_fly_zones[{i}]"), z.x, z.y, z.lat, z.lon)?;
                Ok(NoFlyZone { center, radius_km: z.radius_km })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        Ok(DeliveryInstance {
            depot,
            stations,
            base_stations,
            weather: self.weather,
            no_fly_zones,
        })
    }

    fn from_instance(instance: &DeliveryInstance) -> Self {
        let (x, y, lat, lon) = point_parts(&instance.depot);
        InstanceFile {
            frame: instance.frame(),
            depot: PointRecord { x, y, lat, lon },
            stations: instance
                .stations
                .iter()
                .map(|s| {
                    let (x, y, lat, lon) = point_parts(&s.location);
                    StationRecord {
                        id: s.id.clone(),
                        x,
                        y,
                        lat,
                        lon,
                        demand: s.demand,
                        required_sensing_accuracy: s.required_sensing_accuracy,
                    }
                })
                .collect(),
            base_stations: instance
                .base_stations
                .iter()
                .map(|b| {
                    let (x, y, lat, lon) = point_parts(&b.location);
                    BaseStationRecord {
                        id: b.id.clone(),
                        x,
                        y,
                        lat,
                        lon,
                        tx_power_dbm: b.tx_power_dbm,
                        carrier_freq_mhz: b.carrier_freq_mhz,
                        bandwidth_hz: b.bandwidth_hz,
                    }
                })
                .collect(),
            weather: instance.weather,
            no_fly_zones: instance
                .no_fly_zones
                .iter()
                .map(|z| {
                    let (x, y, lat, lon) = point_parts(&z.center);
                    NoFlyRecord { x, y, lat, lon, radius_km: z.radius_km }
                })
                .collect(),
        }
    }
}

impl Serialize for DeliveryInstance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        InstanceFile::from_instance(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DeliveryInstance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = InstanceFile::deserialize(deserializer)?;
        let instance = file.into_instance().map_err(serde::de::Error::custom)?;
        instance.validate().map_err(serde::de::Error::custom)?;
        Ok(instance)
    }
}

/// Parses and validates instance JSON. `source_name` only labels errors.
pub fn parse_instance(text: &str, source_name: &str) -> Result<DeliveryInstance, InstanceError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })?;
    let file: InstanceFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        InstanceError::Schema {
            field: path,
            message: e.into_inner().to_string(),
        }
    })?;
    let instance = file.into_instance()?;
    instance.validate()?;
    Ok(instance)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<DeliveryInstance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Parse {
        source_name: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_instance(&text, &path.display().to_string())
}

pub fn instance_to_json(instance: &DeliveryInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(instance))
        .expect("instance serialization cannot fail");
    s.push('\n');
    s
}

pub fn save_instance(instance: &DeliveryInstance, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, instance_to_json(instance))
}

// ---------------------------------------------------------------------------
// Generation

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    pub seed: u64,
    pub n_stations: usize,
    pub area_side_km: f64,
    pub n_base_stations: usize,
    pub demand_range: (u32, u32),
}

impl Default for GeneratorParams {
    /// The canonical benchmark scene shape: 10 stations on a 30 km square.
    fn default() -> Self {
        GeneratorParams {
            seed: 1,
            n_stations: 10,
            area_side_km: 30.0,
            n_base_stations: 5,
            demand_range: (1, 5),
        }
    }
}

/// Seeded random planar instance. The depot sits at the center of the square;
/// stations and base stations are uniform over it.
pub fn generate_instance(params: &GeneratorParams) -> Result<DeliveryInstance, InstanceError> {
    let (lo, hi) = params.demand_range;
    if params.n_stations < 1 {
        return Err(InstanceError::Argument("n_stations must be >= 1".into()));
    }
    if lo < 1 || hi < lo {
        return Err(InstanceError::Argument(format!(
            "demand range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
        )));
    }
    let side = params.area_side_km;
    if !(side > 0.0 && side.is_finite()) {
        return Err(InstanceError::Argument("area_side must be > 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let depot = GeoPoint::planar(side / 2.0, side / 2.0);
    let stations = (1..=params.n_stations)
        .map(|i| {
            let x = rng.gen_range(0.0..side);
            let y = rng.gen_range(0.0..side);
            let demand = rng.gen_range(lo..=hi);
            let required = f64::from(rng.gen_range(80u32..=95)) / 100.0;
            Station {
                id: format!("S{i}"),
                location: GeoPoint::planar(x, y),
                demand,
                required_sensing_accuracy: required,
            }
        })
        .collect();
    let base_stations = (1..=params.n_base_stations)
        .map(|i| BaseStation {
            id: format!("BS{i}"),
            location: GeoPoint::planar(rng.gen_range(0.0..side), rng.gen_range(0.0..side)),
            tx_power_dbm: BaseStation::DEFAULT_TX_POWER_DBM,
            carrier_freq_mhz: BaseStation::DEFAULT_CARRIER_FREQ_MHZ,
            bandwidth_hz: BaseStation::DEFAULT_BANDWIDTH_HZ,
        })
        .collect();
    let wind = f64::from(rng.gen_range(0u32..=100)) / 10.0;
    let instance = DeliveryInstance {
        depot,
        stations,
        base_stations,
        weather: Weather { visibility: 1.0, wind_speed: wind },
        no_fly_zones: Vec::new(),
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small(seed: u64, n: usize) -> DeliveryInstance {
        generate_instance(&GeneratorParams { seed, n_stations: n, ..Default::default() }).unwrap()
    }

    #[test]
    fn planar_pythagorean() {
        let d = distance(&GeoPoint::planar(0.0, 0.0), &GeoPoint::planar(3.0, 4.0)).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn geodetic_identity_and_antipode() {
        let p = GeoPoint::geodetic(32.06, 118.79);
        assert_eq!(distance(&p, &p).unwrap(), 0.0);
        let a = GeoPoint::geodetic(0.0, 0.0);
        let b = GeoPoint::geodetic(0.0, 180.0);
        let d = distance(&a, &b).unwrap();
        assert!((d - PI * 6371.0).abs() < 1e-9, "{d}");
        assert!((d - 20015.087).abs() < 1e-3);
    }

    #[test]
    fn frame_mismatch() {
        let err = distance(&GeoPoint::planar(0.0, 0.0), &GeoPoint::geodetic(0.0, 0.0));
        assert!(matches!(err, Err(InstanceError::FrameMismatch)));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = instance_to_json(&small(1, 10));
        let b = instance_to_json(&small(1, 10));
        assert_eq!(a, b);
        let c = small(2, 10);
        assert_ne!(small(1, 10).stations[0].location, c.stations[0].location);
    }

    #[test]
    fn generation_arguments() {
        let bad = GeneratorParams { n_stations: 0, ..Default::default() };
        assert!(matches!(generate_instance(&bad), Err(InstanceError::Argument(_))));
        let bad = GeneratorParams { demand_range: (0, 3), ..Default::default() };
        assert!(matches!(generate_instance(&bad), Err(InstanceError::Argument(_))));
        let bad = GeneratorParams { area_side_km: 0.0, ..Default::default() };
        assert!(matches!(generate_instance(&bad), Err(InstanceError::Argument(_))));
    }

    #[test]
    fn generated_layout() {
        let inst = small(5, 25);
        assert_eq!(inst.depot, GeoPoint::planar(15.0, 15.0));
        for s in &inst.stations {
            assert!((0.0..30.0).contains(&s.location.x));
            assert!((1..=5).contains(&s.demand));
        }
        assert_eq!(inst.base_stations.len(), 5);
    }

    #[test]
    fn matrix_single_station_at_depot() {
        let mut inst = small(1, 1);
        inst.stations[0].location = inst.depot;
        let m = distance_matrix(&inst);
        assert_eq!(m.size(), 2);
        assert!((0..2).all(|i| (0..2).all(|j| m.get(i, j) == 0.0)));
    }

    #[test]
    fn matrix_matches_pairwise_distance() {
        let inst = small(1, 10);
        let m = distance_matrix(&inst);
        for i in 0..m.size() {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..m.size() {
                assert_eq!(m.get(i, j), distance(inst.node(i), inst.node(j)).unwrap());
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn round_trip_is_identical() {
        let inst = small(9, 12);
        let text = instance_to_json(&inst);
        let back = parse_instance(&text, "mem").unwrap();
        assert_eq!(inst, back);
        assert_eq!(instance_to_json(&back), text);
    }

    #[test]
    fn geodetic_file_round_trip() {
        let text = r#"{
            "frame": "geodetic",
            "depot": {"lat": 32.05, "lon": 118.78},
            "stations": [{"id": "A", "lat": 32.10, "lon": 118.80, "demand": 2,
                          "required_sensing_accuracy": 0.9}],
            "base_stations": [{"id": "B", "lat": 32.0, "lon": 118.7, "tx_power_dbm": 40,
                               "carrier_freq_mhz": 2000, "bandwidth_hz": 1e6}],
            "weather": {"visibility": 0.95, "wind_speed_mps": 3.2},
            "no_fly_zones": [{"lat": 32.07, "lon": 118.79, "radius_km": 0.5}]
        }"#;
        let inst = parse_instance(text, "mem").unwrap();
        assert_eq!(inst.frame(), Frame::Geodetic);
        assert_eq!(inst.stations[0].location.lat(), 32.10);
        let again = parse_instance(&instance_to_json(&inst), "mem").unwrap();
        assert_eq!(inst, again);
    }

    fn minimal(stations: &str) -> String {
        format!(
            r#"{{"depot": {{"x": 0, "y": 0}}, "stations": {stations},
                "weather": {{"visibility": 1.0, "wind_speed_mps": 0}}}}"#
        )
    }

    #[test]
    fn zero_stations_rejected() {
        let err = parse_instance(&minimal("[]"), "mem").unwrap_err();
        assert!(matches!(err, InstanceError::Validation(_)), "{err}");
    }

    #[test]
    fn zero_demand_names_station() {
        let s = r#"[{"id": "S7", "x": 1, "y": 1, "demand": 0, "required_sensing_accuracy": 0.9}]"#;
        let err = parse_instance(&minimal(s), "mem").unwrap_err();
        match err {
            InstanceError::Validation(m) => assert!(m.contains("S7"), "{m}"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let s = r#"[{"id": "A", "x": 1, "y": 1, "demand": 1, "required_sensing_accuracy": 0.9},
                   {"id": "A", "x": 2, "y": 1, "demand": 1, "required_sensing_accuracy": 0.9}]"#;
        let err = parse_instance(&minimal(s), "mem").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(parse_instance("{oops", "mem"), Err(InstanceError::Parse { .. })));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let s = r#"[{"id": "A", "x": 1, "y": 1, "required_sensing_accuracy": 0.9}]"#;
        match parse_instance(&minimal(s), "mem").unwrap_err() {
            InstanceError::Schema { field, message } => {
                assert_eq!(field, "stations[0]");
                assert!(message.contains("demand"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let s = r#"[{"id": "A", "x": 1, "y": 1, "demand": "two", "required_sensing_accuracy": 0.9}]"#;
        match parse_instance(&minimal(s), "mem").unwrap_err() {
            InstanceError::Schema { field, .. } => assert_eq!(field, "stations[0].demand"),
            other => panic!("unexpected {other}"),
        }
        let s = r#"[{"id": "A", "lat": 1, "lon": 1, "demand": 1, "required_sensing_accuracy": 0.9}]"#;
        match parse_instance(&minimal(s), "mem").unwrap_err() {
            InstanceError::Schema { field, .. } => assert_eq!(field, "stations[0]"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"depot": {"x": 0, "y": 0}, "terrain": [],
            "stations": [{"id": "A", "x": 1, "y": 1, "demand": 1, "required_sensing_accuracy": 0.9}],
            "weather": {"visibility": 1.0}}"#;
        assert!(matches!(parse_instance(text, "mem"), Err(InstanceError::Schema { .. })));
    }

    #[test]
    fn demands_defaults_and_bounds() {
        let d: Isc3Demands = serde_json::from_str("{}").unwrap();
        assert_eq!(d, Isc3Demands::default());
        assert_eq!(d.min_data_rate, 200_000.0);
        assert_eq!(d.capacity, 20);
        let bad = Isc3Demands { min_sensing_accuracy: 1.2, ..d };
        assert!(bad.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn planar_matrix_is_a_metric(seed in 0u64..10_000, n in 1usize..15) {
                let inst = small(seed, n);
                let m = distance_matrix(&inst);
                let k = m.size();
                for i in 0..k {
                    prop_assert_eq!(m.get(i, i), 0.0);
                    for j in 0..k {
                        prop_assert!((m.get(i, j) - m.get(j, i)).abs() <= 1e-12);
                        for l in 0..k {
                            prop_assert!(m.get(i, l) <= m.get(i, j) + m.get(j, l) + 1e-9);
                        }
                    }
                }
            }

            #[test]
            fn save_load_round_trip(seed in 0u64..10_000, n in 1usize..12, bs in 0usize..4) {
                let inst = generate_instance(&GeneratorParams {
                    seed, n_stations: n, n_base_stations: bs, ..Default::default()
                }).unwrap();
                let back = parse_instance(&instance_to_json(&inst), "mem").unwrap();
                prop_assert_eq!(inst, back);
            }

            #[test]
            fn haversine_symmetric_nonnegative(
                lat1 in -90.0f64..=90.0, lon1 in -180.0f64..=180.0,
                lat2 in -90.0f64..=90.0, lon2 in -180.0f64..=180.0,
            ) {
                let a = GeoPoint::geodetic(lat1, lon1);
                let b = GeoPoint::geodetic(lat2, lon2);
                let ab = distance(&a, &b).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert_eq!(ab, distance(&b, &a).unwrap());
                prop_assert!(ab <= PI * EARTH_RADIUS_KM + 1e-9);
            }
        }
    }
}
