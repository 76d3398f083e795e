//! Communication, sensing and energy models, and route feasibility checks
//! against the ISC3 demands.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{distance_same_frame, BaseStation, DeliveryInstance, GeoPoint, Isc3Demands, Weather};
use crate::routing::RoutePlan;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("plan references unknown station `{0}`")]
    UnknownStation(String),
}

/// Free-space path loss in dB for `d_km` km at `f_mhz` MHz. Distances below
/// 1 m are clamped to 1 m.
// the negated comparisons also reject NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn fspl_db(d_km: f64, f_mhz: f64) -> Result<f64, ConstraintError> {
    if !(f_mhz > 0.0) {
        return Err(ConstraintError::Argument(format!("carrier frequency must be > 0 MHz (got {f_mhz})")));
    }
    if !(d_km >= 0.0) {
        return Err(ConstraintError::Argument(format!("distance must be >= 0 km (got {d_km})")));
    }
    let d = d_km.max(0.001);
    Ok(20.0 * d.log10() + 20.0 * f_mhz.log10() + 32.44)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkParams {
    pub noise_power_dbm: f64,
    /// Trajectory sampling granularity, km.
    pub sample_step_km: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams { noise_power_dbm: -100.0, sample_step_km: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    /// Wh per km flown.
    pub energy_per_km: f64,
    /// Wh per delivery.
    pub energy_per_delivery: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams { energy_per_km: 2.5, energy_per_delivery: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensingParams {
    /// Sensor accuracy in perfect visibility.
    pub base_accuracy: f64,
}

impl Default for SensingParams {
    fn default() -> Self {
        SensingParams { base_accuracy: 0.98 }
    }
}

/// The physical models used by feasibility checking and execution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Models {
    pub link: LinkParams,
    pub energy: EnergyParams,
    pub sensing: SensingParams,
}

impl Models {
    pub fn validate(&self) -> Result<(), ConstraintError> {
        let l = &self.link;
        if !(l.sample_step_km > 0.0 && l.sample_step_km.is_finite()) {
            return Err(ConstraintError::Argument("link.sample_step_km must be > 0".into()));
        }
        if !l.noise_power_dbm.is_finite() {
            return Err(ConstraintError::Argument("link.noise_power_dbm must be finite".into()));
        }
        let e = &self.energy;
        if !(e.energy_per_km >= 0.0 && e.energy_per_delivery >= 0.0)
            || !e.energy_per_km.is_finite()
            || !e.energy_per_delivery.is_finite()
        {
            return Err(ConstraintError::Argument("energy parameters must be >= 0".into()));
        }
        let a = self.sensing.base_accuracy;
        if !(a > 0.0 && a <= 1.0) {
            return Err(ConstraintError::Argument(format!("sensing.base_accuracy {a} outside (0, 1]")));
        }
        Ok(())
    }
}

fn shannon_rate(bs: &BaseStation, d_km: f64, link: &LinkParams) -> f64 {
    // carrier_freq > 0 is an instance invariant
    let loss = fspl_db(d_km, bs.carrier_freq_mhz).unwrap_or(f64::INFINITY);
    let snr_db = bs.tx_power_dbm - loss - link.noise_power_dbm;
    let snr = 10f64.powf(snr_db / 10.0);
    bs.bandwidth_hz * (1.0 + snr).log2()
}

/// Best Shannon rate (bits/s) over all base stations at `p`. Base stations in
/// another coordinate frame are unreachable.
pub fn achievable_rate(p: &GeoPoint, base_stations: &[BaseStation], link: &LinkParams) -> f64 {
    base_stations
        .iter()
        .filter(|bs| bs.location.frame == p.frame)
        .map(|bs| shannon_rate(bs, distance_same_frame(p, &bs.location), link))
        .fold(0.0, f64::max)
}

/// Radius (km) around `bs` inside which the rate reaches `min_rate`.
pub fn coverage_radius_km(bs: &BaseStation, link: &LinkParams, min_rate: f64) -> f64 {
    let snr_needed = (min_rate / bs.bandwidth_hz).exp2() - 1.0;
    let max_loss = bs.tx_power_dbm - link.noise_power_dbm - 10.0 * snr_needed.log10();
    let exponent = (max_loss - 32.44 - 20.0 * bs.carrier_freq_mhz.log10()) / 20.0;
    10f64.powf(exponent)
}

/// Accuracy the onboard sensor achieves under `weather`.
pub fn sensing_accuracy(weather: &Weather, sensing: &SensingParams) -> f64 {
    sensing.base_accuracy * weather.visibility
}

pub fn trip_energy(trip_length_km: f64, n_deliveries: usize, e: &EnergyParams) -> f64 {
    e.energy_per_km * trip_length_km + e.energy_per_delivery * n_deliveries as f64
}

/// Sample points along `a -> b` at every `step` km from `a`, plus `b` itself.
pub fn leg_samples(a: &GeoPoint, b: &GeoPoint, length: f64, step: f64) -> Vec<GeoPoint> {
    let mut out = Vec::new();
    if length > 0.0 {
        let mut k = 0u64;
        loop {
            let t = k as f64 * step;
            if t >= length {
                break;
            }
            out.push(a.lerp(b, t / length));
            k += 1;
        }
    } else {
        out.push(*a);
    }
    out.push(*b);
    out
}

/// Minimum achievable rate over the sampled trajectory `a -> b` and where it
/// occurs.
pub fn leg_min_rate(
    a: &GeoPoint,
    b: &GeoPoint,
    base_stations: &[BaseStation],
    link: &LinkParams,
) -> (f64, GeoPoint) {
    let length = distance_same_frame(a, b);
    let mut worst = (f64::INFINITY, *a);
    for p in leg_samples(a, b, length, link.sample_step_km) {
        let r = achievable_rate(&p, base_stations, link);
        if r < worst.0 {
            worst = (r, p);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Capacity,
    TripDistance,
    Energy,
    DataRate,
    Sensing,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 5] = [
        ConstraintKind::Capacity,
        ConstraintKind::TripDistance,
        ConstraintKind::Energy,
        ConstraintKind::DataRate,
        ConstraintKind::Sensing,
    ];

    /// Upper-bounded constraints fail when the value exceeds the threshold.
    pub fn is_upper_bound(self) -> bool {
        matches!(self, ConstraintKind::Capacity | ConstraintKind::TripDistance | ConstraintKind::Energy)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstLocation {
    pub trip: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub kind: ConstraintKind,
    pub passed: bool,
    /// `None` when nothing was checked (e.g. an empty plan).
    pub worst_value: Option<f64>,
    pub threshold: f64,
    pub violation: f64,
    pub location: Option<WorstLocation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub passed: bool,
    pub records: Vec<ConstraintRecord>,
}

impl FeasibilityReport {
    pub fn record(&self, kind: ConstraintKind) -> &ConstraintRecord {
        self.records
            .iter()
            .find(|r| r.kind == kind)
            .expect("report carries every constraint kind")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyWeights {
    pub capacity: f64,
    pub trip_distance: f64,
    pub energy: f64,
    pub data_rate: f64,
    pub sensing: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights::uniform(1000.0)
    }
}

impl PenaltyWeights {
    pub fn uniform(w: f64) -> Self {
        PenaltyWeights { capacity: w, trip_distance: w, energy: w, data_rate: w, sensing: w }
    }

    pub fn get(&self, kind: ConstraintKind) -> f64 {
        match kind {
            ConstraintKind::Capacity => self.capacity,
            ConstraintKind::TripDistance => self.trip_distance,
            ConstraintKind::Energy => self.energy,
            ConstraintKind::DataRate => self.data_rate,
            ConstraintKind::Sensing => self.sensing,
        }
    }

    pub fn validate(&self) -> Result<(), ConstraintError> {
        if ConstraintKind::ALL.iter().all(|&k| self.get(k) >= 0.0 && self.get(k).is_finite()) {
            Ok(())
        } else {
            Err(ConstraintError::Argument("penalty weights must be finite and >= 0".into()))
        }
    }
}

/// Weighted sum of violations, each normalized by its threshold.
pub fn penalty(report: &FeasibilityReport, weights: &PenaltyWeights) -> f64 {
    report
        .records
        .iter()
        .map(|r| weighted_violation(r.kind, r.violation, r.threshold, weights))
        .sum()
}

pub(crate) fn weighted_violation(kind: ConstraintKind, violation: f64, threshold: f64, w: &PenaltyWeights) -> f64 {
    if violation > 0.0 {
        w.get(kind) * violation / threshold
    } else {
        0.0
    }
}

/// Worst offender for one constraint kind, before it is turned into a record.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Worst {
    pub value: f64,
    pub threshold: f64,
    pub violation: f64,
    pub trip: usize,
    /// Matrix index of the offending station, if any.
    pub node: Option<usize>,
    pub point: Option<GeoPoint>,
    seen: bool,
}

impl Worst {
    fn new(threshold: f64) -> Self {
        Worst { value: 0.0, threshold, violation: 0.0, trip: 0, node: None, point: None, seen: false }
    }

    /// Keeps the observation with the largest violation; among equal
    /// violations the most extreme value, then the first seen.
    fn observe(&mut self, kind: ConstraintKind, value: f64, threshold: f64, trip: usize, node: Option<usize>, point: Option<GeoPoint>) {
        let violation = if kind.is_upper_bound() {
            (value - threshold).max(0.0)
        } else {
            (threshold - value).max(0.0)
        };
        let more_extreme = if kind.is_upper_bound() { value > self.value } else { value < self.value };
        if !self.seen || violation > self.violation || (violation == self.violation && more_extreme) {
            *self = Worst { value, threshold, violation, trip, node, point, seen: true };
        }
    }
}

/// Per-kind worst offenders for a plan given as matrix-index trips.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Assessment {
    pub worst: [Worst; 5],
}

impl Assessment {
    pub fn passed(&self) -> bool {
        self.worst.iter().all(|w| w.violation == 0.0)
    }

    pub fn penalty(&self, weights: &PenaltyWeights) -> f64 {
        ConstraintKind::ALL
            .iter()
            .map(|&k| {
                let w = &self.worst[k.slot()];
                weighted_violation(k, w.violation, w.threshold, weights)
            })
            .sum()
    }

    pub fn into_report(self, instance: &DeliveryInstance) -> FeasibilityReport {
        let records: Vec<ConstraintRecord> = ConstraintKind::ALL
            .iter()
            .map(|&kind| {
                let w = self.worst[kind.slot()];
                ConstraintRecord {
                    kind,
                    passed: w.violation == 0.0,
                    worst_value: w.seen.then_some(w.value),
                    threshold: w.threshold,
                    violation: w.violation,
                    location: w.seen.then(|| WorstLocation {
                        trip: w.trip,
                        station: w.node.map(|n| instance.stations[n - 1].id.clone()),
                        point: w.point,
                    }),
                }
            })
            .collect();
        FeasibilityReport { passed: records.iter().all(|r| r.passed), records }
    }
}

/// Everything needed to assess trips given as matrix indices.
pub(crate) struct Assessor<'a> {
    pub instance: &'a DeliveryInstance,
    pub demands: &'a Isc3Demands,
    pub models: &'a Models,
}

impl Assessor<'_> {
    /// Length of a closed trip over matrix indices, accumulated
    /// depot -> first -> ... -> last -> depot.
    pub fn trip_length(&self, dist: &dyn Fn(usize, usize) -> f64, trip: &[usize]) -> f64 {
        let (Some(&first), Some(&last)) = (trip.first(), trip.last()) else {
            return 0.0;
        };
        let mut len = dist(0, first);
        for w in trip.windows(2) {
            len += dist(w[0], w[1]);
        }
        len + dist(last, 0)
    }

    /// `leg_rate(a, b)` returns the minimum sampled rate on leg `a -> b`.
    pub fn assess<'t>(
        &self,
        trips: impl IntoIterator<Item = &'t [usize]>,
        dist: &dyn Fn(usize, usize) -> f64,
        leg_rate: &mut dyn FnMut(usize, usize) -> (f64, GeoPoint),
    ) -> Assessment {
        let d = self.demands;
        let mut worst = [
            Worst::new(f64::from(d.capacity)),
            Worst::new(d.max_trip_distance),
            Worst::new(d.energy_budget_per_trip),
            Worst::new(d.min_data_rate),
            Worst::new(d.min_sensing_accuracy),
        ];
        let accuracy = sensing_accuracy(&self.instance.weather, &self.models.sensing);
        for (t, trip) in trips.into_iter().enumerate() {
            if trip.is_empty() {
                continue;
            }
            let load: u64 = trip
                .iter()
                .map(|&n| u64::from(self.instance.stations[n - 1].demand))
                .sum();
            let length = self.trip_length(dist, trip);
            let energy = trip_energy(length, trip.len(), &self.models.energy);
            worst[0].observe(ConstraintKind::Capacity, load as f64, f64::from(d.capacity), t, None, None);
            worst[1].observe(ConstraintKind::TripDistance, length, d.max_trip_distance, t, None, None);
            worst[2].observe(ConstraintKind::Energy, energy, d.energy_budget_per_trip, t, None, None);

            let mut prev = 0;
            for &node in trip.iter().chain(std::iter::once(&0)) {
                let (rate, at) = leg_rate(prev, node);
                worst[3].observe(ConstraintKind::DataRate, rate, d.min_data_rate, t, None, Some(at));
                prev = node;
            }
            for &node in trip {
                let station = &self.instance.stations[node - 1];
                let threshold = d.min_sensing_accuracy.max(station.required_sensing_accuracy);
                worst[4].observe(
                    ConstraintKind::Sensing,
                    accuracy,
                    threshold,
                    t,
                    Some(node),
                    Some(station.location),
                );
            }
        }
        Assessment { worst }
    }
}

/// Checks every trip of `plan` against `demands` under `models`.
pub fn check_route_feasibility(
    plan: &RoutePlan,
    demands: &Isc3Demands,
    instance: &DeliveryInstance,
    models: &Models,
) -> Result<FeasibilityReport, ConstraintError> {
    let lookup: HashMap<&str, usize> = instance
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i + 1))
        .collect();
    let trips = plan
        .trips
        .iter()
        .map(|trip| {
            trip.stations
                .iter()
                .map(|id| lookup.get(id.as_str()).copied().ok_or_else(|| ConstraintError::UnknownStation(id.clone())))
                .collect::<Result<Vec<usize>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let assessor = Assessor { instance, demands, models };
    let dist = |a: usize, b: usize| distance_same_frame(instance.node(a), instance.node(b));
    let mut cache: HashMap<(usize, usize), (f64, GeoPoint)> = HashMap::new();
    let mut leg_rate = |a: usize, b: usize| {
        *cache.entry((a, b)).or_insert_with(|| {
            leg_min_rate(instance.node(a), instance.node(b), &instance.base_stations, &models.link)
        })
    };
    let assessment = assessor.assess(trips.iter().map(Vec::as_slice), &dist, &mut leg_rate);
    Ok(assessment.into_report(instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, GeneratorParams};
    use crate::routing::{RoutePlan, Trip};

    fn bs_at(x: f64, y: f64) -> BaseStation {
        BaseStation {
            id: "BS".into(),
            location: GeoPoint::planar(x, y),
            tx_power_dbm: 40.0,
            carrier_freq_mhz: 2000.0,
            bandwidth_hz: 1e6,
        }
    }

    #[test]
    fn fspl_reference_values() {
        assert!((fspl_db(1.0, 1.0).unwrap() - 32.44).abs() < 1e-12);
        assert!((fspl_db(10.0, 100.0).unwrap() - 92.44).abs() < 1e-12);
        let f = 2400.0;
        let clamped = fspl_db(0.0, f).unwrap();
        assert!((clamped - (-27.56 + 20.0 * f64::log10(f))).abs() < 1e-9);
        assert_eq!(clamped, fspl_db(0.001, f).unwrap());
        assert!(fspl_db(1.0, 0.0).is_err());
        assert!(fspl_db(1.0, -5.0).is_err());
    }

    #[test]
    fn no_base_stations_means_no_rate() {
        assert_eq!(achievable_rate(&GeoPoint::planar(0.0, 0.0), &[], &LinkParams::default()), 0.0);
    }

    #[test]
    fn unit_snr_gives_bandwidth() {
        // Pick the noise floor so that SNR is exactly 0 dB at 1 km.
        let bs = bs_at(0.0, 0.0);
        let loss = fspl_db(1.0, bs.carrier_freq_mhz).unwrap();
        let link = LinkParams { noise_power_dbm: bs.tx_power_dbm - loss, sample_step_km: 0.1 };
        let r = achievable_rate(&GeoPoint::planar(1.0, 0.0), &[bs], &link);
        assert!((r - 1.0e6).abs() < 1e-6, "{r}");
    }

    #[test]
    fn rate_matches_hand_chain() {
        let inst = generate_instance(&GeneratorParams::default()).unwrap();
        let link = LinkParams::default();
        let p = GeoPoint::planar(3.25, 27.5);
        // FSPL -> SNR -> Shannon, composed by hand for every base station
        let expected = inst
            .base_stations
            .iter()
            .map(|b| {
                let d = ((p.x - b.location.x).powi(2) + (p.y - b.location.y).powi(2)).sqrt();
                let pl = 20.0 * d.max(0.001).log10() + 20.0 * b.carrier_freq_mhz.log10() + 32.44;
                let snr = 10f64.powf((b.tx_power_dbm - pl - link.noise_power_dbm) / 10.0);
                b.bandwidth_hz * (1.0 + snr).log2()
            })
            .fold(0.0, f64::max);
        let got = achievable_rate(&p, &inst.base_stations, &link);
        assert!((got - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn coverage_radius_hits_min_rate() {
        let bs = bs_at(0.0, 0.0);
        let link = LinkParams::default();
        let r = coverage_radius_km(&bs, &link, 200_000.0);
        let rate = achievable_rate(&GeoPoint::planar(r, 0.0), &[bs], &link);
        assert!((rate - 200_000.0).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn sensing_model() {
        let s = SensingParams { base_accuracy: 0.98 };
        assert_eq!(sensing_accuracy(&Weather { visibility: 1.0, wind_speed: 0.0 }, &s), 0.98);
        let v = sensing_accuracy(&Weather { visibility: 0.9, wind_speed: 0.0 }, &s);
        assert!((v - 0.882).abs() < 1e-12);
        let one = SensingParams { base_accuracy: 1.0 };
        assert_eq!(sensing_accuracy(&Weather { visibility: 0.37, wind_speed: 0.0 }, &one), 0.37);
    }

    #[test]
    fn energy_model() {
        let e = EnergyParams::default();
        assert_eq!(trip_energy(0.0, 0, &e), 0.0);
        assert!((trip_energy(75.0, 5, &e) - 192.5).abs() < 1e-12);
        let split = trip_energy(30.0, 2, &e) + trip_energy(45.0, 3, &e);
        assert!((split - trip_energy(75.0, 5, &e)).abs() < 1e-12);
    }

    #[test]
    fn leg_sampling_includes_endpoints() {
        let a = GeoPoint::planar(0.0, 0.0);
        let b = GeoPoint::planar(0.25, 0.0);
        let s = leg_samples(&a, &b, 0.25, 0.1);
        let xs: Vec<f64> = s.iter().map(|p| p.x).collect();
        assert_eq!(xs.len(), 4);
        assert_eq!(xs[0], 0.0);
        assert_eq!(*xs.last().unwrap(), 0.25);
        assert_eq!(leg_samples(&a, &a, 0.0, 0.1).len(), 2);
    }

    fn line_instance() -> DeliveryInstance {
        let text = r#"{"depot": {"x": 0, "y": 0},
            "stations": [{"id": "A", "x": 40, "y": 0, "demand": 3, "required_sensing_accuracy": 0.9},
                         {"id": "B", "x": 10, "y": 0, "demand": 2, "required_sensing_accuracy": 0.99}],
            "base_stations": [{"id": "BS1", "x": 0, "y": 0, "tx_power_dbm": 40,
                               "carrier_freq_mhz": 2000, "bandwidth_hz": 1e6}],
            "weather": {"visibility": 1.0}}"#;
        crate::instance::parse_instance(text, "mem").unwrap()
    }

    fn plan(trips: &[&[&str]]) -> RoutePlan {
        RoutePlan {
            trips: trips
                .iter()
                .map(|t| Trip { stations: t.iter().map(|s| s.to_string()).collect(), length_km: 0.0, load: 0, energy_wh: 0.0 })
                .collect(),
            total_length_km: 0.0,
        }
    }

    #[test]
    fn empty_plan_passes() {
        let inst = line_instance();
        let r = check_route_feasibility(&plan(&[]), &Isc3Demands::default(), &inst, &Models::default()).unwrap();
        assert!(r.passed);
        assert!(r.records.iter().all(|c| c.violation == 0.0 && c.passed));
        assert_eq!(penalty(&r, &PenaltyWeights::default()), 0.0);
    }

    #[test]
    fn long_trip_violates_distance_by_five_km() {
        let inst = line_instance();
        let d = Isc3Demands { min_sensing_accuracy: 0.9, energy_budget_per_trip: 1e6, ..Default::default() };
        // depot -> A (40 km) -> depot: 80 km
        let r = check_route_feasibility(&plan(&[&["A"]]), &d, &inst, &Models::default()).unwrap();
        let rec = r.record(ConstraintKind::TripDistance);
        assert!(!rec.passed);
        assert!((rec.violation - 5.0).abs() < 1e-12);
        assert_eq!(rec.worst_value, Some(80.0));
        assert!(!r.passed);
    }

    #[test]
    fn sensing_uses_station_threshold() {
        let inst = line_instance();
        let r = check_route_feasibility(&plan(&[&["B"]]), &Isc3Demands::default(), &inst, &Models::default()).unwrap();
        let rec = r.record(ConstraintKind::Sensing);
        assert!(!rec.passed);
        assert_eq!(rec.threshold, 0.99);
        assert!((rec.violation - 0.01).abs() < 1e-12);
        assert_eq!(rec.location.as_ref().unwrap().station.as_deref(), Some("B"));
    }

    #[test]
    fn unknown_station_is_an_error() {
        let inst = line_instance();
        let err = check_route_feasibility(&plan(&[&["Z"]]), &Isc3Demands::default(), &inst, &Models::default());
        assert_eq!(err.unwrap_err(), ConstraintError::UnknownStation("Z".into()));
    }

    #[test]
    fn penalty_arithmetic() {
        let rec = |kind, violation, threshold| ConstraintRecord {
            kind,
            passed: violation == 0.0,
            worst_value: Some(0.0),
            threshold,
            violation,
            location: None,
        };
        let report = FeasibilityReport {
            passed: false,
            records: vec![rec(ConstraintKind::TripDistance, 7.5, 75.0), rec(ConstraintKind::Capacity, 0.0, 20.0)],
        };
        let w = PenaltyWeights::uniform(100.0);
        assert!((penalty(&report, &w) - 10.0).abs() < 1e-12);
        assert!((penalty(&report, &PenaltyWeights::uniform(200.0)) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rate_failure_located() {
        let inst = line_instance();
        let d = Isc3Demands { min_data_rate: 5.0e6, min_sensing_accuracy: 0.9, max_trip_distance: 1e3, energy_budget_per_trip: 1e6, ..Default::default() };
        let r = check_route_feasibility(&plan(&[&["A"]]), &d, &inst, &Models::default()).unwrap();
        let rec = r.record(ConstraintKind::DataRate);
        assert!(!rec.passed);
        // furthest sampled point from the lone base station is A itself
        assert_eq!(rec.location.as_ref().unwrap().point, Some(GeoPoint::planar(40.0, 0.0)));
    }
}
