use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::constraints::{achievable_rate, check_route_feasibility, leg_samples, trip_energy, Models};
use crate::instance::{distance_same_frame, DeliveryInstance, GeoPoint, Isc3Demands};
use crate::routing::RoutePlan;

/// Flight timing for the simulated execution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecuteParams {
    pub cruise_speed_mps: f64,
    /// Hover time at each station, and landing time back at the depot.
    pub dwell_s: f64,
    /// Ground time at the depot between trips (battery swap and reload).
    pub turnaround_s: f64,
}

impl Default for ExecuteParams {
    fn default() -> Self {
        ExecuteParams { cruise_speed_mps: 15.0, dwell_s: 30.0, turnaround_s: 300.0 }
    }
}

impl ExecuteParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("cruise_speed_mps", self.cruise_speed_mps),
            ("dwell_s", self.dwell_s),
            ("turnaround_s", self.turnaround_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0 (got {v})"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Depart,
    Waypoint,
    Deliver,
    Return,
    Abort,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Depart => "depart",
            EventKind::Waypoint => "waypoint",
            EventKind::Deliver => "deliver",
            EventKind::Return => "return",
            EventKind::Abort => "abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryEvent {
    pub time_s: f64,
    pub trip: usize,
    pub kind: EventKind,
    pub position: GeoPoint,
    pub battery_wh: f64,
    pub rate_bps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TelemetryLog {
    pub events: Vec<TelemetryEvent>,
}

impl TelemetryLog {
    pub const CSV_HEADER: [&'static str; 9] =
        ["time_s", "trip", "kind", "frame", "x", "y", "battery_wh", "rate_bps", "station"];

    /// One row per event. Floats are written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::CSV_HEADER).expect("in-memory write");
        for e in &self.events {
            let frame = match e.position.frame {
                crate::instance::Frame::Planar => "planar",
                crate::instance::Frame::Geodetic => "geodetic",
            };
            w.write_record([
                e.time_s.to_string(),
                e.trip.to_string(),
                e.kind.as_str().to_string(),
                frame.to_string(),
                e.position.x.to_string(),
                e.position.y.to_string(),
                e.battery_wh.to_string(),
                e.rate_bps.to_string(),
                e.station.clone().unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

struct Flight<'a> {
    instance: &'a DeliveryInstance,
    demands: &'a Isc3Demands,
    models: &'a Models,
    km_per_s: f64,
    events: Vec<TelemetryEvent>,
}

impl Flight<'_> {
    fn rate(&self, p: &GeoPoint) -> f64 {
        achievable_rate(p, &self.instance.base_stations, &self.models.link)
    }

    /// Logs an event, or an abort in its place if the link or battery fails
    /// there. Returns false on abort.
    fn log(&mut self, time_s: f64, trip: usize, kind: EventKind, position: GeoPoint, battery_wh: f64, station: Option<&str>) -> bool {
        let rate_bps = self.rate(&position);
        let failed = rate_bps < self.demands.min_data_rate || battery_wh < 0.0;
        if failed {
            log::error!("trip {trip} aborted at t={time_s:.1} s: rate {rate_bps:.0} bit/s, battery {battery_wh:.3} Wh");
        }
        self.events.push(TelemetryEvent {
            time_s,
            trip,
            kind: if failed { EventKind::Abort } else { kind },
            position,
            battery_wh,
            rate_bps,
            station: station.map(str::to_string),
        });
        !failed
    }

    /// Flies one trip from `t`, returning the time of the last event.
    fn fly_trip(&mut self, trip: usize, stops: &[(GeoPoint, Option<&str>)], t: f64, dwell_s: f64) -> f64 {
        let budget = self.demands.energy_budget_per_trip;
        let energy = self.models.energy;
        let step = self.models.link.sample_step_km;
        let depot = self.instance.depot;
        if !self.log(t, trip, EventKind::Depart, depot, budget, None) {
            return t;
        }
        let mut here = depot;
        let mut leg_start = t;
        let mut flown = 0.0;
        let mut delivered = 0;
        for &(target, station) in stops {
            let length = distance_same_frame(&here, &target);
            let samples = leg_samples(&here, &target, length, step);
            // first and last samples are the leg endpoints
            for (k, p) in samples.iter().enumerate().take(samples.len() - 1).skip(1) {
                let along = k as f64 * step;
                let time = leg_start + along / self.km_per_s;
                let battery = budget - trip_energy(flown + along, delivered, &energy);
                if !self.log(time, trip, EventKind::Waypoint, *p, battery, None) {
                    return time;
                }
            }
            flown += length;
            let arrival = leg_start + length / self.km_per_s;
            let kind = if station.is_some() {
                delivered += 1;
                EventKind::Deliver
            } else {
                EventKind::Return
            };
            let battery = budget - trip_energy(flown, delivered, &energy);
            leg_start = arrival + dwell_s;
            if !self.log(leg_start, trip, kind, target, battery, station) {
                return leg_start;
            }
            here = target;
        }
        leg_start
    }
}

/// Step 5: flies `plan` at constant speed along straight legs, sampling the
/// link every `models.link.sample_step_km`. Rejects plans that fail the
/// feasibility check under the same models.
pub fn execute(
    plan: &RoutePlan,
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
    params: &ExecuteParams,
) -> Result<TelemetryLog, PipelineError> {
    params.validate().map_err(PipelineError::Validation)?;
    let report = check_route_feasibility(plan, demands, instance, models)
        .map_err(|e| PipelineError::InfeasiblePlanRejected(e.to_string()))?;
    if !report.passed {
        let failing: Vec<String> = report
            .records
            .iter()
            .filter(|r| !r.passed)
            .map(|r| format!("{:?}", r.kind))
            .collect();
        return Err(PipelineError::InfeasiblePlanRejected(format!("failing checks: {}", failing.join(", "))));
    }

    let mut flight = Flight {
        instance,
        demands,
        models,
        km_per_s: params.cruise_speed_mps / 1000.0,
        events: Vec::new(),
    };
    let mut t = 0.0;
    for (k, trip) in plan.trips.iter().enumerate() {
        if k > 0 {
            t += params.turnaround_s;
        }
        let mut stops: Vec<(GeoPoint, Option<&str>)> = trip
            .stations
            .iter()
            .map(|id| {
                let i = instance.station_index(id).expect("ids checked by the feasibility pass");
                (instance.stations[i].location, Some(id.as_str()))
            })
            .collect();
        stops.push((instance.depot, None));
        t = flight.fly_trip(k, &stops, t, params.dwell_s);
    }
    let aborts = flight.events.iter().filter(|e| e.kind == EventKind::Abort).count();
    debug_assert_eq!(aborts, 0, "a plan that passed feasibility aborted in flight");
    Ok(TelemetryLog { events: flight.events })
}
