//! Helpers shared by the integration tests. The oracles here are written
//! independently of the library code they check.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

use skyroute_core::constraints::Models;
use skyroute_core::instance::{save_instance, DeliveryInstance, GeoPoint, Isc3Demands};
use skyroute_core::pipeline::{EventKind, RunConfig, TelemetryLog};
use skyroute_core::routing::{RoutePlan, Trip};
use skyroute_core::solvers::SolverResult;
use skyroute_core::{distance, EnergyParams};

fn d(a: &GeoPoint, b: &GeoPoint) -> f64 {
    distance(a, b).expect("same frame")
}

/// Closed length depot -> stations -> depot, summed leg by leg from the depot.
pub fn closed_length(inst: &DeliveryInstance, stations: &[usize]) -> f64 {
    let mut len = 0.0;
    let mut here = inst.depot;
    for &s in stations {
        let next = inst.stations[s].location;
        len += d(&here, &next);
        here = next;
    }
    len + d(&here, &inst.depot)
}

/// Minimum total length over all 2^(n-1) ways to cut `tour` into contiguous
/// trips that respect capacity, trip distance and the energy budget, with
/// trip lengths summed left to right. `None` if no partition is feasible.
pub fn exhaustive_split_minimum(
    inst: &DeliveryInstance,
    tour: &[usize],
    demands: &Isc3Demands,
    energy: &EnergyParams,
) -> Option<f64> {
    let n = tour.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << (n - 1)) {
        let mut total = 0.0;
        let mut ok = true;
        let mut start = 0;
        for end in 1..=n {
            let cut_here = end == n || mask & (1 << (end - 1)) != 0;
            if !cut_here {
                continue;
            }
            let trip = &tour[start..end];
            let load: u32 = trip.iter().map(|&s| inst.stations[s].demand).sum();
            let len = closed_length(inst, trip);
            let wh = energy.energy_per_km * len + energy.energy_per_delivery * trip.len() as f64;
            if load > demands.capacity || len > demands.max_trip_distance || wh > demands.energy_budget_per_trip {
                ok = false;
                break;
            }
            total += len;
            start = end;
        }
        if ok && best.is_none_or(|b| total < b) {
            best = Some(total);
        }
    }
    best
}

/// Random order, random cut points; trip records filled in consistently.
pub fn random_partition_plan(inst: &DeliveryInstance, rng: &mut impl Rng) -> RoutePlan {
    let mut order: Vec<usize> = (0..inst.n_stations()).collect();
    order.shuffle(rng);
    let mut trips = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for (i, &s) in order.iter().enumerate() {
        current.push(s);
        if i + 1 == order.len() || rng.gen_bool(0.35) {
            let len = closed_length(inst, &current);
            trips.push(Trip {
                stations: current.iter().map(|&s| inst.stations[s].id.clone()).collect(),
                length_km: len,
                load: current.iter().map(|&s| inst.stations[s].demand).sum(),
                energy_wh: 2.5 * len + current.len() as f64,
            });
            current.clear();
        }
    }
    let total_length_km = trips.iter().map(|t| t.length_km).sum();
    RoutePlan { trips, total_length_km }
}

/// Drops every object entry named in `keys`, at any depth.
pub fn remove_keys(v: &mut Value, keys: &[&str]) {
    match v {
        Value::Object(map) => {
            for k in keys {
                map.remove(*k);
            }
            for child in map.values_mut() {
                remove_keys(child, keys);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|c| remove_keys(c, keys)),
        _ => {}
    }
}

/// Result JSON with wall-clock fields removed.
pub fn strip_volatile(r: &SolverResult) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    remove_keys(&mut v, &["wall_time_s"]);
    v.to_string()
}

/// Writes `inst` and a default run config next to it; returns the config
/// path. `tag` distinguishes several runs in one directory.
pub fn write_canonical_run(dir: &Path, inst: &DeliveryInstance, tag: Option<u64>) -> PathBuf {
    let tag = tag.map_or("canonical".to_string(), |t| format!("scene{t}"));
    let scene = format!("{tag}.json");
    save_instance(inst, dir.join(&scene)).unwrap();
    let mut cfg = RunConfig::new(scene);
    cfg.seed = 7;
    let path = dir.join(format!("run_{tag}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Recomputes the battery at every delivery from the plan and compares it
/// with the telemetry. Returns the number of deliveries checked.
pub fn check_battery_at_deliveries(
    plan: &RoutePlan,
    inst: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
    log: &TelemetryLog,
) -> Result<usize, String> {
    let mut checked = 0;
    for (k, trip) in plan.trips.iter().enumerate() {
        let delivers: Vec<_> = log.events.iter().filter(|e| e.trip == k && e.kind == EventKind::Deliver).collect();
        if delivers.len() != trip.stations.len() {
            return Err(format!("trip {k}: {} deliveries logged for {} stations", delivers.len(), trip.stations.len()));
        }
        let mut here = inst.depot;
        let mut flown = 0.0;
        for (i, id) in trip.stations.iter().enumerate() {
            let next = inst.stations.iter().find(|s| &s.id == id).ok_or("unknown station")?.location;
            flown += d(&here, &next);
            here = next;
            let expected = demands.energy_budget_per_trip
                - (models.energy.energy_per_km * flown + models.energy.energy_per_delivery * (i + 1) as f64);
            let got = delivers[i].battery_wh;
            if (got - expected).abs() > 1e-9 {
                return Err(format!("trip {k} delivery {id}: battery {got} Wh, energy model says {expected}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Writes `lines` on one connection, half-closes, and reads every response
/// line until the server closes.
pub fn raw_exchange(addr: SocketAddr, lines: &[String]) -> std::io::Result<Vec<String>> {
    let mut stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    for l in lines {
        stream.write_all(l.as_bytes())?;
        stream.write_all(b"\n")?;
    }
    stream.flush()?;
    stream.shutdown(std::net::Shutdown::Write)?;
    BufReader::new(stream).lines().collect()
}
