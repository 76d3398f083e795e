//! Shared fixtures for the benchmarks.

use skyroute_core::instance::{generate_instance, DeliveryInstance, GeneratorParams};

/// Seeded instance with `n` stations. Larger scenes get a proportionally
/// larger area so the station density stays close to the canonical one.
pub fn scene(n: usize) -> DeliveryInstance {
    let side = 30.0 * (n as f64 / 10.0).sqrt().max(1.0);
    let side = side.min(36.0);
    generate_instance(&GeneratorParams { seed: 42, n_stations: n, area_side_km: side, ..Default::default() })
        .expect("benchmark parameters are valid")
}

/// The ten-station scene used throughout the acceptance suite.
pub fn canonical() -> DeliveryInstance {
    generate_instance(&GeneratorParams::default()).expect("default parameters are valid")
}
