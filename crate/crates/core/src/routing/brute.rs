use itertools::Itertools;

use crate::constraints::{Models, PenaltyWeights};
use crate::instance::{DeliveryInstance, Isc3Demands};

use super::{Evaluator, RoutePlan, RoutingError};

/// Largest instance the exhaustive search accepts (9! = 362,880 tours).
pub const BRUTE_FORCE_MAX_STATIONS: usize = 9;

/// Globally optimal feasible plan by enumerating every giant tour and
/// splitting each optimally. Among equal lengths the first tour in
/// lexicographic order wins.
pub fn brute_force_optimum(
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
) -> Result<RoutePlan, RoutingError> {
    let n = instance.n_stations();
    if n > BRUTE_FORCE_MAX_STATIONS {
        return Err(RoutingError::TooLarge { n, max: BRUTE_FORCE_MAX_STATIONS });
    }
    let ev = Evaluator::new(instance, demands, models, &PenaltyWeights::default())?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for tour in (0..n).permutations(n) {
        let obj = ev.objective(&tour);
        if !obj.feasible {
            continue;
        }
        if best.as_ref().is_none_or(|(_, len)| obj.total_length_km < *len) {
            best = Some((tour, obj.total_length_km));
        }
    }
    let (tour, _) = best.ok_or(RoutingError::NoFeasiblePlan)?;
    Ok(ev.plan(&tour))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, parse_instance, GeneratorParams};

    #[test]
    fn symmetric_pair() {
        let text = r#"{"depot": {"x": 0, "y": 0},
            "stations": [{"id": "A", "x": 5, "y": 1, "demand": 1, "required_sensing_accuracy": 0.9},
                         {"id": "B", "x": 5, "y": -1, "demand": 1, "required_sensing_accuracy": 0.9}],
            "base_stations": [{"id": "BS", "x": 0, "y": 0, "tx_power_dbm": 40,
                               "carrier_freq_mhz": 2000, "bandwidth_hz": 1e6}],
            "weather": {"visibility": 1.0}}"#;
        let inst = parse_instance(text, "mem").unwrap();
        let a = brute_force_optimum(&inst, &Isc3Demands::default(), &Models::default()).unwrap();
        let b = brute_force_optimum(&inst, &Isc3Demands::default(), &Models::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trips.len(), 1);
        assert_eq!(a.trips[0].stations, vec!["A", "B"]);
    }

    #[test]
    fn too_large() {
        let inst = generate_instance(&GeneratorParams { n_stations: 10, ..Default::default() }).unwrap();
        let err = brute_force_optimum(&inst, &Isc3Demands::default(), &Models::default()).unwrap_err();
        assert_eq!(err, RoutingError::TooLarge { n: 10, max: 9 });
    }

    #[test]
    fn no_feasible_plan() {
        let inst = generate_instance(&GeneratorParams { n_stations: 3, n_base_stations: 0, ..Default::default() })
            .unwrap();
        let err = brute_force_optimum(&inst, &Isc3Demands::default(), &Models::default()).unwrap_err();
        assert_eq!(err, RoutingError::NoFeasiblePlan);
    }
}
