mod common;

use proptest::prelude::*;

use skyroute_core::instance::{generate_instance, DeliveryInstance, GeneratorParams, Isc3Demands};
use skyroute_core::routing::{brute_force_optimum, evaluate, split_giant_tour, GiantTour, RoutingError};
use skyroute_core::{EnergyParams, Models};

fn instance(seed: u64, n: usize, side: f64) -> DeliveryInstance {
    generate_instance(&GeneratorParams { seed, n_stations: n, area_side_km: side, n_base_stations: 4, demand_range: (1, 9) })
        .unwrap()
}

fn tour_strategy() -> impl Strategy<Value = (u64, f64, Vec<usize>)> {
    (any::<u64>(), prop_oneof![Just(30.0), Just(48.0)], 2usize..=8)
        .prop_flat_map(|(seed, side, n)| (Just(seed), Just(side), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_matches_exhaustive_partition((seed, side, tour) in tour_strategy()) {
        let inst = instance(seed, tour.len(), side);
        let demands = Isc3Demands::default();
        let energy = EnergyParams::default();
        let oracle = common::exhaustive_split_minimum(&inst, &tour, &demands, &energy);
        match split_giant_tour(&GiantTour(tour.clone()), &inst, &demands, &energy) {
            Ok(plan) => {
                prop_assert_eq!(Some(plan.total_length_km), oracle);
                for t in &plan.trips {
                    prop_assert!(t.load <= demands.capacity);
                    prop_assert!(t.length_km <= demands.max_trip_distance);
                    prop_assert!(t.energy_wh <= demands.energy_budget_per_trip);
                }
                let visited: Vec<String> = plan.trips.iter().flat_map(|t| t.stations.clone()).collect();
                let expected: Vec<String> = tour.iter().map(|&s| inst.stations[s].id.clone()).collect();
                prop_assert_eq!(visited, expected);
            }
            Err(RoutingError::InstanceInfeasible { .. }) => prop_assert_eq!(oracle, None),
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn split_never_worse_than_one_trip_per_station((seed, side, tour) in tour_strategy()) {
        let inst = instance(seed, tour.len(), side);
        if let Ok(plan) = split_giant_tour(&GiantTour(tour.clone()), &inst, &Isc3Demands::default(), &EnergyParams::default()) {
            let singles: f64 = tour.iter().map(|&s| common::closed_length(&inst, &[s])).sum();
            prop_assert!(plan.total_length_km <= singles + 1e-9);
        }
    }
}

/// Relabeling stations (reordering their declaration) must not change the
/// optimum.
#[test]
fn optimum_invariant_under_relabeling() {
    let demands = Isc3Demands::default();
    let models = Models::default();
    for seed in 1..=4 {
        let inst = generate_instance(&GeneratorParams { seed, n_stations: 6, ..Default::default() }).unwrap();
        let opt = brute_force_optimum(&inst, &demands, &models).unwrap();
        let mut shuffled = inst.clone();
        shuffled.stations.reverse();
        shuffled.stations.rotate_left(2);
        let opt2 = brute_force_optimum(&shuffled, &demands, &models).unwrap();
        assert!((opt.total_length_km - opt2.total_length_km).abs() <= 1e-9 * opt.total_length_km);
    }
}

/// The brute-force optimum is a lower bound on every tour's objective.
#[test]
fn brute_force_is_a_lower_bound() {
    let inst = generate_instance(&GeneratorParams { seed: 9, n_stations: 6, ..Default::default() }).unwrap();
    let demands = Isc3Demands::default();
    let models = Models::default();
    let opt = brute_force_optimum(&inst, &demands, &models).unwrap().total_length_km;
    let mut tour: Vec<usize> = (0..6).collect();
    let mut count = 0;
    loop {
        let obj = evaluate(&GiantTour(tour.clone()), &inst, &demands, &models).unwrap();
        if obj.feasible {
            assert!(obj.value >= opt);
        }
        count += 1;
        // next lexicographic permutation
        let Some(i) = (0..tour.len() - 1).rev().find(|&i| tour[i] < tour[i + 1]) else { break };
        let j = (i + 1..tour.len()).rev().find(|&j| tour[j] > tour[i]).unwrap();
        tour.swap(i, j);
        tour[i + 1..].reverse();
    }
    assert_eq!(count, 720);
}
