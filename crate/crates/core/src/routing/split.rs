use std::cmp::Ordering;

use crate::constraints::{trip_energy, EnergyParams};
use crate::instance::{distance_matrix, DeliveryInstance, DistanceMatrix, Isc3Demands};

use super::{GiantTour, RoutePlan, RoutingError, Trip};

/// Per-trip limits and the data the split needs, all indexed by matrix node.
pub(crate) struct SplitContext<'a> {
    pub matrix: &'a DistanceMatrix,
    /// Demand of matrix node `k` (index 0 unused).
    pub demand: &'a [u32],
    pub capacity: u32,
    pub max_distance: f64,
    pub energy_budget: f64,
    pub energy: EnergyParams,
}

impl<'a> SplitContext<'a> {
    pub fn new(
        matrix: &'a DistanceMatrix,
        demand: &'a [u32],
        demands: &Isc3Demands,
        energy: &EnergyParams,
    ) -> Self {
        SplitContext {
            matrix,
            demand,
            capacity: demands.capacity,
            max_distance: demands.max_trip_distance,
            energy_budget: demands.energy_budget_per_trip,
            energy: *energy,
        }
    }

    /// Fails on the first station (declaration order) that no single trip
    /// can serve.
    pub fn check_servable(&self, instance: &DeliveryInstance) -> Result<(), RoutingError> {
        for (i, s) in instance.stations.iter().enumerate() {
            let node = i + 1;
            let round_trip = self.matrix.get(0, node) + self.matrix.get(node, 0);
            let reason = if s.demand > self.capacity {
                Some(format!("demand {} exceeds capacity {}", s.demand, self.capacity))
            } else if round_trip > self.max_distance {
                Some(format!("round trip {round_trip:.3} km exceeds {} km", self.max_distance))
            } else if trip_energy(round_trip, 1, &self.energy) > self.energy_budget {
                Some(format!("round trip needs more than {} Wh", self.energy_budget))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(RoutingError::InstanceInfeasible { station: s.id.clone(), reason });
            }
        }
        Ok(())
    }

    /// Optimal cut of `tour` (0-based station indices) into contiguous trips.
    /// Returns `[start, end)` ranges into `tour` and the total length.
    ///
    /// Minimizes total length; ties go to fewer trips, then to the
    /// lexicographically earliest sequence of cut positions. Costs are
    /// accumulated trip by trip from the left so the returned total is
    /// bit-identical to summing the chosen trips in order.
    pub fn split(&self, tour: &[usize]) -> Option<(Vec<(usize, usize)>, f64)> {
        let n = tour.len();
        let mut cost = vec![f64::INFINITY; n + 1];
        let mut trips = vec![usize::MAX; n + 1];
        let mut pred = vec![usize::MAX; n + 1];
        cost[0] = 0.0;
        trips[0] = 0;
        let m = self.matrix;

        for i in 0..n {
            if cost[i].is_infinite() {
                continue;
            }
            let mut load = 0u32;
            let mut open = 0.0;
            let mut prev = 0;
            for j in i..n {
                let node = tour[j] + 1;
                load = load.saturating_add(self.demand[node]);
                if load > self.capacity {
                    break;
                }
                open += m.get(prev, node);
                prev = node;
                let count = j - i + 1;
                // Open-path length and energy only grow as the segment extends.
                if open > self.max_distance || trip_energy(open, count, &self.energy) > self.energy_budget {
                    break;
                }
                let closed = open + m.get(node, 0);
                if closed > self.max_distance || trip_energy(closed, count, &self.energy) > self.energy_budget {
                    continue;
                }
                let cand = cost[i] + closed;
                let cand_trips = trips[i] + 1;
                let better = match cand.total_cmp(&cost[j + 1]) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match cand_trips.cmp(&trips[j + 1]) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => cut_sequence(&pred, i) < cut_sequence(&pred, pred[j + 1]),
                    },
                };
                if better {
                    cost[j + 1] = cand;
                    trips[j + 1] = cand_trips;
                    pred[j + 1] = i;
                }
            }
        }
        if cost[n].is_infinite() {
            return None;
        }
        let mut bounds = Vec::with_capacity(trips[n]);
        let mut j = n;
        while j > 0 {
            let i = pred[j];
            bounds.push((i, j));
            j = i;
        }
        bounds.reverse();
        Some((bounds, cost[n]))
    }
}

/// Demand per matrix node, with 0 for the depot.
pub(crate) fn node_demands(instance: &DeliveryInstance) -> Vec<u32> {
    std::iter::once(0).chain(instance.stations.iter().map(|s| s.demand)).collect()
}

/// Cut positions on the best path to node `end`, including `end` itself.
fn cut_sequence(pred: &[usize], end: usize) -> Vec<usize> {
    let mut cuts = Vec::new();
    if end > 0 {
        cuts.push(end);
    }
    let mut j = end;
    while j > 0 {
        j = pred[j];
        if j > 0 {
            cuts.push(j);
        }
    }
    cuts.reverse();
    cuts
}

/// Builds trip records for the given bounds over `tour`.
pub(crate) fn build_plan(
    instance: &DeliveryInstance,
    matrix: &DistanceMatrix,
    energy: &EnergyParams,
    tour: &[usize],
    bounds: &[(usize, usize)],
) -> RoutePlan {
    let mut total = 0.0;
    let trips = bounds
        .iter()
        .map(|&(i, j)| {
            let seg = &tour[i..j];
            let mut length = 0.0;
            let mut prev = 0;
            for &s in seg {
                length += matrix.get(prev, s + 1);
                prev = s + 1;
            }
            length += matrix.get(prev, 0);
            total += length;
            Trip {
                stations: seg.iter().map(|&s| instance.stations[s].id.clone()).collect(),
                length_km: length,
                load: seg.iter().map(|&s| instance.stations[s].demand).sum(),
                energy_wh: trip_energy(length, seg.len(), energy),
            }
        })
        .collect();
    RoutePlan { trips, total_length_km: total }
}

/// Optimal partition of `tour` into contiguous trips that respect capacity,
/// trip distance and the per-trip energy budget.
pub fn split_giant_tour(
    tour: &GiantTour,
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    energy: &EnergyParams,
) -> Result<RoutePlan, RoutingError> {
    let n = instance.n_stations();
    if !tour.is_permutation_of(n) {
        return Err(RoutingError::NotAPermutation(format!(
            "expected a permutation of 0..{n}, got {:?}",
            tour.0
        )));
    }
    let matrix = distance_matrix(instance);
    let demand = node_demands(instance);
    let ctx = SplitContext::new(&matrix, &demand, demands, energy);
    ctx.check_servable(instance)?;
    let (bounds, _) = ctx
        .split(tour.as_slice())
        .expect("singleton trips are always feasible once every station is servable");
    Ok(build_plan(instance, &matrix, energy, tour.as_slice(), &bounds))
}
