use crate::constraints::{
    leg_min_rate, Assessment, Assessor, FeasibilityReport, Models, PenaltyWeights,
};
use crate::instance::{distance_matrix, DeliveryInstance, DistanceMatrix, GeoPoint, Isc3Demands};

use super::split::{build_plan, node_demands, SplitContext};
use super::{is_permutation, GiantTour, Objective, RoutePlan, RoutingError};

/// Objective evaluation over a fixed instance. Precomputes the distance
/// matrix and the minimum sampled data rate of every directed leg, so each
/// evaluation costs one split plus a linear pass over the trips.
pub struct Evaluator<'a> {
    instance: &'a DeliveryInstance,
    demands: Isc3Demands,
    models: Models,
    weights: PenaltyWeights,
    matrix: DistanceMatrix,
    node_demand: Vec<u32>,
    leg_rate: Vec<(f64, GeoPoint)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        instance: &'a DeliveryInstance,
        demands: &Isc3Demands,
        models: &Models,
        weights: &PenaltyWeights,
    ) -> Result<Self, RoutingError> {
        models.validate()?;
        weights.validate()?;
        let matrix = distance_matrix(instance);
        let node_demand = node_demands(instance);
        SplitContext::new(&matrix, &node_demand, demands, &models.energy).check_servable(instance)?;

        let size = matrix.size();
        let mut leg_rate = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                leg_rate.push(leg_min_rate(
                    instance.node(a),
                    instance.node(b),
                    &instance.base_stations,
                    &models.link,
                ));
            }
        }
        Ok(Evaluator {
            instance,
            demands: *demands,
            models: *models,
            weights: *weights,
            matrix,
            node_demand,
            leg_rate,
        })
    }

    pub fn instance(&self) -> &'a DeliveryInstance {
        self.instance
    }

    pub fn n_stations(&self) -> usize {
        self.instance.n_stations()
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    pub fn demands(&self) -> &Isc3Demands {
        &self.demands
    }

    pub fn models(&self) -> &Models {
        &self.models
    }

    fn split_ctx(&self) -> SplitContext<'_> {
        SplitContext::new(&self.matrix, &self.node_demand, &self.demands, &self.models.energy)
    }

    fn split_and_assess(&self, tour: &[usize]) -> (Vec<(usize, usize)>, f64, Assessment) {
        let (bounds, total) = self
            .split_ctx()
            .split(tour)
            .expect("every station is individually servable");
        let nodes: Vec<usize> = tour.iter().map(|&s| s + 1).collect();
        let assessor = Assessor { instance: self.instance, demands: &self.demands, models: &self.models };
        let size = self.matrix.size();
        let dist = |a: usize, b: usize| self.matrix.get(a, b);
        let mut leg = |a: usize, b: usize| self.leg_rate[a * size + b];
        let assessment = assessor.assess(bounds.iter().map(|&(i, j)| &nodes[i..j]), &dist, &mut leg);
        (bounds, total, assessment)
    }

    /// Objective of a tour given as 0-based station indices. The tour must be
    /// a permutation; use [`Evaluator::evaluate`] for checked input.
    pub fn objective(&self, tour: &[usize]) -> Objective {
        let (_, total, assessment) = self.split_and_assess(tour);
        let penalty = assessment.penalty(&self.weights);
        Objective {
            total_length_km: total,
            penalty,
            value: total + penalty,
            feasible: assessment.passed(),
        }
    }

    pub fn evaluate(&self, tour: &GiantTour) -> Result<Objective, RoutingError> {
        self.check(tour)?;
        Ok(self.objective(tour.as_slice()))
    }

    pub fn plan(&self, tour: &[usize]) -> RoutePlan {
        let (bounds, _, _) = self.split_and_assess(tour);
        build_plan(self.instance, &self.matrix, &self.models.energy, tour, &bounds)
    }

    pub fn report(&self, tour: &[usize]) -> FeasibilityReport {
        let (_, _, assessment) = self.split_and_assess(tour);
        assessment.into_report(self.instance)
    }

    fn check(&self, tour: &GiantTour) -> Result<(), RoutingError> {
        let n = self.n_stations();
        if is_permutation(tour.as_slice(), n) {
            Ok(())
        } else {
            Err(RoutingError::NotAPermutation(format!("expected a permutation of 0..{n}, got {:?}", tour.0)))
        }
    }
}

/// Splits `tour`, checks the resulting plan and returns length plus penalty
/// under default penalty weights.
pub fn evaluate(
    tour: &GiantTour,
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
) -> Result<Objective, RoutingError> {
    Evaluator::new(instance, demands, models, &PenaltyWeights::default())?.evaluate(tour)
}
