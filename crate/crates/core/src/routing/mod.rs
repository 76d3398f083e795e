//! Giant-tour representation, optimal split into depot-anchored trips,
//! objective evaluation, neighborhood moves and the exhaustive oracle.

mod brute;
mod eval;
mod moves;
mod split;

pub use brute::{brute_force_optimum, BRUTE_FORCE_MAX_STATIONS};
pub use eval::{evaluate, Evaluator};
pub use moves::{apply_move, Move};
pub use split::split_giant_tour;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::ConstraintError;

#[derive(Debug, Error, PartialEq)]
pub enum RoutingError {
    #[error("move index out of range: {0}")]
    Index(String),
    #[error("tour is not a permutation of the instance stations: {0}")]
    NotAPermutation(String),
    #[error("station `{station}` cannot be served by any single trip: {reason}")]
    InstanceInfeasible { station: String, reason: String },
    #[error("brute force is limited to {max} stations (instance has {n})")]
    TooLarge { n: usize, max: usize },
    #[error("no feasible plan exists for this instance")]
    NoFeasiblePlan,
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// Visiting order over all stations, as 0-based indices into
/// `DeliveryInstance::stations`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GiantTour(pub Vec<usize>);

impl GiantTour {
    pub fn identity(n: usize) -> Self {
        GiantTour((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_permutation_of(&self, n: usize) -> bool {
        is_permutation(&self.0, n)
    }
}

pub(crate) fn is_permutation(tour: &[usize], n: usize) -> bool {
    if tour.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    tour.iter().all(|&s| s < n && !std::mem::replace(&mut seen[s], true))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    /// Station ids in visiting order.
    pub stations: Vec<String>,
    /// depot -> stations -> depot, km
    pub length_km: f64,
    pub load: u32,
    pub energy_wh: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoutePlan {
    pub trips: Vec<Trip>,
    pub total_length_km: f64,
}

impl RoutePlan {
    pub fn n_stations(&self) -> usize {
        self.trips.iter().map(|t| t.stations.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub total_length_km: f64,
    pub penalty: f64,
    /// `total_length_km + penalty`
    pub value: f64,
    pub feasible: bool,
}

impl Objective {
    /// Ordering used to pick incumbents: feasible before infeasible, then by
    /// scalar value.
    pub fn better_than(&self, other: &Objective) -> bool {
        match (self.feasible, other.feasible) {
            (true, false) => true,
            (false, true) => false,
            _ => self.value < other.value,
        }
    }
}
