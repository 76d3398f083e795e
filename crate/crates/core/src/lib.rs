//! UAV express-delivery routing under communication, sensing and energy
//! constraints.
//!
//! A [`DeliveryInstance`] is solved by searching giant tours (permutations
//! of all stations) with one of four metaheuristics; every tour is cut into
//! depot-anchored trips by an optimal split that respects payload capacity,
//! trip distance and the per-trip energy budget. Plans are then checked
//! against the data-rate and sensing demands by trajectory sampling.

pub mod constraints;
pub mod edge;
pub mod instance;
pub mod pipeline;
pub mod routing;
pub mod solvers;

pub use constraints::{
    achievable_rate, check_route_feasibility, fspl_db, penalty, sensing_accuracy, trip_energy,
    ConstraintError, ConstraintKind, EnergyParams, FeasibilityReport, LinkParams, Models,
    PenaltyWeights, SensingParams,
};
pub use instance::{
    distance, distance_matrix, generate_instance, load_instance, save_instance, DeliveryInstance,
    DistanceMatrix, Frame, GeneratorParams, GeoPoint, InstanceError, Isc3Demands,
};
pub use routing::{
    apply_move, brute_force_optimum, evaluate, split_giant_tour, Evaluator, GiantTour, Move,
    Objective, RoutePlan, RoutingError, Trip,
};
pub use edge::{solve_remote, EdgeClient, EdgeError};
pub use pipeline::{run_pipeline, PipelineError, PipelineReport, RunConfig, TelemetryLog};
pub use solvers::{compare, solve, Algorithm, ComparisonTable, SolverConfig, SolverError, SolverResult};
