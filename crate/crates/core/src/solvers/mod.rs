//! The four seeded, evaluation-budgeted metaheuristics. All of them search
//! giant-tour permutations; trips come from the optimal split.

mod aco;
mod ga;
mod pso;
mod sa;

pub use aco::AcoParams;
pub use ga::GaParams;
pub use pso::PsoParams;
pub use sa::SaParams;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{Models, PenaltyWeights};
use crate::instance::{DeliveryInstance, Isc3Demands};
use crate::routing::{Evaluator, Objective, RoutePlan, RoutingError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Aco,
    HybridPso,
    Sa,
    Ga,
}

impl Algorithm {
    /// In the order the case study reports them.
    pub const ALL: [Algorithm; 4] = [Algorithm::Aco, Algorithm::HybridPso, Algorithm::Sa, Algorithm::Ga];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Aco => "aco",
            Algorithm::HybridPso => "hybrid_pso",
            Algorithm::Sa => "sa",
            Algorithm::Ga => "ga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected aco, hybrid_pso, sa or ga)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub eval_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub ga: GaParams,
    #[serde(default)]
    pub sa: SaParams,
    #[serde(default)]
    pub aco: AcoParams,
    #[serde(default)]
    pub pso: PsoParams,
    #[serde(default)]
    pub penalty_weights: PenaltyWeights,
}

fn default_budget() -> u64 {
    SolverConfig::DEFAULT_BUDGET
}

impl SolverConfig {
    pub const DEFAULT_BUDGET: u64 = 20_000;

    pub fn new(algorithm: Algorithm, seed: u64, eval_budget: u64) -> Self {
        SolverConfig {
            algorithm,
            seed,
            eval_budget,
            time_limit_s: None,
            ga: GaParams::default(),
            sa: SaParams::default(),
            aco: AcoParams::default(),
            pso: PsoParams::default(),
            penalty_weights: PenaltyWeights::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.eval_budget < 1 {
            return Err(SolverError::InvalidConfig("eval_budget must be >= 1".into()));
        }
        if let Some(t) = self.time_limit_s {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SolverError::InvalidConfig("time_limit_s must be > 0".into()));
            }
        }
        self.penalty_weights
            .validate()
            .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
        self.ga.validate()?;
        self.sa.validate()?;
        self.aco.validate()?;
        self.pso.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: u64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub best_plan: RoutePlan,
    pub best_objective: Objective,
    pub evaluations_used: u64,
    pub wall_time_s: f64,
    /// Best scalar objective seen so far, recorded at every improvement.
    pub convergence_trace: Vec<TracePoint>,
    pub config: SolverConfig,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    /// The budget ran out before any penalty-free plan was found; `result`
    /// carries the least-penalized plan.
    #[error("no feasible plan found within {} evaluations (best penalty {})", .result.evaluations_used, .result.best_objective.penalty)]
    NoFeasibleFound { result: Box<SolverResult> },
}

/// Budgeted access to the evaluator, tracking the incumbent and the
/// convergence trace. Every stochastic draw of a run goes through `rng`.
pub(crate) struct Search<'e, 'i> {
    pub ev: &'e Evaluator<'i>,
    pub rng: ChaCha8Rng,
    used: u64,
    budget: u64,
    deadline: Option<Instant>,
    best: Option<(Vec<usize>, Objective)>,
    best_scalar: f64,
    trace: Vec<TracePoint>,
}

impl<'e, 'i> Search<'e, 'i> {
    fn new(ev: &'e Evaluator<'i>, cfg: &SolverConfig, started: Instant) -> Self {
        Search {
            ev,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            used: 0,
            budget: cfg.eval_budget,
            deadline: cfg.time_limit_s.map(|t| started + Duration::from_secs_f64(t)),
            best: None,
            best_scalar: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.ev.n_stations()
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Evaluates `tour`, or returns `None` once the budget is spent.
    pub fn eval(&mut self, tour: &[usize]) -> Option<Objective> {
        if self.exhausted() {
            return None;
        }
        let obj = self.ev.objective(tour);
        self.used += 1;
        if obj.value < self.best_scalar {
            self.best_scalar = obj.value;
            self.trace.push(TracePoint { evaluation: self.used, best: obj.value });
        }
        if self.best.as_ref().is_none_or(|(_, b)| obj.better_than(b)) {
            self.best = Some((tour.to_vec(), obj));
        }
        Some(obj)
    }

    pub fn random_tour(&mut self) -> Vec<usize> {
        let mut t: Vec<usize> = (0..self.n()).collect();
        t.shuffle(&mut self.rng);
        t
    }

    /// Two distinct positions in `0..n` (requires `n >= 2`).
    pub fn two_positions(&mut self) -> (usize, usize) {
        let n = self.n();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        (i, j)
    }
}

/// Runs the configured metaheuristic. Deterministic for fixed inputs and
/// seed unless a time limit cuts the run short.
pub fn solve(
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
    cfg: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    cfg.validate()?;
    demands
        .validate()
        .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
    let started = Instant::now();
    let ev = Evaluator::new(instance, demands, models, &cfg.penalty_weights)?;
    let mut search = Search::new(&ev, cfg, started);

    if search.n() < 2 {
        let tour = search.random_tour();
        search.eval(&tour);
    } else {
        match cfg.algorithm {
            Algorithm::Ga => ga::run(&mut search, &cfg.ga),
            Algorithm::Sa => sa::run(&mut search, &cfg.sa),
            Algorithm::Aco => aco::run(&mut search, &cfg.aco),
            Algorithm::HybridPso => pso::run(&mut search, &cfg.pso),
        }
    }

    let (tour, objective) = search.best.take().expect("at least one evaluation always runs");
    let result = SolverResult {
        algorithm: cfg.algorithm,
        seed: cfg.seed,
        best_plan: ev.plan(&tour),
        best_objective: objective,
        evaluations_used: search.used,
        wall_time_s: started.elapsed().as_secs_f64(),
        convergence_trace: search.trace,
        config: cfg.clone(),
    };
    log::debug!(
        "{} seed {}: {:.3} km after {} evaluations",
        cfg.algorithm,
        cfg.seed,
        objective.value,
        result.evaluations_used
    );
    if objective.feasible {
        Ok(result)
    } else {
        Err(SolverError::NoFeasibleFound { result: Box::new(result) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub total_length_km: Option<f64>,
    pub feasible: bool,
    pub evaluations: u64,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<SolverResult>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Solves once per config, in the given order. A failing row records its
/// error without aborting the others.
pub fn compare(
    instance: &DeliveryInstance,
    demands: &Isc3Demands,
    models: &Models,
    configs: &[SolverConfig],
) -> Result<ComparisonTable, SolverError> {
    if configs.is_empty() {
        return Err(SolverError::InvalidConfig("compare needs at least one config".into()));
    }
    let rows = configs
        .iter()
        .map(|cfg| match solve(instance, demands, models, cfg) {
            Ok(r) => ComparisonRow {
                algorithm: cfg.algorithm,
                seed: cfg.seed,
                total_length_km: Some(r.best_objective.total_length_km),
                feasible: true,
                evaluations: r.evaluations_used,
                wall_time_s: r.wall_time_s,
                error: None,
                result: Some(r),
            },
            Err(SolverError::NoFeasibleFound { result }) => ComparisonRow {
                algorithm: cfg.algorithm,
                seed: cfg.seed,
                total_length_km: Some(result.best_objective.total_length_km),
                feasible: false,
                evaluations: result.evaluations_used,
                wall_time_s: result.wall_time_s,
                error: Some(format!("no feasible plan found (penalty {})", result.best_objective.penalty)),
                result: Some(*result),
            },
            Err(e) => ComparisonRow {
                algorithm: cfg.algorithm,
                seed: cfg.seed,
                total_length_km: None,
                feasible: false,
                evaluations: 0,
                wall_time_s: 0.0,
                error: Some(e.to_string()),
                result: None,
            },
        })
        .collect();
    Ok(ComparisonTable { rows })
}

/// One default config per algorithm, all sharing `seed` and `budget`.
pub fn default_configs(seed: u64, budget: u64) -> Vec<SolverConfig> {
    Algorithm::ALL.iter().map(|&a| SolverConfig::new(a, seed, budget)).collect()
}
