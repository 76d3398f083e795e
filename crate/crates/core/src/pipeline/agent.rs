use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{PipelineError, SceneSummary};
use crate::edge::{EdgeClient, EdgeError, Method};
use crate::instance::Isc3Demands;
use crate::solvers::{AcoParams, Algorithm, GaParams, PsoParams, SaParams, SolverConfig};
use crate::constraints::PenaltyWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[default]
    ExpressDelivery,
}

/// What the decision agent hands to the solve step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    #[serde(default)]
    pub task: TaskKind,
    pub demands: Isc3Demands,
    pub solver: SolverConfig,
    #[serde(default)]
    pub offload: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_address: Option<String>,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), String> {
        self.demands.validate().map_err(|e| e.to_string())?;
        self.solver.validate().map_err(|e| e.to_string())?;
        if self.edge_address.as_deref().is_some_and(str::is_empty) {
            return Err("edge_address must not be empty".into());
        }
        Ok(())
    }
}

/// Optional solver settings from the run config. Unset fields fall back to
/// the agent's choice or the solver defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ga: Option<GaParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa: Option<SaParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aco: Option<AcoParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pso: Option<PsoParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_weights: Option<PenaltyWeights>,
}

impl SolverOverrides {
    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(a) = self.algorithm {
            cfg.algorithm = a;
        }
        if let Some(b) = self.eval_budget {
            cfg.eval_budget = b;
        }
        if self.time_limit_s.is_some() {
            cfg.time_limit_s = self.time_limit_s;
        }
        if let Some(p) = self.ga {
            cfg.ga = p;
        }
        if let Some(p) = self.sa {
            cfg.sa = p;
        }
        if let Some(p) = self.aco {
            cfg.aco = p;
        }
        if let Some(p) = self.pso {
            cfg.pso = p;
        }
        if let Some(w) = self.penalty_weights {
            cfg.penalty_weights = w;
        }
        cfg
    }
}

/// Run-level facts an agent may use besides demands and the scene.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentContext {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    #[serde(default)]
    pub solver: SolverOverrides,
}

/// Parameters of the `cognize` wire method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CognizeParams {
    pub demands: Isc3Demands,
    #[serde(default)]
    pub scene: Option<SceneSummary>,
    #[serde(default)]
    pub context: AgentContext,
}

/// Turns demands and a scene summary into a task. The summary is `None`
/// when the scene could not be previewed before ingestion.
pub trait DecisionAgent {
    fn name(&self) -> &str;

    fn plan(
        &self,
        demands: &Isc3Demands,
        scene: Option<&SceneSummary>,
        ctx: &AgentContext,
    ) -> Result<TaskSpec, PipelineError>;
}

/// Deterministic built-in policy: SA for small scenes, GA above
/// [`RuleBasedAgent::SA_MAX_STATIONS`]; offload when the scene is large or
/// an edge address is configured.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleBasedAgent;

impl RuleBasedAgent {
    pub const SA_MAX_STATIONS: usize = 12;
    pub const OFFLOAD_ABOVE: usize = 25;
}

impl DecisionAgent for RuleBasedAgent {
    fn name(&self) -> &str {
        "rule_based"
    }

    fn plan(
        &self,
        demands: &Isc3Demands,
        scene: Option<&SceneSummary>,
        ctx: &AgentContext,
    ) -> Result<TaskSpec, PipelineError> {
        let n = scene.map(|s| s.n_stations);
        let policy = match n {
            Some(n) if n > Self::SA_MAX_STATIONS => Algorithm::Ga,
            _ => Algorithm::Sa,
        };
        let base = SolverConfig::new(policy, ctx.seed, SolverConfig::DEFAULT_BUDGET);
        let task = TaskSpec {
            task: TaskKind::ExpressDelivery,
            demands: *demands,
            solver: ctx.solver.apply(base),
            offload: n.is_some_and(|n| n > Self::OFFLOAD_ABOVE) || ctx.edge.is_some(),
            edge_address: ctx.edge.clone(),
        };
        task.validate().map_err(PipelineError::Validation)?;
        Ok(task)
    }
}

/// Delegates cognition to a remote agent speaking the edge wire protocol.
#[derive(Debug, Clone)]
pub struct ExternalAgent {
    client: EdgeClient,
}

impl ExternalAgent {
    pub fn new(address: impl Into<String>) -> Self {
        ExternalAgent { client: EdgeClient::new(address) }
    }

    pub fn with_timeout(self, timeout: Duration) -> Self {
        ExternalAgent { client: self.client.with_timeout(timeout) }
    }
}

impl DecisionAgent for ExternalAgent {
    fn name(&self) -> &str {
        "external"
    }

    fn plan(
        &self,
        demands: &Isc3Demands,
        scene: Option<&SceneSummary>,
        ctx: &AgentContext,
    ) -> Result<TaskSpec, PipelineError> {
        let params = CognizeParams { demands: *demands, scene: scene.cloned(), context: ctx.clone() };
        let params = serde_json::to_value(params).expect("cognize params serialize");
        let raw = match self.client.call(Method::Cognize, params) {
            Ok(v) => v,
            Err(e @ EdgeError::Transport { .. }) => return Err(PipelineError::AgentUnavailable(e.to_string())),
            Err(e) => return Err(PipelineError::AgentInvalidResponse(e.to_string())),
        };
        let task: TaskSpec = serde_json::from_value(raw)
            .map_err(|e| PipelineError::AgentInvalidResponse(format!("not a task spec: {e}")))?;
        task.validate().map_err(PipelineError::AgentInvalidResponse)?;
        Ok(task)
    }
}

/// Step 2: asks `agent` for a task.
pub fn cognize(
    demands: &Isc3Demands,
    scene: Option<&SceneSummary>,
    agent: &dyn DecisionAgent,
    ctx: &AgentContext,
) -> Result<TaskSpec, PipelineError> {
    let task = agent.plan(demands, scene, ctx)?;
    log::info!(
        "agent {} chose {} (offload: {})",
        agent.name(),
        task.solver.algorithm,
        task.offload
    );
    Ok(task)
}
