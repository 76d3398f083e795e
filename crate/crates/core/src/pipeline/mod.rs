//! The five-step delivery flow: demand generation, task cognition, scene
//! ingestion, decision (local or edge solve) and simulated execution.

mod agent;
mod execute;

pub use agent::{
    cognize, AgentContext, CognizeParams, DecisionAgent, ExternalAgent, RuleBasedAgent, SolverOverrides, TaskKind,
    TaskSpec,
};
pub use execute::{execute, EventKind, ExecuteParams, TelemetryEvent, TelemetryLog};

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{check_route_feasibility, ConstraintError, FeasibilityReport, Models};
use crate::edge::{EdgeClient, EdgeError};
use crate::instance::{load_instance, DeliveryInstance, Frame, InstanceError, Isc3Demands};
use crate::solvers::{solve, SolverError, SolverResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error in {source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("decision agent unavailable: {0}")]
    AgentUnavailable(String),
    #[error("decision agent returned an invalid task: {0}")]
    AgentInvalidResponse(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("plan rejected before execution: {0}")]
    InfeasiblePlanRejected(String),
}

impl PipelineError {
    /// Stable short name for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            PipelineError::Parse { .. } | PipelineError::Instance(InstanceError::Parse { .. }) => "parse",
            PipelineError::Schema { .. } | PipelineError::Instance(InstanceError::Schema { .. }) => "schema",
            PipelineError::Validation(_) | PipelineError::Instance(_) | PipelineError::Constraint(_) => "validation",
            PipelineError::AgentUnavailable(_) => "agent_unavailable",
            PipelineError::AgentInvalidResponse(_) => "agent_invalid_response",
            PipelineError::Solver(SolverError::NoFeasibleFound { .. }) => "no_feasible_found",
            PipelineError::Solver(SolverError::Routing(crate::routing::RoutingError::InstanceInfeasible { .. })) => {
                "instance_infeasible"
            }
            PipelineError::Solver(_) => "solver",
            PipelineError::Edge(_) => "edge",
            PipelineError::InfeasiblePlanRejected(_) => "infeasible_plan_rejected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentSpec {
    #[default]
    RuleBased,
    External { address: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSource {
    /// Instance file; relative paths resolve against the run config's
    /// directory.
    pub instance: PathBuf,
}

fn default_true() -> bool {
    true
}

fn default_cruise() -> f64 {
    ExecuteParams::default().cruise_speed_mps
}

fn default_dwell() -> f64 {
    ExecuteParams::default().dwell_s
}

fn default_turnaround() -> f64 {
    ExecuteParams::default().turnaround_s
}

/// A pipeline run config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub demands: Isc3Demands,
    pub scene: SceneSource,
    #[serde(default)]
    pub agent: AgentSpec,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<String>,
    /// Solve locally when the edge server cannot be reached.
    #[serde(default = "default_true")]
    pub fallback_to_local: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cruise")]
    pub cruise_speed_mps: f64,
    #[serde(default = "default_dwell")]
    pub dwell_s: f64,
    #[serde(default = "default_turnaround")]
    pub turnaround_s: f64,
    #[serde(default)]
    pub models: Models,
}

impl RunConfig {
    pub fn new(instance: impl Into<PathBuf>) -> Self {
        RunConfig {
            demands: Isc3Demands::default(),
            scene: SceneSource { instance: instance.into() },
            agent: AgentSpec::RuleBased,
            solver: SolverOverrides::default(),
            edge: None,
            fallback_to_local: true,
            seed: 0,
            cruise_speed_mps: default_cruise(),
            dwell_s: default_dwell(),
            turnaround_s: default_turnaround(),
            models: Models::default(),
        }
    }

    pub fn parse(text: &str, source_name: &str) -> Result<RunConfig, PipelineError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_syntax() || inner.is_eof() || inner.is_io() {
                PipelineError::Parse { source_name: source_name.to_string(), message: inner.to_string() }
            } else {
                PipelineError::Schema { field, message: inner.to_string() }
            }
        })?;
        de.end()
            .map_err(|e| PipelineError::Parse { source_name: source_name.to_string(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, validates and resolves the scene path against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Parse {
            source_name: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = RunConfig::parse(&text, &path.display().to_string())?;
        if cfg.scene.instance.is_relative() {
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.scene.instance = base.join(&cfg.scene.instance);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.demands.validate()?;
        self.models.validate()?;
        self.execute_params().validate().map_err(PipelineError::Validation)?;
        if let AgentSpec::External { address } = &self.agent {
            if address.is_empty() {
                return Err(PipelineError::Validation("agent.address must not be empty".into()));
            }
        }
        if self.edge.as_deref().is_some_and(str::is_empty) {
            return Err(PipelineError::Validation("edge must not be empty".into()));
        }
        Ok(())
    }

    pub fn execute_params(&self) -> ExecuteParams {
        ExecuteParams { cruise_speed_mps: self.cruise_speed_mps, dwell_s: self.dwell_s, turnaround_s: self.turnaround_s }
    }

    pub fn agent_context(&self) -> AgentContext {
        AgentContext { seed: self.seed, edge: self.edge.clone(), solver: self.solver.clone() }
    }

    pub fn build_agent(&self) -> Box<dyn DecisionAgent> {
        match &self.agent {
            AgentSpec::RuleBased => Box::new(RuleBasedAgent),
            AgentSpec::External { address } => Box::new(ExternalAgent::new(address.clone())),
        }
    }
}

/// Step 1: the demands block of a run config, with absent fields at their
/// defaults.
pub fn generate_demands(config_path: impl AsRef<Path>) -> Result<Isc3Demands, PipelineError> {
    RunConfig::load(config_path).map(|c| c.demands)
}

/// What the agent sees of a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSummary {
    pub source: String,
    pub n_stations: usize,
    pub total_demand: u64,
    pub n_base_stations: usize,
    pub n_no_fly_zones: usize,
    pub frame: Frame,
    pub visibility: f64,
    pub wind_speed_mps: f64,
}

impl SceneSummary {
    pub fn of(instance: &DeliveryInstance, source: impl Into<String>) -> Self {
        SceneSummary {
            source: source.into(),
            n_stations: instance.n_stations(),
            total_demand: instance.total_demand(),
            n_base_stations: instance.base_stations.len(),
            n_no_fly_zones: instance.no_fly_zones.len(),
            frame: instance.frame(),
            visibility: instance.weather.visibility,
            wind_speed_mps: instance.weather.wind_speed,
        }
    }

    /// Best-effort preview ahead of ingestion; `None` if the file cannot be
    /// read as an instance.
    pub fn peek(path: &Path) -> Option<Self> {
        load_instance(path).ok().map(|i| SceneSummary::of(&i, path.display().to_string()))
    }
}

/// Step 3 output.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePackage {
    pub instance: DeliveryInstance,
    pub instance_path: PathBuf,
    pub ingested_at_unix_s: f64,
}

impl ScenePackage {
    pub fn ingest(path: impl AsRef<Path>) -> Result<ScenePackage, PipelineError> {
        let path = path.as_ref();
        let instance = load_instance(path)?;
        Ok(ScenePackage { instance, instance_path: path.to_path_buf(), ingested_at_unix_s: unix_now() })
    }

    pub fn summary(&self) -> SceneSummary {
        SceneSummary::of(&self.instance, self.instance_path.display().to_string())
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Step 4 output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub result: SolverResult,
    /// True when the result came from the edge server.
    pub offloaded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

/// Step 4: solves locally, or on the edge server when the task asks for
/// offloading. With `allow_fallback`, an unreachable edge server leads to
/// a local solve and a fallback notice.
pub fn decide(
    task: &TaskSpec,
    scene: &ScenePackage,
    models: &Models,
    allow_fallback: bool,
) -> Result<Decision, PipelineError> {
    let local = |fallback: Option<String>| -> Result<Decision, PipelineError> {
        let result = solve(&scene.instance, &task.demands, models, &task.solver)?;
        Ok(Decision { result, offloaded: false, fallback })
    };
    if !task.offload {
        return local(None);
    }
    let Some(address) = &task.edge_address else {
        return local(Some("offload requested but no edge address configured; solved locally".into()));
    };
    match EdgeClient::new(address.clone()).solve_remote(&scene.instance, &task.demands, models, &task.solver) {
        Ok(result) => Ok(Decision { result, offloaded: true, fallback: None }),
        Err(e @ EdgeError::Transport { .. }) if allow_fallback => {
            log::warn!("{e}; solving locally");
            local(Some(format!("{e}; solved locally")))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Demands,
    Cognition,
    Ingestion,
    Decision,
    Execution,
}

impl Step {
    pub const ALL: [Step; 5] = [Step::Demands, Step::Cognition, Step::Ingestion, Step::Decision, Step::Execution];

    pub fn as_str(self) -> &'static str {
        match self {
            Step::Demands => "demands",
            Step::Cognition => "cognition",
            Step::Ingestion => "ingestion",
            Step::Decision => "decision",
            Step::Execution => "execution",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const STEP_NAMES: [&str; 5] = ["demands", "cognition", "ingestion", "decision", "execution"];

/// Keys whose values vary between otherwise identical runs.
pub const VOLATILE_KEYS: [&str; 3] = ["elapsed_s", "started_at_unix_s", "wall_time_s"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: Step,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub step: Step,
    pub kind: String,
    pub message: String,
}

/// Everything a run produced, truncated at the first failing step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: String,
    pub started_at_unix_s: f64,
    /// Completed steps, always a prefix of [`Step::ALL`].
    pub steps: Vec<StepRecord>,
    pub demands: Option<Isc3Demands>,
    pub scene: Option<SceneSummary>,
    pub task: Option<TaskSpec>,
    pub decision: Option<Decision>,
    pub feasibility: Option<FeasibilityReport>,
    pub telemetry: Option<TelemetryLog>,
    pub error: Option<StepFailure>,
}

impl PipelineReport {
    pub fn completed(&self) -> bool {
        self.error.is_none() && self.steps.len() == Step::ALL.len()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Command-line adjustments applied on top of the run config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub edge: Option<String>,
    pub seed: Option<u64>,
}

/// Runs steps 1 to 5 from the config at `config_path`.
pub fn run_pipeline(config_path: impl AsRef<Path>) -> PipelineReport {
    run_pipeline_with(config_path, &RunOverrides::default())
}

pub fn run_pipeline_with(config_path: impl AsRef<Path>, overrides: &RunOverrides) -> PipelineReport {
    let path = config_path.as_ref();
    let mut report = PipelineReport {
        config: path.display().to_string(),
        started_at_unix_s: unix_now(),
        steps: Vec::new(),
        demands: None,
        scene: None,
        task: None,
        decision: None,
        feasibility: None,
        telemetry: None,
        error: None,
    };
    if let Err((step, e)) = run_steps(path, overrides, &mut report) {
        log::error!("pipeline stopped at {step}: {e}");
        report.error = Some(StepFailure { step, kind: e.kind().to_string(), message: e.to_string() });
    }
    report
}

fn timed<T>(
    report: &mut PipelineReport,
    step: Step,
    f: impl FnOnce(&mut PipelineReport) -> Result<T, PipelineError>,
) -> Result<T, (Step, PipelineError)> {
    let started = Instant::now();
    let out = f(report).map_err(|e| (step, e))?;
    report.steps.push(StepRecord { step, elapsed_s: started.elapsed().as_secs_f64() });
    log::info!("step {step} done");
    Ok(out)
}

fn run_steps(path: &Path, overrides: &RunOverrides, report: &mut PipelineReport) -> Result<(), (Step, PipelineError)> {
    let config = timed(report, Step::Demands, |r| {
        let mut config = RunConfig::load(path)?;
        if overrides.edge.is_some() {
            config.edge = overrides.edge.clone();
        }
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        r.demands = Some(config.demands);
        Ok(config)
    })?;

    let task = timed(report, Step::Cognition, |r| {
        let preview = SceneSummary::peek(&config.scene.instance);
        let agent = config.build_agent();
        let task = cognize(&config.demands, preview.as_ref(), agent.as_ref(), &config.agent_context())?;
        r.scene = preview;
        r.task = Some(task.clone());
        Ok(task)
    })?;

    let scene = timed(report, Step::Ingestion, |r| {
        let scene = ScenePackage::ingest(&config.scene.instance)?;
        r.scene = Some(scene.summary());
        Ok(scene)
    })?;

    let plan = timed(report, Step::Decision, |r| {
        let decision = decide(&task, &scene, &config.models, config.fallback_to_local)?;
        let feasibility = check_route_feasibility(&decision.result.best_plan, &task.demands, &scene.instance, &config.models)?;
        let plan = decision.result.best_plan.clone();
        r.decision = Some(decision);
        r.feasibility = Some(feasibility);
        Ok(plan)
    })?;

    timed(report, Step::Execution, |r| {
        let log = execute(&plan, &scene.instance, &task.demands, &config.models, &config.execute_params())?;
        r.telemetry = Some(log);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, save_instance, GeneratorParams};

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn empty_demand_block_gives_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "run.json", r#"{"demands": {}, "scene": {"instance": "x.json"}}"#);
        assert_eq!(generate_demands(&p).unwrap(), Isc3Demands::default());
        let p = write(dir.path(), "run2.json", r#"{"scene": {"instance": "x.json"}}"#);
        assert_eq!(generate_demands(&p).unwrap(), Isc3Demands::default());
    }

    #[test]
    fn demand_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.json", r#"{"demands": {"min_sensing_accuracy": 1.2}, "scene": {"instance": "x"}}"#);
        assert!(matches!(generate_demands(&p), Err(PipelineError::Instance(InstanceError::Validation(_)))));
        let p = write(dir.path(), "typo.json", r#"{"demands": {"min_rate": 1}, "scene": {"instance": "x"}}"#);
        match generate_demands(&p) {
            Err(PipelineError::Schema { field, .. }) => assert_eq!(field, "demands.min_rate"),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(dir.path(), "broken.json", "{");
        assert!(matches!(generate_demands(&p), Err(PipelineError::Parse { .. })));
        assert!(matches!(generate_demands(dir.path().join("none.json")), Err(PipelineError::Parse { .. })));
    }

    #[test]
    fn overrides_echo_back() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "run.json",
            r#"{"demands": {"capacity": 12, "min_data_rate": 150000}, "scene": {"instance": "x.json"}}"#,
        );
        let d = generate_demands(&p).unwrap();
        assert_eq!(d.capacity, 12);
        assert_eq!(d.min_data_rate, 150000.0);
        assert_eq!(d.max_trip_distance, 75.0);
        let report = run_pipeline(&p);
        assert_eq!(report.demands, Some(d));
    }

    #[test]
    fn missing_scene_stops_at_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "run.json", r#"{"scene": {"instance": "missing.json"}}"#);
        let report = run_pipeline(&p);
        let steps: Vec<&str> = report.steps.iter().map(|s| s.step.as_str()).collect();
        assert_eq!(steps, ["demands", "cognition"]);
        let err = report.error.unwrap();
        assert_eq!(err.step, Step::Ingestion);
        assert_eq!(err.kind, "parse");
        assert!(report.decision.is_none());
    }

    fn canonical_run(dir: &Path, edge: Option<&str>) -> PathBuf {
        let inst = generate_instance(&GeneratorParams::default()).unwrap();
        save_instance(&inst, dir.join("scene.json")).unwrap();
        let mut cfg = RunConfig::new("scene.json");
        cfg.seed = 7;
        cfg.solver.eval_budget = Some(4_000);
        cfg.edge = edge.map(str::to_string);
        let p = dir.join("run.json");
        std::fs::write(&p, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
        p
    }

    #[test]
    fn full_run_completes() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(canonical_run(dir.path(), None));
        assert!(report.completed(), "{:?}", report.error);
        let task = report.task.as_ref().unwrap();
        assert_eq!(task.solver.algorithm, crate::solvers::Algorithm::Sa);
        assert!(!task.offload);
        assert!(report.feasibility.as_ref().unwrap().passed);
        assert_eq!(report.telemetry.as_ref().unwrap().count(EventKind::Abort), 0);
        let back: PipelineReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn unreachable_edge_falls_back() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        drop(listener);
        let dir = tempfile::tempdir().unwrap();
        let report = run_pipeline(canonical_run(dir.path(), Some(&addr)));
        assert!(report.completed(), "{:?}", report.error);
        let decision = report.decision.unwrap();
        assert!(!decision.offloaded);
        assert!(decision.fallback.unwrap().contains("solved locally"));
    }

    #[test]
    fn no_fallback_surfaces_transport_error() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        drop(listener);
        let dir = tempfile::tempdir().unwrap();
        let p = canonical_run(dir.path(), Some(&addr));
        let mut cfg = RunConfig::load(&p).unwrap();
        cfg.fallback_to_local = false;
        cfg.scene.instance = "scene.json".into();
        std::fs::write(&p, serde_json::to_string(&cfg).unwrap()).unwrap();
        let report = run_pipeline(&p);
        let err = report.error.unwrap();
        assert_eq!(err.step, Step::Decision);
        assert_eq!(err.kind, "edge");
    }

    #[test]
    fn agent_spec_json() {
        let a: AgentSpec = serde_json::from_str(r#"{"kind": "external", "address": "h:1"}"#).unwrap();
        assert_eq!(a, AgentSpec::External { address: "h:1".into() });
        assert_eq!(serde_json::to_string(&AgentSpec::RuleBased).unwrap(), r#"{"kind":"rule_based"}"#);
    }
}
