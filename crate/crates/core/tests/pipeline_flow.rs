mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;

use skyroute_core::edge::{spawn_server, ServerConfig};
use skyroute_core::instance::{generate_instance, GeneratorParams, Isc3Demands};
use skyroute_core::pipeline::{
    cognize, decide, run_pipeline, AgentContext, AgentSpec, DecisionAgent, ExternalAgent, PipelineError,
    RuleBasedAgent, RunConfig, ScenePackage, SceneSummary, TaskKind, TaskSpec, VOLATILE_KEYS,
};
use skyroute_core::solvers::{Algorithm, SolverConfig};
use skyroute_core::Models;

fn scene(dir: &std::path::Path, n: usize) -> ScenePackage {
    let inst = generate_instance(&GeneratorParams { seed: 21, n_stations: n, ..Default::default() }).unwrap();
    let path = dir.join(format!("scene{n}.json"));
    skyroute_core::save_instance(&inst, &path).unwrap();
    ScenePackage::ingest(&path).unwrap()
}

#[test]
fn offload_matches_local() {
    let dir = tempfile::tempdir().unwrap();
    let pkg = scene(dir.path(), 9);
    let server = spawn_server("127.0.0.1:0", ServerConfig::default()).unwrap();
    let mut task = TaskSpec {
        task: TaskKind::ExpressDelivery,
        demands: Isc3Demands::default(),
        solver: SolverConfig::new(Algorithm::Ga, 3, 3_000),
        offload: true,
        edge_address: Some(server.addr.to_string()),
    };
    let remote = decide(&task, &pkg, &Models::default(), false).unwrap();
    assert!(remote.offloaded);
    task.offload = false;
    let local = decide(&task, &pkg, &Models::default(), false).unwrap();
    assert!(!local.offloaded);
    assert_eq!(
        serde_json::to_string(&remote.result.best_plan).unwrap(),
        serde_json::to_string(&local.result.best_plan).unwrap()
    );
    assert_eq!(common::strip_volatile(&remote.result), common::strip_volatile(&local.result));
}

#[test]
fn large_scene_offload_without_edge_falls_back_with_notice() {
    let dir = tempfile::tempdir().unwrap();
    let pkg = scene(dir.path(), 30);
    let summary = pkg.summary();
    let ctx = AgentContext { seed: 1, solver: Default::default(), edge: None };
    let mut task = cognize(&Isc3Demands::default(), Some(&summary), &RuleBasedAgent, &ctx).unwrap();
    assert!(task.offload);
    assert_eq!(task.solver.algorithm, Algorithm::Ga);
    task.solver.eval_budget = 500;
    let d = decide(&task, &pkg, &Models::default(), true).unwrap();
    assert!(!d.offloaded);
    assert!(d.fallback.unwrap().contains("no edge address"));
}

#[test]
fn external_agent_over_the_wire() {
    let server = spawn_server("127.0.0.1:0", ServerConfig::default()).unwrap();
    let summary = SceneSummary {
        source: "mem".into(),
        n_stations: 14,
        total_demand: 40,
        n_base_stations: 5,
        n_no_fly_zones: 0,
        frame: Default::default(),
        visibility: 1.0,
        wind_speed_mps: 2.0,
    };
    let ctx = AgentContext { seed: 11, ..Default::default() };
    let remote = ExternalAgent::new(server.addr.to_string()).plan(&Isc3Demands::default(), Some(&summary), &ctx).unwrap();
    let local = RuleBasedAgent.plan(&Isc3Demands::default(), Some(&summary), &ctx).unwrap();
    assert_eq!(remote, local);
}

/// A fake agent endpoint that answers every line with `reply`.
fn fake_agent(reply: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    std::thread::spawn(move || {
        if let Ok((stream, _)) = listener.accept() {
            let mut out = stream.try_clone().unwrap();
            for line in BufReader::new(stream).lines() {
                let req: serde_json::Value = serde_json::from_str(&line.unwrap()).unwrap();
                let body = reply.replace("ID", req["id"].as_str().unwrap());
                writeln!(out, "{body}").unwrap();
            }
        }
    });
    addr
}

#[test]
fn malformed_agent_reply_is_invalid_response() {
    for reply in [
        r#"{"id":"ID","result":{"bogus":true}}"#,
        r#"{"id":"ID","result":{"demands":{"min_sensing_accuracy":3},"solver":{"algorithm":"sa"}}}"#,
        r#"{"id":"ID","error":{"code":4,"message":"model offline"}}"#,
        "not json",
    ] {
        let agent = ExternalAgent::new(fake_agent(reply));
        let err = agent.plan(&Isc3Demands::default(), None, &AgentContext::default()).unwrap_err();
        assert!(matches!(err, PipelineError::AgentInvalidResponse(_)), "{reply}: {err}");
    }
}

#[test]
fn external_agent_pipeline_and_determinism() {
    let server = spawn_server("127.0.0.1:0", ServerConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let inst = generate_instance(&GeneratorParams::default()).unwrap();
    skyroute_core::save_instance(&inst, dir.path().join("scene.json")).unwrap();
    let mut cfg = RunConfig::new("scene.json");
    cfg.agent = AgentSpec::External { address: server.addr.to_string() };
    cfg.seed = 4;
    let path = dir.path().join("run.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let strip = |r: &skyroute_core::PipelineReport| {
        let mut v = serde_json::to_value(r).unwrap();
        common::remove_keys(&mut v, &VOLATILE_KEYS);
        v.to_string()
    };
    let a = run_pipeline(&path);
    assert!(a.completed(), "{:?}", a.error);
    assert_eq!(strip(&a), strip(&run_pipeline(&path)));
    let csv = a.telemetry.as_ref().unwrap().to_csv();
    assert_eq!(csv.lines().count(), a.telemetry.as_ref().unwrap().events.len() + 1);
}
