use std::fs;
use std::io::Write;
use std::path::Path;

use skyroute_core::constraints::check_route_feasibility;
use skyroute_core::edge::{self, EdgeClient, EdgeError, ErrorCode, ServerConfig};
use skyroute_core::instance::{generate_instance, instance_to_json, load_instance, DeliveryInstance, GeneratorParams, InstanceError, Isc3Demands};
use skyroute_core::pipeline::{run_pipeline_with, RunOverrides};
use skyroute_core::routing::{RoutePlan, RoutingError};
use skyroute_core::solvers::{compare, default_configs, solve, Algorithm, SolverConfig, SolverError, SolverResult};
use skyroute_core::Models;

use crate::bench_table::{bench_csv, bench_text_table};
use crate::svg::{render_svg, RenderSpec};
use crate::{CliError, Command, Format, OutArgs};

pub(crate) fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Generate { seed, stations, area, base_stations, demand_min, demand_max, out } => {
            format_of(&out, &[Format::Json])?;
            let params = GeneratorParams {
                seed,
                n_stations: stations,
                area_side_km: area,
                n_base_stations: base_stations,
                demand_range: (demand_min, demand_max),
            };
            let inst = generate_instance(&params).map_err(|e| match e {
                InstanceError::Argument(m) => CliError::Usage(m),
                other => CliError::Input(other.to_string()),
            })?;
            write_output(out.out.as_deref(), &instance_to_json(&inst))
        }
        Command::Solve { instance, demands, config, algorithm, seed, budget, edge, out } => {
            format_of(&out, &[Format::Json])?;
            let inst = read_instance(&instance)?;
            let demands = read_demands(demands.as_deref())?;
            let mut cfg = match &config {
                Some(p) => read_json::<SolverConfig>(p)?,
                None => {
                    let Some(name) = &algorithm else {
                        return Err(CliError::Usage("solve needs --algorithm or --config".into()));
                    };
                    SolverConfig::new(parse_algorithm(name)?, 0, SolverConfig::DEFAULT_BUDGET)
                }
            };
            if let (Some(name), Some(_)) = (&algorithm, &config) {
                cfg.algorithm = parse_algorithm(name)?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(b) = budget {
                cfg.eval_budget = b;
            }
            cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
            run_solve(&inst, &demands, &cfg, edge.as_deref(), out.out.as_deref())
        }
        Command::Evaluate { instance, plan, demands, out } => {
            format_of(&out, &[Format::Json])?;
            let inst = read_instance(&instance)?;
            let demands = read_demands(demands.as_deref())?;
            let plan = read_plan(&plan)?;
            let report = check_route_feasibility(&plan, &demands, &inst, &Models::default())
                .map_err(|e| CliError::Input(e.to_string()))?;
            write_output(out.out.as_deref(), &pretty(&report))?;
            if report.passed {
                Ok(())
            } else {
                let failing: Vec<String> =
                    report.records.iter().filter(|r| !r.passed).map(|r| format!("{:?}", r.kind)).collect();
                Err(CliError::Infeasible(format!("plan fails: {}", failing.join(", "))))
            }
        }
        Command::Bench { instance, demands, seed, budget, out } => {
            let format = format_of(&out, &[Format::Csv, Format::Json])?.unwrap_or(Format::Csv);
            let inst = match &instance {
                Some(p) => read_instance(p)?,
                None => generate_instance(&GeneratorParams::default()).map_err(|e| CliError::Input(e.to_string()))?,
            };
            let demands = read_demands(demands.as_deref())?;
            if budget == 0 {
                return Err(CliError::Usage("--budget must be >= 1".into()));
            }
            let table = compare(&inst, &demands, &Models::default(), &default_configs(seed, budget))
                .map_err(|e| CliError::Input(e.to_string()))?;
            let body = match format {
                Format::Json => pretty(&table),
                _ => bench_csv(&table),
            };
            let text = bench_text_table(&table);
            match &out.out {
                Some(path) => {
                    write_output(Some(path), &body)?;
                    print!("{text}");
                }
                None => {
                    write_output(None, &body)?;
                    eprint!("{text}");
                }
            }
            let infeasible: Vec<&str> =
                table.rows.iter().filter(|r| !r.feasible).map(|r| r.algorithm.as_str()).collect();
            if infeasible.is_empty() {
                Ok(())
            } else {
                Err(CliError::Infeasible(format!("no feasible plan from: {}", infeasible.join(", "))))
            }
        }
        Command::Pipeline { config, edge, seed, telemetry, out } => {
            let format = format_of(&out, &[Format::Json, Format::Csv])?.unwrap_or(Format::Json);
            let report = run_pipeline_with(&config, &RunOverrides { edge, seed });
            let csv = report.telemetry.as_ref().map(|t| t.to_csv());
            match format {
                Format::Csv => write_output(out.out.as_deref(), csv.as_deref().unwrap_or(""))?,
                _ => write_output(out.out.as_deref(), &report.to_json())?,
            }
            if let (Some(path), Some(csv)) = (&telemetry, &csv) {
                fs::write(path, csv)?;
            }
            match &report.error {
                None => Ok(()),
                Some(f) => {
                    let msg = format!("pipeline stopped at {}: {}", f.step, f.message);
                    match f.kind.as_str() {
                        "no_feasible_found" | "instance_infeasible" | "infeasible_plan_rejected" => {
                            Err(CliError::Infeasible(msg))
                        }
                        _ => Err(CliError::Input(msg)),
                    }
                }
            }
        }
        Command::Serve { bind } => edge::serve_blocking(&bind, ServerConfig::default(), |addr| {
            eprintln!("skyroute: edge server listening on {addr}");
        })
        .map_err(|e| CliError::Input(e.to_string())),
        Command::Render { instance, plan, demands, size, no_coverage, no_labels, out } => {
            format_of(&out, &[Format::Svg])?;
            let inst = read_instance(&instance)?;
            let demands = read_demands(demands.as_deref())?;
            let plan = plan.as_deref().map(read_plan).transpose()?;
            let spec = RenderSpec { size_px: size, coverage: !no_coverage, labels: !no_labels, ..Default::default() };
            let svg = render_svg(&inst, plan.as_ref(), &demands, &Models::default().link, &spec)
                .map_err(|e| CliError::Input(e.to_string()))?;
            write_output(out.out.as_deref(), &svg)
        }
    }
}

fn run_solve(
    inst: &DeliveryInstance,
    demands: &Isc3Demands,
    cfg: &SolverConfig,
    edge: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let models = Models::default();
    let result: SolverResult = match edge {
        Some(addr) => match EdgeClient::new(addr).solve_remote(inst, demands, &models, cfg) {
            Ok(r) => r,
            Err(EdgeError::Remote { code: ErrorCode::Solver, message })
                if message.starts_with("no feasible plan") || message.contains("cannot be served") =>
            {
                return Err(CliError::Infeasible(format!("edge server: {message}")))
            }
            Err(e) => return Err(CliError::Input(e.to_string())),
        },
        None => match solve(inst, demands, &models, cfg) {
            Ok(r) => r,
            Err(SolverError::NoFeasibleFound { result }) => {
                write_output(out, &pretty(&*result))?;
                return Err(CliError::Infeasible(format!(
                    "no feasible plan found; least-penalized plan written (penalty {})",
                    result.best_objective.penalty
                )));
            }
            Err(e @ SolverError::Routing(RoutingError::InstanceInfeasible { .. })) => {
                return Err(CliError::Infeasible(e.to_string()))
            }
            Err(e) => return Err(CliError::Input(e.to_string())),
        },
    };
    write_output(out, &pretty(&result))
}

fn parse_algorithm(name: &str) -> Result<Algorithm, CliError> {
    name.parse().map_err(CliError::Usage)
}

fn format_of(out: &OutArgs, allowed: &[Format]) -> Result<Option<Format>, CliError> {
    match out.format {
        Some(f) if !allowed.contains(&f) => {
            let names: Vec<String> = allowed.iter().map(|f| format!("{f:?}").to_lowercase()).collect();
            Err(CliError::Usage(format!(
                "--format {} is not supported here (use {})",
                format!("{f:?}").to_lowercase(),
                names.join(" or ")
            )))
        }
        f => Ok(f),
    }
}

fn pretty<T: serde::Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<DeliveryInstance, CliError> {
    load_instance(path).map_err(|e| CliError::Input(e.to_string()))
}

fn read_demands(path: Option<&Path>) -> Result<Isc3Demands, CliError> {
    let Some(path) = path else {
        return Ok(Isc3Demands::default());
    };
    let d: Isc3Demands = read_json(path)?;
    d.validate().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(d)
}

/// Accepts a bare plan or a solve result.
fn read_plan(path: &Path) -> Result<RoutePlan, CliError> {
    let mut v: serde_json::Value = read_json(path)?;
    if let Some(inner) = v.get_mut("best_plan") {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| CliError::Input(format!("{}: not a route plan: {e}", path.display())))
}
