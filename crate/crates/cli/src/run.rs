use kdf_core::cauchy::{verify_trace, CauchyProblem, CauchySolver, CharacteristicPoint, Polynomial};
use kdf_core::frobenius::{
    independence_check, ratio_spread, second_params_f0211, second_params_f1211, solution_pair_f0211,
    solution_pair_f1211, Solution, SolutionPair,
};
use kdf_core::pde::{expanded_system_f0211, expanded_system_f1211, residual, PdeSystem};
use kdf_core::series::{classify_convergence, in_region, kdf_eval_derivative};
use kdf_core::shape::validate_shape;
use kdf_core::{
    ConvergenceRegion, EvalPoint, KdFShape, KdfError, ParamsF0211, ParamsF1211, ParamsXi2, Radius,
    TruncationPolicy,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::canonical::{num, nums};
use crate::check;
use crate::job::{CliError, CliResult, Command, Function, JobSpec, Settings, SolutionLabel};

/// One line of CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub y: f64,
    pub value: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub rows: Option<Vec<Row>>,
    /// False when some point failed or a requested property does not hold.
    pub ok: bool,
}

pub fn error_value(e: &CliError) -> Value {
    json!({
        "kind": e.kind(),
        "parameter": e.path(),
        "message": e.to_string(),
    })
}

fn kdf_error_value(e: &KdfError) -> Value {
    error_value(&CliError::Math(e.clone()))
}

/// The report emitted when the job as a whole fails.
pub fn error_report(command: Option<Command>, e: &CliError) -> Value {
    json!({
        "command": command.map(Command::name),
        "ok": false,
        "error": error_value(e),
    })
}

fn params_error(e: KdfError) -> CliError {
    CliError::Math(e.with_path_prefix("params"))
}

enum Family {
    F1211(ParamsF1211),
    F0211(ParamsF0211),
}

impl Family {
    fn read(job: &JobSpec) -> CliResult<Family> {
        let mut p = job.params();
        let family = match job.require_function()? {
            Function::F1211 => Family::F1211(ParamsF1211 {
                a: p.real("a")?,
                b: p.real("b")?,
                c: p.real("c")?,
                d: p.real("d")?,
                e: p.real("e")?,
                f: p.real("f")?,
                g: p.real("g")?,
            }),
            Function::F0211 => Family::F0211(ParamsF0211 {
                b: p.real("b")?,
                c: p.real("c")?,
                d: p.real("d")?,
                e: p.real("e")?,
                g: p.real("g")?,
            }),
            other => {
                return Err(CliError::schema(
                    "function",
                    format!("{} has no solution system; use F1211 or F0211", other.name()),
                ))
            }
        };
        p.finish()?;
        Ok(family)
    }

    fn pair(&self) -> CliResult<SolutionPair> {
        match self {
            Family::F1211(p) => solution_pair_f1211(p),
            Family::F0211(p) => solution_pair_f0211(p),
        }
        .map_err(params_error)
    }

    fn system(&self) -> PdeSystem<f64> {
        match self {
            Family::F1211(p) => expanded_system_f1211(p),
            Family::F0211(p) => expanded_system_f0211(p),
        }
    }

    fn params_json(&self, shifted: bool) -> Value {
        match self {
            Family::F1211(p) if shifted => serde_json::to_value(second_params_f1211(p)),
            Family::F1211(p) => serde_json::to_value(p),
            Family::F0211(p) if shifted => serde_json::to_value(second_params_f0211(p)),
            Family::F0211(p) => serde_json::to_value(p),
        }
        .expect("parameters serialize")
    }
}

fn read_shape(job: &JobSpec) -> CliResult<(Function, KdFShape)> {
    let function = job.require_function()?;
    let mut p = job.params();
    let shape = match function {
        Function::F1211 => ParamsF1211 {
            a: p.real("a")?,
            b: p.real("b")?,
            c: p.real("c")?,
            d: p.real("d")?,
            e: p.real("e")?,
            f: p.real("f")?,
            g: p.real("g")?,
        }
        .shape(),
        Function::F0211 => ParamsF0211 {
            b: p.real("b")?,
            c: p.real("c")?,
            d: p.real("d")?,
            e: p.real("e")?,
            g: p.real("g")?,
        }
        .shape(),
        Function::Xi2 => ParamsXi2 {
            b: p.real("b")?,
            c: p.real("c")?,
            e: p.real("e")?,
        }
        .shape(),
        Function::KdF => KdFShape::new(
            p.list("upper_joint")?,
            p.list("upper_x")?,
            p.list("upper_y")?,
            p.list("lower_joint")?,
            p.list("lower_x")?,
            p.list("lower_y")?,
        ),
    };
    p.finish()?;
    Ok((function, shape.map_err(params_error)?))
}

pub fn run(job: &JobSpec, settings: &Settings) -> CliResult<Outcome> {
    let policy = job.policy(settings)?;
    let mut out = match job.command {
        Command::Eval => eval(job, &policy)?,
        Command::Convergence => convergence(job)?,
        Command::Residual => residual_job(job, &policy)?,
        Command::Solutions => solutions(job, &policy)?,
        Command::Cauchy => cauchy(job, settings, &policy)?,
        Command::Check => check_job(job, settings)?,
    };
    if let Value::Object(map) = &mut out.report {
        map.insert("command".into(), json!(job.command.name()));
        map.insert("ok".into(), json!(out.ok));
    }
    Ok(out)
}

fn eval(job: &JobSpec, policy: &TruncationPolicy) -> CliResult<Outcome> {
    let (function, shape) = read_shape(job)?;
    let points = job.eval_points()?;
    let [dx, dy] = job.derivative.unwrap_or([0, 0]);
    let results: Vec<_> = points
        .par_iter()
        .map(|&p| (p, kdf_eval_derivative(&shape, p, dx, dy, policy)))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut items = Vec::with_capacity(results.len());
    let (mut failed, mut warnings) = (0, 0);
    for (p, r) in results {
        match r {
            Ok(r) => {
                if !r.status.is_ok() {
                    warnings += 1;
                }
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: Some(r.value),
                    status: r.status.as_str().into(),
                });
                items.push(json!({
                    "x": num(p.x),
                    "y": num(p.y),
                    "value": num(r.value),
                    "status": r.status.as_str(),
                    "diagonals_used": r.diagonals_used,
                    "tail_estimate": num(r.tail_estimate),
                }));
            }
            Err(e) => {
                failed += 1;
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: None,
                    status: e.kind().into(),
                });
                items.push(json!({
                    "x": num(p.x),
                    "y": num(p.y),
                    "value": null,
                    "status": e.kind(),
                    "error": kdf_error_value(&e),
                }));
            }
        }
    }
    Ok(Outcome {
        report: json!({
            "function": function.name(),
            "shape": shape,
            "derivative": [dx, dy],
            "results": items,
            "failed": failed,
            "warnings": warnings,
        }),
        rows: Some(rows),
        ok: failed == 0,
    })
}

fn radius_name(r: Radius) -> &'static str {
    match r {
        Radius::Unit => "unit",
        Radius::Infinite => "infinite",
        Radius::Empty => "empty",
    }
}

fn convergence(job: &JobSpec) -> CliResult<Outcome> {
    let (function, shape) = read_shape(job)?;
    let region = classify_convergence(&shape);
    let region_json = match region {
        ConvergenceRegion::PerVariable { x_radius, y_radius } => json!({
            "kind": "per_variable",
            "x_radius": radius_name(x_radius),
            "y_radius": radius_name(y_radius),
        }),
        ConvergenceRegion::Coupled { root } => json!({"kind": "coupled", "root": root}),
    };
    let report = validate_shape(&shape);
    let inside: Vec<Value> = job
        .optional_points()?
        .iter()
        .map(|&p| json!({"x": num(p.x), "y": num(p.y), "inside": in_region(&region, p)}))
        .collect();
    Ok(Outcome {
        report: json!({
            "function": function.name(),
            "shape": shape,
            "region": region_json,
            "terminating": report.is_terminating(),
            "polynomial": report.is_polynomial(),
            "reachable_diagonal": report.reachable_diagonal(),
            "results": inside,
        }),
        rows: None,
        ok: true,
    })
}

fn pick(pair: SolutionPair, label: SolutionLabel) -> CliResult<Solution> {
    match label {
        SolutionLabel::U1 => Ok(pair.first),
        SolutionLabel::U2 => pair.second.map_err(params_error),
    }
}

fn residual_job(job: &JobSpec, policy: &TruncationPolicy) -> CliResult<Outcome> {
    let family = Family::read(job)?;
    let label = job.solution.unwrap_or(SolutionLabel::U1);
    let threshold = job.threshold.unwrap_or(1e-8);
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CliError::schema("threshold", "must be a positive number"));
    }
    let solution = pick(family.pair()?, label)?;
    let system = family.system();
    let points = job.eval_points()?;
    let f = solution.with_policy(*policy);
    let results: Vec<_> = points.par_iter().map(|&p| (p, residual(&system, &f, p))).collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut items = Vec::with_capacity(results.len());
    let (mut failed, mut above) = (0, 0);
    let mut worst: f64 = 0.0;
    for (p, r) in results {
        match r {
            Ok(r) => {
                let m = r.max_relative();
                worst = worst.max(m);
                let pass = m <= threshold;
                if !pass {
                    above += 1;
                }
                let status = if pass { "pass" } else { "fail" };
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: Some(m),
                    status: status.into(),
                });
                items.push(json!({
                    "x": num(p.x),
                    "y": num(p.y),
                    "residuals": nums(&r.values),
                    "scales": nums(&r.scales),
                    "max_relative": num(m),
                    "status": status,
                }));
            }
            Err(e) => {
                failed += 1;
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: None,
                    status: e.kind().into(),
                });
                items.push(json!({
                    "x": num(p.x),
                    "y": num(p.y),
                    "status": e.kind(),
                    "error": kdf_error_value(&e),
                }));
            }
        }
    }
    Ok(Outcome {
        report: json!({
            "function": job.require_function()?.name(),
            "solution": if label == SolutionLabel::U1 { "u1" } else { "u2" },
            "threshold": num(threshold),
            "worst_relative": num(worst),
            "above_threshold": above,
            "failed": failed,
            "results": items,
        }),
        rows: Some(rows),
        ok: failed == 0 && above == 0,
    })
}

fn solution_json(label: &str, sol: &Solution, params: Value) -> Value {
    json!({
        "label": label,
        "exponents": {"tau": num(sol.exponents.tau), "nu": num(sol.exponents.nu)},
        "params": params,
        "shape": sol.shape,
    })
}

fn solutions(job: &JobSpec, policy: &TruncationPolicy) -> CliResult<Outcome> {
    let family = Family::read(job)?;
    let pair = family.pair()?;
    let mut list = vec![solution_json("u1", &pair.first, family.params_json(false))];
    let mut ok = true;
    let mut report = Map::new();
    match &pair.second {
        Ok(second) => {
            list.push(solution_json("u2", second, family.params_json(true)));
            let points = job.optional_points()?;
            if !points.is_empty() {
                let spread = ratio_spread(&pair.first, second, &points, policy)?;
                let independent = independence_check(&pair.first, second, &points, policy)?;
                report.insert("ratio_spread".into(), num(spread));
                report.insert("independent".into(), json!(independent));
            }
        }
        Err(e) => {
            ok = false;
            list.push(json!({"label": "u2", "error": kdf_error_value(e)}));
        }
    }
    report.insert("function".into(), json!(job.require_function()?.name()));
    report.insert("solutions".into(), Value::Array(list));
    Ok(Outcome {
        report: Value::Object(report),
        rows: None,
        ok,
    })
}

fn cauchy(job: &JobSpec, settings: &Settings, policy: &TruncationPolicy) -> CliResult<Outcome> {
    let mut p = job.params();
    let tau = p.list("tau")?;
    let nu = p.list("nu")?;
    let problem = CauchyProblem {
        alpha: p.real("alpha")?,
        beta: p.real("beta")?,
        lambda: p.real_or("lambda", 0.0)?,
        tau_data: Polynomial::new(tau),
        nu_data: Polynomial::new(nu),
    };
    p.finish()?;
    if job.points.is_none() && job.trace.is_none() {
        return Err(CliError::schema("points", "cauchy needs points, trace, or both"));
    }
    let solver = CauchySolver::new(&problem, settings.nodes, policy).map_err(params_error)?;
    let points: Vec<EvalPoint> = job.optional_points()?;
    let results: Vec<_> = points
        .par_iter()
        .map(|&p| (p, solver.solve(CharacteristicPoint { xi: p.x, eta: p.y })))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut items = Vec::with_capacity(results.len());
    let mut failed = 0;
    for (p, r) in results {
        match r {
            Ok(u) => {
                let status = if u.unconverged == 0 { "ok" } else { "unconverged" };
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: Some(u.value),
                    status: status.into(),
                });
                items.push(json!({
                    "xi": num(p.x),
                    "eta": num(p.y),
                    "value": num(u.value),
                    "integrals": nums(&u.integrals),
                    "unconverged": u.unconverged,
                    "status": status,
                }));
            }
            Err(e) => {
                failed += 1;
                rows.push(Row {
                    x: p.x,
                    y: p.y,
                    value: None,
                    status: e.kind().into(),
                });
                items.push(json!({
                    "xi": num(p.x),
                    "eta": num(p.y),
                    "value": null,
                    "status": e.kind(),
                    "error": kdf_error_value(&e),
                }));
            }
        }
    }

    let mut report = Map::new();
    report.insert("nodes".into(), json!(settings.nodes));
    report.insert("results".into(), Value::Array(items));
    report.insert("failed".into(), json!(failed));
    if let Some(trace) = &job.trace {
        let dev = verify_trace(&problem, trace.xi, &trace.eps, settings.nodes, policy)?;
        let monotone = dev.windows(2).all(|w| w[1].1 < w[0].1);
        report.insert(
            "trace".into(),
            json!({
                "xi": num(trace.xi),
                "deviations": dev.iter().map(|&(e, d)| json!({"eps": num(e), "deviation": num(d)})).collect::<Vec<_>>(),
                "monotone": monotone,
            }),
        );
    }
    Ok(Outcome {
        report: Value::Object(report),
        rows: Some(rows),
        ok: failed == 0,
    })
}

fn check_job(job: &JobSpec, settings: &Settings) -> CliResult<Outcome> {
    let names: Vec<&str> = match &job.checks {
        Some(list) => {
            for (k, name) in list.iter().enumerate() {
                if !check::NAMES.contains(&name.as_str()) {
                    return Err(CliError::schema(format!("checks[{k}]"), format!("unknown check {name:?}")));
                }
            }
            list.iter().map(String::as_str).collect()
        }
        None => check::NAMES.to_vec(),
    };
    let results = check::run_checks(&names, settings);
    let ok = results.iter().all(|r| r.pass);
    let failing = results.iter().filter(|r| !r.pass).count();
    Ok(Outcome {
        report: json!({
            "seed": settings.seed,
            "nodes": settings.nodes,
            "checks": results.iter().map(check::CheckResult::to_json).collect::<Vec<_>>(),
            "failing": failing,
        }),
        rows: None,
        ok,
    })
}
