use std::collections::BTreeSet;

use kdf_core::special::NAMED_POLICY;
use kdf_core::{EvalPoint, KdfError, TruncationPolicy};
use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

/// Grids larger than this are rejected.
pub const MAX_GRID_POINTS: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Math(#[from] KdfError),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Math(_) => 1,
            CliError::Schema { .. } | CliError::Io(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "SchemaError",
            CliError::Math(e) => e.kind(),
            CliError::Io(_) => "IoError",
        }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            CliError::Schema { path, .. } => Some(path),
            CliError::Math(e) => e.parameter_path(),
            CliError::Io(_) => None,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eval,
    Convergence,
    Residual,
    Solutions,
    Cauchy,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Convergence => "convergence",
            Command::Residual => "residual",
            Command::Solutions => "solutions",
            Command::Cauchy => "cauchy",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Function {
    F1211,
    F0211,
    Xi2,
    /// General series given by its six parameter lists.
    KdF,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::F1211 => "F1211",
            Function::F0211 => "F0211",
            Function::Xi2 => "Xi2",
            Function::KdF => "KdF",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionLabel {
    U1,
    U2,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyOverride {
    pub max_diagonal: Option<usize>,
    pub rel_tol: Option<f64>,
    pub consecutive_small: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub xi: f64,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub function: Option<Function>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub points: Option<Value>,
    #[serde(default)]
    pub policy: Option<PolicyOverride>,
    #[serde(default)]
    pub solution: Option<SolutionLabel>,
    /// `[dx, dy]` for `eval`.
    #[serde(default)]
    pub derivative: Option<[u32; 2]>,
    /// Pass threshold on `|residual| / scale`.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub trace: Option<TraceSpec>,
    #[serde(default)]
    pub checks: Option<Vec<String>>,
}

/// Values taken from command-line flags. Flags win over the job document.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub tol: Option<f64>,
    pub max_diagonal: Option<usize>,
    pub nodes: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: None,
            max_diagonal: None,
            nodes: 64,
            seed: 42,
        }
    }
}

pub fn parse_job(text: &str) -> CliResult<JobSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let job: JobSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })?;
    Ok(job)
}

impl JobSpec {
    pub fn policy(&self, settings: &Settings) -> CliResult<TruncationPolicy> {
        let mut policy = NAMED_POLICY;
        if let Some(o) = &self.policy {
            if let Some(v) = o.max_diagonal {
                policy.max_diagonal = v;
            }
            if let Some(v) = o.rel_tol {
                policy.rel_tol = v;
            }
            if let Some(v) = o.consecutive_small {
                policy.consecutive_small = v;
            }
        }
        if let Some(v) = settings.tol {
            policy.rel_tol = v;
        }
        if let Some(v) = settings.max_diagonal {
            policy.max_diagonal = v;
        }
        policy.validate().map_err(|e| {
            CliError::schema(
                format!("policy.{}", e.parameter_path().unwrap_or("")),
                e.to_string(),
            )
        })?;
        Ok(policy)
    }

    pub fn require_function(&self) -> CliResult<Function> {
        self.function
            .ok_or_else(|| CliError::schema("function", "missing field"))
    }

    pub fn params(&self) -> Params<'_> {
        Params {
            map: &self.params,
            used: BTreeSet::new(),
        }
    }

    pub fn eval_points(&self) -> CliResult<Vec<EvalPoint>> {
        match &self.points {
            Some(v) => parse_points(v),
            None => Err(CliError::schema("points", "missing field")),
        }
    }

    pub fn optional_points(&self) -> CliResult<Vec<EvalPoint>> {
        self.points.as_ref().map_or(Ok(Vec::new()), parse_points)
    }
}

/// Reads named entries of `params`, then rejects whatever was not read.
pub struct Params<'a> {
    map: &'a Map<String, Value>,
    used: BTreeSet<String>,
}

impl Params<'_> {
    fn get(&mut self, name: &str) -> Option<&Value> {
        self.used.insert(name.to_string());
        self.map.get(name)
    }

    pub fn real(&mut self, name: &str) -> CliResult<f64> {
        match self.get(name) {
            None => Err(CliError::schema(format!("params.{name}"), "missing parameter")),
            Some(v) => as_real(v, &format!("params.{name}")),
        }
    }

    pub fn real_or(&mut self, name: &str, default: f64) -> CliResult<f64> {
        if self.map.contains_key(name) {
            self.real(name)
        } else {
            self.used.insert(name.to_string());
            Ok(default)
        }
    }

    /// A list of reals; a bare number counts as a one-element list.
    pub fn list(&mut self, name: &str) -> CliResult<Vec<f64>> {
        let path = format!("params.{name}");
        match self.get(name) {
            None => Ok(Vec::new()),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(k, v)| as_real(v, &format!("{path}[{k}]")))
                .collect(),
            Some(v) => Ok(vec![as_real(v, &path)?]),
        }
    }

    pub fn finish(self) -> CliResult<()> {
        match self.map.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(CliError::schema(format!("params.{k}"), "unknown parameter")),
            None => Ok(()),
        }
    }
}

fn as_real(v: &Value, path: &str) -> CliResult<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::schema(path, format!("expected a finite number, got {v}")))
}

fn as_count(v: Option<&Value>, path: &str) -> CliResult<u64> {
    match v.and_then(Value::as_u64) {
        Some(n) if n >= 1 => Ok(n),
        _ => Err(CliError::schema(path, "expected a positive integer")),
    }
}

fn linspace(lo: f64, hi: f64, n: u64) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

const GRID_KEYS: [&str; 6] = ["x_min", "x_max", "nx", "y_min", "y_max", "ny"];

fn parse_grid(map: &Map<String, Value>) -> CliResult<Vec<EvalPoint>> {
    if let Some(k) = map.keys().find(|k| !GRID_KEYS.contains(&k.as_str())) {
        return Err(CliError::schema(format!("points.{k}"), "unknown grid field"));
    }
    let real = |k: &str| match map.get(k) {
        Some(v) => as_real(v, &format!("points.{k}")),
        None => Err(CliError::schema(format!("points.{k}"), "missing grid field")),
    };
    let (x_min, x_max, y_min, y_max) = (real("x_min")?, real("x_max")?, real("y_min")?, real("y_max")?);
    let nx = as_count(map.get("nx"), "points.nx")?;
    let ny = as_count(map.get("ny"), "points.ny")?;
    if nx.saturating_mul(ny) > MAX_GRID_POINTS {
        return Err(CliError::schema(
            "points",
            format!("grid has {nx} x {ny} points, limit is {MAX_GRID_POINTS}"),
        ));
    }
    let ys = linspace(y_min, y_max, ny);
    Ok(linspace(x_min, x_max, nx)
        .into_iter()
        .flat_map(|x| ys.iter().map(move |&y| EvalPoint { x, y }))
        .collect())
}

/// A list of `[x, y]` pairs or `{"x": .., "y": ..}` objects, or a grid descriptor.
pub fn parse_points(v: &Value) -> CliResult<Vec<EvalPoint>> {
    match v {
        Value::Object(map) => parse_grid(map),
        Value::Array(items) => {
            if items.len() as u64 > MAX_GRID_POINTS {
                return Err(CliError::schema("points", "too many points"));
            }
            items
                .iter()
                .enumerate()
                .map(|(k, item)| {
                    let path = format!("points[{k}]");
                    match item {
                        Value::Array(xy) if xy.len() == 2 => Ok(EvalPoint {
                            x: as_real(&xy[0], &format!("{path}[0]"))?,
                            y: as_real(&xy[1], &format!("{path}[1]"))?,
                        }),
                        Value::Object(m) if m.len() == 2 && m.contains_key("x") && m.contains_key("y") => {
                            Ok(EvalPoint {
                                x: as_real(&m["x"], &format!("{path}.x"))?,
                                y: as_real(&m["y"], &format!("{path}.y"))?,
                            })
                        }
                        _ => Err(CliError::schema(path, "expected [x, y] or {\"x\": .., \"y\": ..}")),
                    }
                })
                .collect()
        }
        _ => Err(CliError::schema("points", "expected a list of points or a grid")),
    }
}
