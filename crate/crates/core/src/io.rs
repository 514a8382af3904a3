//! JSON problem files.
//!
//! Every number may also be written as the string `"inf"` (or `"-inf"`).
//! Problem files:
//!
//! ```json
//! {
//!   "points": [[0.0], [1.0]],
//!   "metric": "euclidean",
//!   "p": 1,
//!   "nominal": { "support": [0], "weights": [1.0] },
//!   "loss": [0.0, 1.0],
//!   "radius": 0.3
//! }
//! ```
//!
//! `points` is a list of coordinates or a point count. Costs are `d^p` for
//! `metric` (a name or an explicit distance matrix), or are given directly
//! as a square `cost` matrix. `p = "inf"` keeps the distances as costs, for
//! the maximum-cost ball.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::applications::{ApplicationError, ChanceInstance, GlobalizedInstance, RobustMdp, SafeSet};
use crate::problem::{cost_from_metric, CostMatrix, DiscreteDistribution, DroProblem, MetricSpec, PointSet, ProblemError, TransportOrder};
use crate::risk::{RiskError, ScalarDistribution};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error in {field}: {message}")]
    Validation { field: String, message: String },
}

impl IoError {
    fn field(field: &str, message: impl ToString) -> Self {
        IoError::Validation { field: field.into(), message: message.to_string() }
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, IoError>;

/// A number, or one of the strings `"inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Num {
    Value(f64),
    Text(Sentinel),
}

#[derive(Debug, Clone, Copy, Deserialize)]
enum Sentinel {
    #[serde(rename = "inf", alias = "Infinity")]
    Inf,
    #[serde(rename = "-inf", alias = "-Infinity")]
    NegInf,
}

impl From<Num> for f64 {
    fn from(n: Num) -> f64 {
        match n {
            Num::Value(v) => v,
            Num::Text(Sentinel::Inf) => f64::INFINITY,
            Num::Text(Sentinel::NegInf) => f64::NEG_INFINITY,
        }
    }
}

fn nums(v: Vec<Num>) -> Vec<f64> {
    v.into_iter().map(f64::from).collect()
}

fn matrix(v: Vec<Vec<Num>>) -> Vec<Vec<f64>> {
    v.into_iter().map(nums).collect()
}

fn order(p: Option<Num>) -> Result<TransportOrder> {
    TransportOrder::new(p.map_or(1.0, f64::from)).map_err(|e| IoError::field("p", e))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointsSpec {
    Count(usize),
    Coords(Vec<Vec<f64>>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MetricField {
    Named(MetricSpec),
    Matrix(Vec<Vec<Num>>),
}

#[derive(Debug, Deserialize)]
struct NominalSpec {
    support: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    points: PointsSpec,
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    metric: Option<MetricField>,
    #[serde(default)]
    cost: Option<Vec<Vec<Num>>>,
    #[serde(default)]
    p: Option<Num>,
    nominal: NominalSpec,
    loss: Vec<f64>,
    radius: f64,
    /// Globalized files only.
    #[serde(default)]
    inner_cost: Option<Vec<Vec<Num>>>,
    #[serde(default)]
    theta: Option<f64>,
}

/// A parsed problem with the canonical digest of its input.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub instance: T,
    pub digest: String,
}

/// Hex SHA-256 of the JSON value with sorted keys and shortest round-trip
/// numbers, so formatting differences do not change the digest.
pub fn canonical_digest(value: &Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(bytes))
}

fn parse_value<T: DeserializeOwned>(text: &str) -> Result<(T, String)> {
    let value: Value = serde_json::from_str(text)?;
    let digest = canonical_digest(&value);
    // Re-parse the text so errors carry line and column.
    let parsed: T = serde_json::from_str(text)?;
    Ok((parsed, digest))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })
}

fn problem_error(e: ProblemError) -> IoError {
    let field = match e {
        ProblemError::NegativeWeight { .. } | ProblemError::WeightsNotNormalized { .. } => "nominal.weights",
        ProblemError::NegativeCost { .. } | ProblemError::MissingDiagonalZero { .. } => "cost",
        ProblemError::InvalidP(_) => "p",
        ProblemError::MissingCoordinates => "points",
        _ => "problem",
    };
    IoError::field(field, e)
}

fn application_error(e: ApplicationError) -> IoError {
    IoError::field("instance", e)
}

fn risk_error(e: RiskError) -> IoError {
    IoError::field("nominal", e)
}

/// Point set, square cost and order of a problem file.
fn points_and_cost(file: &ProblemFile) -> Result<(PointSet, CostMatrix, TransportOrder)> {
    let p = order(file.p)?;
    let points = match (&file.points, &file.labels) {
        (PointsSpec::Count(n), None) => PointSet::labelled(*n),
        (PointsSpec::Count(_), Some(labels)) => PointSet::new(labels.clone(), None),
        (PointsSpec::Coords(c), None) => PointSet::from_coords(c.clone()),
        (PointsSpec::Coords(c), Some(labels)) => PointSet::new(labels.clone(), Some(c.clone())),
    }
    .map_err(|e| IoError::field("points", e))?;
    // Distances are raised to p; for p = inf they are the costs themselves.
    let exponent = match p {
        TransportOrder::Finite(v) => v,
        TransportOrder::Infinity => 1.0,
    };
    let cost = match (&file.cost, &file.metric) {
        (Some(_), Some(_)) => return Err(IoError::field("cost", "give either cost or metric, not both")),
        (Some(c), None) => CostMatrix::square(matrix(c.clone())).map_err(|e| IoError::field("cost", e))?,
        (None, metric) => {
            let metric = match metric {
                None => MetricSpec::Euclidean,
                Some(MetricField::Named(m)) => m.clone(),
                Some(MetricField::Matrix(d)) => MetricSpec::Explicit(matrix(d.clone())),
            };
            cost_from_metric(&points, &metric, exponent).map_err(|e| IoError::field("metric", e))?
        }
    };
    if cost.rows() != points.len() {
        return Err(IoError::field("cost", format!("{} rows for {} points", cost.rows(), points.len())));
    }
    Ok((points, cost, p))
}

fn problem_from_file(file: &ProblemFile) -> Result<(DroProblem, CostMatrix, TransportOrder)> {
    let (points, square, p) = points_and_cost(file)?;
    let m = points.len();
    let nominal = DiscreteDistribution::with_bound(file.nominal.support.clone(), file.nominal.weights.clone(), m)
        .map_err(problem_error)?;
    let problem =
        DroProblem::from_square_cost(points, nominal, &square, file.loss.clone(), file.radius).map_err(problem_error)?;
    Ok((problem, square, p))
}

/// A validated problem with its transport order.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub problem: DroProblem,
    pub order: TransportOrder,
}

pub fn parse_problem(text: &str) -> Result<Parsed<ProblemSpec>> {
    let (file, digest): (ProblemFile, String) = parse_value(text)?;
    let (problem, _, order) = problem_from_file(&file)?;
    Ok(Parsed { instance: ProblemSpec { problem, order }, digest })
}

pub fn read_problem(path: &Path) -> Result<Parsed<ProblemSpec>> {
    parse_problem(&read(path)?)
}

/// Problem file plus `inner_cost` (defaults to the outer square cost) and
/// `theta`, which `theta_override` replaces.
pub fn parse_globalized(text: &str, theta_override: Option<f64>) -> Result<Parsed<GlobalizedInstance>> {
    let (file, digest): (ProblemFile, String) = parse_value(text)?;
    let (problem, square, _) = problem_from_file(&file)?;
    let inner = match &file.inner_cost {
        Some(c) => CostMatrix::square(matrix(c.clone())).map_err(|e| IoError::field("inner_cost", e))?,
        None => square,
    };
    let theta = theta_override.or(file.theta).ok_or_else(|| IoError::field("theta", "missing budget theta"))?;
    let instance = GlobalizedInstance::new(problem, inner, theta).map_err(application_error)?;
    Ok(Parsed { instance, digest })
}

pub fn read_globalized(path: &Path, theta_override: Option<f64>) -> Result<Parsed<GlobalizedInstance>> {
    parse_globalized(&read(path)?, theta_override)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SafeSetSpec {
    HalfLine { upper: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// `weights`, and either `distances` to the unsafe set or `points` with a
/// `safe_set` (`{"half_line": {"upper": u}}` or
/// `{"box": {"lower": [..], "upper": [..]}}`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChanceFile {
    weights: Vec<f64>,
    #[serde(default)]
    distances: Option<Vec<f64>>,
    #[serde(default)]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    safe_set: Option<SafeSetSpec>,
    #[serde(default)]
    p: Option<Num>,
    rho: f64,
    beta: f64,
}

pub fn parse_chance(text: &str) -> Result<Parsed<ChanceInstance>> {
    let (file, digest): (ChanceFile, String) = parse_value(text)?;
    let distances = match (file.distances, file.points, file.safe_set) {
        (Some(d), None, None) => d,
        (None, Some(points), Some(set)) => {
            let set = match set {
                SafeSetSpec::HalfLine { upper } => SafeSet::HalfLine { upper },
                SafeSetSpec::Box { lower, upper } => SafeSet::Box { lower, upper },
            };
            points.iter().map(|x| set.distance_to_complement(x)).collect::<std::result::Result<_, _>>().map_err(application_error)?
        }
        _ => return Err(IoError::field("distances", "give distances, or points with a safe_set")),
    };
    let instance = ChanceInstance::new(file.weights, distances, order(file.p)?, file.rho, file.beta).map_err(application_error)?;
    Ok(Parsed { instance, digest })
}

pub fn read_chance(path: &Path) -> Result<Parsed<ChanceInstance>> {
    parse_chance(&read(path)?)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StatesSpec {
    Count(usize),
    Labels(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ActionsSpec {
    Uniform(usize),
    PerState(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RadiiSpec {
    Uniform(f64),
    PerPair(Vec<Vec<f64>>),
}

/// `states`, `actions` (a count or one count per state), `horizon`,
/// `g[t][s][a]`, `kernels[s][a]` (dense over states), `rho` (a number or
/// `rho[s][a]`) and a square `cost`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MdpFile {
    states: StatesSpec,
    actions: ActionsSpec,
    horizon: usize,
    g: Vec<Vec<Vec<f64>>>,
    kernels: Vec<Vec<Vec<f64>>>,
    rho: RadiiSpec,
    cost: Vec<Vec<Num>>,
}

pub fn parse_mdp(text: &str) -> Result<Parsed<RobustMdp>> {
    let (file, digest): (MdpFile, String) = parse_value(text)?;
    let n = match file.states {
        StatesSpec::Count(n) => n,
        StatesSpec::Labels(l) => l.len(),
    };
    let actions = match file.actions {
        ActionsSpec::Uniform(a) => vec![a; n],
        ActionsSpec::PerState(a) => a,
    };
    let radii = match file.rho {
        RadiiSpec::Uniform(r) => actions.iter().map(|&a| vec![r; a]).collect(),
        RadiiSpec::PerPair(r) => r,
    };
    let cost = CostMatrix::square(matrix(file.cost)).map_err(|e| IoError::field("cost", e))?;
    let instance = RobustMdp::new(actions, file.horizon, file.g, file.kernels, radii, cost).map_err(application_error)?;
    Ok(Parsed { instance, digest })
}

pub fn read_mdp(path: &Path) -> Result<Parsed<RobustMdp>> {
    parse_mdp(&read(path)?)
}

/// Scalar nominal for the risk command: `values`, optional `weights`
/// (uniform by default) and `dual_norm_b` (default 1).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NominalFile {
    values: Vec<f64>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    dual_norm_b: Option<f64>,
}

/// Scalar nominal and the dual norm of the portfolio vector.
#[derive(Debug, Clone)]
pub struct ScalarSpec {
    pub nominal: ScalarDistribution,
    pub dual_norm_b: f64,
}

pub fn parse_scalar(text: &str) -> Result<Parsed<ScalarSpec>> {
    let (file, digest): (NominalFile, String) = parse_value(text)?;
    let nominal = match file.weights {
        Some(w) => ScalarDistribution::new(file.values, w),
        None => ScalarDistribution::uniform(file.values),
    }
    .map_err(risk_error)?;
    Ok(Parsed { instance: ScalarSpec { nominal, dual_norm_b: file.dual_norm_b.unwrap_or(1.0) }, digest })
}

pub fn read_scalar(path: &Path) -> Result<Parsed<ScalarSpec>> {
    parse_scalar(&read(path)?)
}
