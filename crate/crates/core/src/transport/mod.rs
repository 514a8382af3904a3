//! Exact primal solvers: Kantorovich transport, bottleneck transport, and the
//! worst-case distribution problems under a hard budget or a linear penalty.
//!
//! Nothing in this module goes through a dual reformulation, so its values
//! serve as ground truth for the dual engine.

pub mod budget;
pub mod flow;

use crate::problem::{CostMatrix, DiscreteDistribution, DroProblem, ProblemError, Result};

use budget::Item;
use flow::FlowNetwork;

/// Marginal tolerance used when validating couplings.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;

/// Joint mass over (nominal atom, candidate column).
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
    row_marginal: Vec<f64>,
    col_marginal: Vec<f64>,
}

impl Coupling {
    /// Builds a coupling from a dense mass matrix and checks its marginals.
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>, row_marginal: Vec<f64>, col_marginal: Vec<f64>) -> Result<Self> {
        if mass.len() != rows * cols || row_marginal.len() != rows || col_marginal.len() != cols {
            return Err(ProblemError::ShapeMismatch("coupling dimensions".into()));
        }
        if let Some(&bad) = mass.iter().find(|&&v| !(v >= 0.0)) {
            return Err(ProblemError::InvalidValue(format!("coupling mass {bad}")));
        }
        let c = Self { rows, cols, mass, row_marginal, col_marginal };
        for i in 0..rows {
            let s: f64 = c.row(i).iter().sum();
            if (s - c.row_marginal[i]).abs() > MARGINAL_TOLERANCE {
                return Err(ProblemError::InvalidValue(format!("row {i} carries {s}, expected {}", c.row_marginal[i])));
            }
        }
        for j in 0..cols {
            let s: f64 = (0..rows).map(|i| c.get(i, j)).sum();
            if (s - c.col_marginal[j]).abs() > MARGINAL_TOLERANCE {
                return Err(ProblemError::InvalidValue(format!("column {j} carries {s}, expected {}", c.col_marginal[j])));
            }
        }
        let total: f64 = c.mass.iter().sum();
        if (total - 1.0).abs() > MARGINAL_TOLERANCE {
            return Err(ProblemError::InvalidValue(format!("coupling has total mass {total}")));
        }
        Ok(c)
    }

    /// Coupling with the given first marginal; the second one is read off
    /// the mass matrix.
    fn from_rows(rows: usize, cols: usize, mass: Vec<f64>, row_marginal: Vec<f64>) -> Result<Self> {
        let col_marginal = (0..cols).map(|j| (0..rows).map(|i| mass[i * cols + j]).sum()).collect();
        Self::new(rows, cols, mass, row_marginal, col_marginal)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.mass[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_marginal(&self) -> &[f64] {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &[f64] {
        &self.col_marginal
    }

    /// `sum_ij mass_ij * cost_ij`, skipping zero-mass cells so that forbidden
    /// entries never contribute.
    pub fn expected_cost(&self, cost: &CostMatrix) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(k, &m)| m * cost.get(k / self.cols, k % self.cols))
            .sum()
    }

    /// `sum_ij mass_ij * values_j`.
    pub fn expected_column_value(&self, values: &[f64]) -> f64 {
        self.mass.iter().enumerate().map(|(k, &m)| m * values[k % self.cols]).sum()
    }

    /// Nonzero cells as `(row, col, mass)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(k, &m)| (k / self.cols, k % self.cols, m))
    }
}

/// Result of a Kantorovich problem: the optimal cost, and an optimal
/// coupling when a finite-cost one exists.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub value: f64,
    pub coupling: Option<Coupling>,
}

/// Optimal worst-case coupling for the hard-budget or penalized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalResult {
    /// Objective value: expected loss for the hard-budget problem, expected
    /// loss minus `lambda * transport cost` for the penalized problem.
    pub value: f64,
    pub expected_loss: f64,
    pub transport_cost: f64,
    pub coupling: Coupling,
    /// Column marginal of `coupling`.
    pub worst_case: DiscreteDistribution,
}

fn check_transport_shapes(mu: &DiscreteDistribution, nu: &DiscreteDistribution, cost: &CostMatrix) -> Result<()> {
    if cost.rows() != mu.len() {
        return Err(ProblemError::ShapeMismatch(format!("cost has {} rows for {} source atoms", cost.rows(), mu.len())));
    }
    if let Some(&bad) = nu.support().iter().find(|&&j| j >= cost.cols()) {
        return Err(ProblemError::ShapeMismatch(format!("target index {bad} beyond {} cost columns", cost.cols())));
    }
    Ok(())
}

/// Minimum expected cost over couplings of `mu` (cost rows, in support
/// order) and `nu` (support indices are cost columns). Returns `+inf`
/// without a coupling when every coupling uses a forbidden entry.
pub fn kantorovich_cost(mu: &DiscreteDistribution, nu: &DiscreteDistribution, cost: &CostMatrix) -> Result<TransportPlan> {
    check_transport_shapes(mu, nu, cost)?;
    let n = mu.len();
    let m = cost.cols();
    let source = n + m;
    let sink = source + 1;
    let mut g = FlowNetwork::new(n + m + 2);
    for (i, &w) in mu.weights().iter().enumerate() {
        g.add_edge(source, i, w, 0.0);
    }
    let nu_dense = nu.dense(m);
    for (j, &w) in nu_dense.iter().enumerate() {
        if w > 0.0 {
            g.add_edge(n + j, sink, w, 0.0);
        }
    }
    let mut arcs = Vec::new();
    for i in 0..n {
        for &j in nu.support() {
            let c = cost.get(i, j);
            if c.is_finite() {
                arcs.push((i, j, g.add_edge(i, n + j, f64::INFINITY, c)));
            }
        }
    }
    let (sent, _) = g.min_cost_flow(source, sink, 1.0);
    if sent < 1.0 - MARGINAL_TOLERANCE {
        return Ok(TransportPlan { value: f64::INFINITY, coupling: None });
    }
    let mut mass = vec![0.0; n * m];
    for &(i, j, e) in &arcs {
        mass[i * m + j] = g.flow(e).max(0.0);
    }
    let coupling = Coupling::new(n, m, mass, mu.weights().to_vec(), nu_dense)?;
    let value = coupling.expected_cost(cost);
    Ok(TransportPlan { value, coupling: Some(coupling) })
}

/// Whether a coupling of `mu` and `nu` exists using only entries with cost
/// at most `threshold`.
fn bottleneck_feasible(mu: &DiscreteDistribution, nu: &DiscreteDistribution, cost: &CostMatrix, threshold: f64) -> bool {
    let n = mu.len();
    let m = cost.cols();
    let source = n + m;
    let sink = source + 1;
    let mut g = FlowNetwork::new(n + m + 2);
    for (i, &w) in mu.weights().iter().enumerate() {
        g.add_edge(source, i, w, 0.0);
    }
    for (j, w) in nu.iter() {
        g.add_edge(n + j, sink, w, 0.0);
    }
    for i in 0..n {
        for &j in nu.support() {
            if cost.get(i, j) <= threshold {
                g.add_edge(i, n + j, f64::INFINITY, 0.0);
            }
        }
    }
    g.max_flow(source, sink) >= 1.0 - MARGINAL_TOLERANCE
}

/// Maximum transport cost: the smallest threshold `t` among the finite cost
/// values such that some coupling is supported on `{c <= t}`; `+inf` when no
/// such threshold exists.
pub fn max_transport_cost(mu: &DiscreteDistribution, nu: &DiscreteDistribution, cost: &CostMatrix) -> Result<f64> {
    check_transport_shapes(mu, nu, cost)?;
    let mut thresholds: Vec<f64> = (0..mu.len())
        .flat_map(|i| nu.support().iter().map(move |&j| cost.get(i, j)))
        .filter(|c| c.is_finite())
        .collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let Some(&top) = thresholds.last() else {
        return Ok(f64::INFINITY);
    };
    if !bottleneck_feasible(mu, nu, cost, top) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0usize, thresholds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if bottleneck_feasible(mu, nu, cost, thresholds[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(thresholds[lo])
}

/// Worst-case expected loss over distributions whose Kantorovich cost from
/// the nominal is within the problem radius, solved as an LP over couplings
/// with first marginal equal to the nominal.
pub fn primal_worst_case(problem: &DroProblem) -> Result<PrimalResult> {
    let cost = problem.cost();
    let loss = problem.loss().values();
    let rows: Vec<Vec<Item>> = (0..problem.n())
        .map(|i| {
            cost.row(i)
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_finite())
                .map(|(j, &c)| Item { id: j, cost: c, reward: loss[j] })
                .collect()
        })
        .collect();
    let solution = budget::solve(problem.nominal().weights(), &rows, problem.radius());
    let m = problem.m();
    let mut mass = vec![0.0; problem.n() * m];
    for (i, (used, &w)) in solution.rows.iter().zip(problem.nominal().weights()).enumerate() {
        for &(j, frac) in used {
            mass[i * m + j] += w * frac;
        }
    }
    finish(problem, mass, 0.0)
}

/// Penalized counterpart: maximizes `E[f(x) - lambda c(x_hat, x)]` over
/// couplings with first marginal equal to the nominal. Each row moves all its
/// mass to its best column; ties go to the lowest column index.
pub fn primal_soft(problem: &DroProblem, lambda: f64) -> Result<PrimalResult> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(ProblemError::InvalidValue(format!("penalty {lambda} must be finite and >= 0")));
    }
    let cost = problem.cost();
    let loss = problem.loss().values();
    let m = problem.m();
    let mut mass = vec![0.0; problem.n() * m];
    for (i, &w) in problem.nominal().weights().iter().enumerate() {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (j, &c) in cost.row(i).iter().enumerate() {
            if c.is_finite() {
                let v = loss[j] - lambda * c;
                if v > best.1 {
                    best = (j, v);
                }
            }
        }
        mass[i * m + best.0] = w;
    }
    finish(problem, mass, lambda)
}

fn finish(problem: &DroProblem, mass: Vec<f64>, lambda: f64) -> Result<PrimalResult> {
    let coupling = Coupling::from_rows(problem.n(), problem.m(), mass, problem.nominal().weights().to_vec())?;
    let expected_loss = coupling.expected_column_value(problem.loss().values());
    let transport_cost = coupling.expected_cost(problem.cost());
    let worst_case = DiscreteDistribution::from_dense(coupling.col_marginal())?;
    let value = if lambda == 0.0 { expected_loss } else { expected_loss - lambda * transport_cost };
    Ok(PrimalResult { value, expected_loss, transport_cost, coupling, worst_case })
}
