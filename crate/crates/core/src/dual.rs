//! Dual evaluation of the worst-case expected loss:
//!
//! ```text
//! L(rho) = min_{lambda >= 0} lambda * rho + G(lambda),
//! G(lambda) = sum_i p_i max_j (f_j - lambda * c_ij)
//! ```
//!
//! `G` is built exactly as a piecewise-linear convex function, so the
//! minimization over `lambda` is a breakpoint scan.

use serde::Serialize;

use crate::envelope::{Line, PlConvexFunction};
use crate::problem::{DroProblem, ProblemError, Result};

/// Outcome of the dual minimization at the problem radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualResult {
    pub value: f64,
    /// Smallest minimizing multiplier.
    pub lambda_star: f64,
    /// The minimized objective `lambda -> lambda * rho + G(lambda)`.
    pub curve: PlConvexFunction,
    /// Set when `rho = 0`: the dual value can then exceed `L(0)`, which only
    /// the primal reports.
    pub zero_radius_warning: bool,
}

/// `lambda -> max_j (f_j - lambda * c_j)` over the finite entries of
/// `cost_row`. Infinite entries are excluded for every `lambda`, including 0.
pub fn row_envelope(loss: &[f64], cost_row: &[f64]) -> PlConvexFunction {
    let lines: Vec<Line> = loss
        .iter()
        .zip(cost_row)
        .filter(|(_, c)| c.is_finite())
        .map(|(&f, &c)| Line::new(f, -c))
        .collect();
    PlConvexFunction::upper_envelope(&lines)
}

/// `G(lambda) = sum_i p_i * row_envelope(i)`.
pub fn envelope_g(problem: &DroProblem) -> PlConvexFunction {
    let loss = problem.loss().values();
    let rows: Vec<PlConvexFunction> = (0..problem.n()).map(|i| row_envelope(loss, problem.cost().row(i))).collect();
    let terms: Vec<(f64, &PlConvexFunction)> = problem.nominal().weights().iter().copied().zip(&rows).collect();
    PlConvexFunction::weighted_sum(&terms)
}

/// Minimizes `lambda * rho + g(lambda)` for an already built `g`.
pub fn minimize_with_radius(g: &PlConvexFunction, rho: f64) -> DualResult {
    let curve = g.add_linear(rho);
    // The tail slope of G is zero, so the objective is bounded below for rho >= 0.
    let (lambda_star, value) = curve.argmin().expect("G has zero tail slope");
    DualResult { value, lambda_star, curve, zero_radius_warning: rho == 0.0 }
}

/// Dual value at the problem radius.
pub fn dual_value(problem: &DroProblem) -> DualResult {
    minimize_with_radius(&envelope_g(problem), problem.radius())
}

/// `(rho, L(rho))` for every radius in the grid; `G` is built once.
pub fn robust_curve(problem: &DroProblem, rho_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(&bad) = rho_grid.iter().find(|&&r| !(r > 0.0) || !r.is_finite()) {
        return Err(ProblemError::InvalidValue(format!("radius {bad} in grid must be positive and finite")));
    }
    if rho_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(ProblemError::InvalidValue("radius grid must be sorted".into()));
    }
    let g = envelope_g(problem);
    Ok(rho_grid.iter().map(|&r| (r, minimize_with_radius(&g, r).value)).collect())
}
