//! Worst-case expected loss over maximum-transport-cost balls.
//!
//! Ball membership is decided by exact float comparison of cost entries
//! against the radius; no tolerance is applied.

use serde::Serialize;

use crate::problem::{CostMatrix, DroProblem, ProblemError, Result};
use crate::transport::primal_worst_case;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxCostResult {
    pub value: f64,
    /// Column chosen for each nominal row.
    pub per_row_argmax: Vec<usize>,
}

/// Per row, the admissible column with the largest loss (lowest index on
/// ties), weighted by the nominal.
fn per_row_best(problem: &DroProblem, admissible: impl Fn(f64) -> bool) -> MaxCostResult {
    let loss = problem.loss().values();
    let mut per_row_argmax = Vec::with_capacity(problem.n());
    let mut value = 0.0;
    for (i, &w) in problem.nominal().weights().iter().enumerate() {
        let mut best: Option<usize> = None;
        for (j, &c) in problem.cost().row(i).iter().enumerate() {
            if admissible(c) && best.is_none_or(|b| loss[j] > loss[b]) {
                best = Some(j);
            }
        }
        let j = best.unwrap_or(problem.cost().diagonal_map()[i]);
        per_row_argmax.push(j);
        value += w * loss[j];
    }
    MaxCostResult { value, per_row_argmax }
}

/// Ball `{c <= rho}`.
pub fn linf_robust(problem: &DroProblem) -> MaxCostResult {
    let rho = problem.radius();
    per_row_best(problem, |c| c <= rho)
}

/// Ball `{c < rho}`. Requires `rho > 0` so that the diagonal is admissible.
pub fn linf_robust_strict(problem: &DroProblem) -> Result<MaxCostResult> {
    let rho = problem.radius();
    if !(rho > 0.0) {
        return Err(ProblemError::InvalidValue("the strict ball needs a positive radius".into()));
    }
    Ok(per_row_best(problem, |c| c < rho))
}

/// `sup_{rho >= 0} linf_robust(rho) - lambda * rho`, evaluated over the
/// thresholds `{0} U {finite cost entries}` where the step function jumps.
pub fn linf_soft(problem: &DroProblem, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(ProblemError::InvalidValue(format!("penalty {lambda} must be finite and >= 0")));
    }
    let mut thresholds = problem.cost().distinct_finite();
    if thresholds.first() != Some(&0.0) {
        thresholds.insert(0, 0.0);
    }
    let mut best = f64::NEG_INFINITY;
    for t in thresholds {
        let v = per_row_best(problem, |c| c <= t).value - lambda * t;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Independent check of [`linf_robust`]: the coupling LP with first
/// marginal equal to the nominal and `g_ij = 0` wherever `c_ij > rho`,
/// solved by the primal transport solver on the indicator cost
/// (`0` inside the ball, `+inf` outside) with zero budget.
pub fn linf_primal_oracle(problem: &DroProblem) -> Result<f64> {
    let rho = problem.radius();
    let cost = problem.cost();
    let entries = cost.entries().iter().map(|&c| if c <= rho { 0.0 } else { f64::INFINITY }).collect();
    let indicator = CostMatrix::from_flat(cost.rows(), cost.cols(), entries, cost.diagonal_map().to_vec())?;
    let restricted = DroProblem::new(
        problem.points().clone(),
        problem.nominal().clone(),
        indicator,
        problem.loss().values().to_vec(),
        0.0,
    )?;
    Ok(primal_worst_case(&restricted)?.value)
}
