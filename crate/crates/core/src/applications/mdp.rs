//! Finite-horizon value iteration with a transport ball around every
//! nominal transition kernel:
//!
//! ```text
//! V_{T+1} = 0
//! V_t(s)  = min_a g_t(s, a) + sup { E_P[V_{t+1}] : W(P_hat(.|s, a), P) <= rho(s, a) }
//! ```
//!
//! Each supremum is one dual evaluation on the state space.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::dual_value;
use crate::problem::{CostMatrix, DiscreteDistribution, DroProblem, PointSet};
use crate::transport::primal_worst_case;

use super::{ApplicationError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RobustMdp {
    /// Number of actions available in each state.
    actions: Vec<usize>,
    horizon: usize,
    /// `stage_costs[t][s][a]` for stages `1..=T` (index `t - 1`).
    stage_costs: Vec<Vec<Vec<f64>>>,
    /// `kernels[s][a]`: dense nominal distribution of the next state.
    kernels: Vec<Vec<DiscreteDistribution>>,
    radii: Vec<Vec<f64>>,
    cost: CostMatrix,
}

fn invalid(msg: String) -> ApplicationError {
    ApplicationError::InvalidParameter(msg)
}

impl RobustMdp {
    pub fn new(
        actions: Vec<usize>,
        horizon: usize,
        stage_costs: Vec<Vec<Vec<f64>>>,
        kernels: Vec<Vec<Vec<f64>>>,
        radii: Vec<Vec<f64>>,
        cost: CostMatrix,
    ) -> Result<Self> {
        let n = actions.len();
        if n == 0 {
            return Err(invalid("no states".into()));
        }
        if let Some(s) = actions.iter().position(|&a| a == 0) {
            return Err(invalid(format!("state {s} has no action")));
        }
        if cost.rows() != n || cost.cols() != n {
            return Err(invalid(format!("cost is {}x{}, expected {n}x{n}", cost.rows(), cost.cols())));
        }
        if stage_costs.len() != horizon {
            return Err(invalid(format!("{} stage cost tables for horizon {horizon}", stage_costs.len())));
        }
        for (t, table) in stage_costs.iter().enumerate() {
            check_shape(&actions, table, &format!("stage cost {}", t + 1))?;
            if let Some(v) = table.iter().flatten().find(|v| !v.is_finite()) {
                return Err(invalid(format!("stage cost {v} at stage {} is not finite", t + 1)));
            }
        }
        check_shape(&actions, &radii, "radii")?;
        if let Some(r) = radii.iter().flatten().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(invalid(format!("radius {r} must be finite and > 0")));
        }
        check_shape(&actions, &kernels, "kernels")?;
        let kernels = kernels
            .iter()
            .map(|row| {
                row.iter()
                    .map(|k| {
                        if k.len() != n {
                            return Err(invalid(format!("kernel has {} entries for {n} states", k.len())));
                        }
                        Ok(DiscreteDistribution::from_dense(k)?)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { actions, horizon, stage_costs, kernels, radii, cost })
    }

    pub fn states(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn radii(&self) -> &[Vec<f64>] {
        &self.radii
    }

    /// Same model with every radius multiplied by `factor > 0`.
    pub fn scale_radii(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(invalid(format!("scale {factor} must be finite and > 0")));
        }
        let radii = self.radii.iter().map(|row| row.iter().map(|r| r * factor).collect()).collect();
        Ok(Self { radii, ..self.clone() })
    }

    fn backup_problem(&self, s: usize, a: usize, next: &[f64]) -> Result<DroProblem> {
        let points = PointSet::labelled(self.states())?;
        Ok(DroProblem::from_square_cost(points, self.kernels[s][a].clone(), &self.cost, next.to_vec(), self.radii[s][a])?)
    }
}

fn check_shape<T>(actions: &[usize], table: &[Vec<T>], what: &str) -> Result<()> {
    if table.len() != actions.len() {
        return Err(invalid(format!("{what}: {} states, expected {}", table.len(), actions.len())));
    }
    for (s, (row, &a)) in table.iter().zip(actions).enumerate() {
        if row.len() != a {
            return Err(invalid(format!("{what}: state {s} has {} entries for {a} actions", row.len())));
        }
    }
    Ok(())
}

/// One robust Bellman backup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Backup {
    pub stage: usize,
    pub state: usize,
    pub action: usize,
    /// Worst-case expected continuation value from the dual.
    pub dual: f64,
    pub lambda_star: f64,
    /// Primal LP value, computed in verify mode.
    pub primal: Option<f64>,
}

impl Backup {
    pub fn gap(&self) -> Option<f64> {
        self.primal.map(|p| (p - self.dual).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MdpSolution {
    /// `V_1, ..., V_{T+1}`.
    pub values: Vec<Vec<f64>>,
    /// `policy[t - 1][s]`: minimizing action at stage `t`, lowest index on ties.
    pub policy: Vec<Vec<usize>>,
    pub backups: Vec<Backup>,
}

impl MdpSolution {
    /// Largest primal-dual gap over all backups (verify mode only).
    pub fn max_gap(&self) -> Option<f64> {
        self.backups.iter().filter_map(Backup::gap).reduce(f64::max)
    }
}

/// Backward recursion. With `verify`, every backup is also solved as a
/// primal LP.
pub fn dr_value_iteration(mdp: &RobustMdp, verify: bool) -> Result<MdpSolution> {
    let n = mdp.states();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..mdp.actions[s]).map(move |a| (s, a))).collect();
    let mut values = vec![vec![0.0; n]; mdp.horizon + 1];
    let mut policy = vec![vec![0; n]; mdp.horizon];
    let mut backups = Vec::with_capacity(pairs.len() * mdp.horizon);
    for t in (1..=mdp.horizon).rev() {
        let next = &values[t];
        let stage: Vec<Backup> = pairs
            .par_iter()
            .map(|&(s, a)| {
                let problem = mdp.backup_problem(s, a, next)?;
                let dual = dual_value(&problem);
                let primal = if verify { Some(primal_worst_case(&problem)?.value) } else { None };
                Ok(Backup { stage: t, state: s, action: a, dual: dual.value, lambda_star: dual.lambda_star, primal })
            })
            .collect::<Result<_>>()?;
        let mut current = vec![f64::INFINITY; n];
        for b in &stage {
            let q = mdp.stage_costs[t - 1][b.state][b.action] + b.dual;
            if q < current[b.state] {
                current[b.state] = q;
                policy[t - 1][b.state] = b.action;
            }
        }
        values[t - 1] = current;
        backups.extend(stage);
    }
    Ok(MdpSolution { values, policy, backups })
}

/// Value iteration with the nominal kernels, `V_1, ..., V_{T+1}`.
pub fn nominal_value_iteration(mdp: &RobustMdp) -> Vec<Vec<f64>> {
    let n = mdp.states();
    let mut values = vec![vec![0.0; n]; mdp.horizon + 1];
    for t in (1..=mdp.horizon).rev() {
        let current: Vec<f64> = (0..n)
            .map(|s| {
                (0..mdp.actions[s])
                    .map(|a| mdp.stage_costs[t - 1][s][a] + mdp.kernels[s][a].expect(&values[t]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        values[t - 1] = current;
    }
    values
}
