//! Two-layer ambiguity: an intermediate distribution within `theta` of the
//! nominal in cost `c_tilde`, and the final distribution within `rho` of
//! the intermediate one in cost `c`. The dual
//!
//! ```text
//! min_{lambda, mu >= 0} lambda rho + mu theta
//!     + E[ max_{x_tilde, x} f(x) - lambda c(x_tilde, x) - mu c_tilde(x_hat, x_tilde) ]
//! ```
//!
//! is jointly convex and piecewise linear. For fixed `mu` the minimum over
//! `lambda` equals a one-budget transport LP, which also yields a
//! subgradient in `mu`; the outer problem is solved by cutting planes, exact
//! for piecewise-linear functions.

use serde::Serialize;

use crate::dual::{dual_value, minimize_with_radius};
use crate::envelope::{Line, PlConvexFunction};
use crate::problem::{CostMatrix, DroProblem};
use crate::transport::budget::{self, Item};

use super::{ApplicationError, Result};

/// Relative gap between a cut and the function at which the outer search stops.
const CUT_TOLERANCE: f64 = 1e-13;

/// Relative slack of the triangle inequality in metric detection.
const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalizedInstance {
    /// Nominal, loss and radius `rho`; its cost rows are `c_tilde` from the
    /// nominal atoms to the intermediate points.
    base: DroProblem,
    /// `c` between candidate points (`m x m`, zero diagonal).
    inner_cost: CostMatrix,
    theta: f64,
}

impl GlobalizedInstance {
    pub fn new(base: DroProblem, inner_cost: CostMatrix, theta: f64) -> Result<Self> {
        let m = base.m();
        if inner_cost.rows() != m || inner_cost.cols() != m {
            return Err(ApplicationError::InvalidParameter(format!(
                "inner cost is {}x{}, expected {m}x{m}",
                inner_cost.rows(),
                inner_cost.cols()
            )));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(ApplicationError::InvalidParameter(format!("budget theta = {theta} must be finite and >= 0")));
        }
        Ok(Self { base, inner_cost, theta })
    }

    pub fn base(&self) -> &DroProblem {
        &self.base
    }

    pub fn inner_cost(&self) -> &CostMatrix {
        &self.inner_cost
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> f64 {
        self.base.radius()
    }

    pub fn with_radii(&self, rho: f64, theta: f64) -> Result<Self> {
        Self::new(self.base.with_radius(rho)?, self.inner_cost.clone(), theta)
    }

    /// `c = c_tilde = d` for a metric `d`: the inner cost is symmetric, has
    /// a zero diagonal, satisfies the triangle inequality, and its nominal
    /// rows are the outer cost.
    pub fn has_shared_metric(&self) -> bool {
        let d = &self.inner_cost;
        let m = d.rows();
        let outer = self.base.cost();
        for (i, &s) in self.base.nominal().support().iter().enumerate() {
            if outer.row(i) != d.row(s) {
                return false;
            }
        }
        for i in 0..m {
            if d.get(i, i) != 0.0 {
                return false;
            }
            for j in 0..m {
                if d.get(i, j) != d.get(j, i) {
                    return false;
                }
                for k in 0..m {
                    let via = d.get(i, k) + d.get(k, j);
                    if d.get(i, j) > via * (1.0 + TRIANGLE_SLACK) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Items `(x_tilde, x)` of nominal row `i` for the budget LP at `mu`:
    /// cost `c(x_tilde, x)`, reward `f(x) - mu c_tilde(x_hat_i, x_tilde)`.
    fn row_items(&self, i: usize, mu: f64) -> Vec<Item> {
        let m = self.base.m();
        let loss = self.base.loss().values();
        let outer = self.base.cost().row(i);
        let mut items = Vec::new();
        for (k, &ct) in outer.iter().enumerate() {
            if !ct.is_finite() {
                continue;
            }
            for (j, &c) in self.inner_cost.row(k).iter().enumerate() {
                if c.is_finite() {
                    items.push(Item { id: k * m + j, cost: c, reward: loss[j] - mu * ct });
                }
            }
        }
        items
    }

    /// `mu theta + min_lambda (lambda rho + E[...])` and a subgradient in `mu`.
    fn outer(&self, mu: f64) -> (f64, f64) {
        let m = self.base.m();
        let rows: Vec<Vec<Item>> = (0..self.base.n()).map(|i| self.row_items(i, mu)).collect();
        let weights = self.base.nominal().weights();
        let sol = budget::solve(weights, &rows, self.rho());
        let mut outer_spent = 0.0;
        for (i, used) in sol.rows.iter().enumerate() {
            for &(id, frac) in used {
                outer_spent += weights[i] * frac * self.base.cost().get(i, id / m);
            }
        }
        (mu * self.theta + sol.value, self.theta - outer_spent)
    }

    /// `lambda -> E[max_{x_tilde, x} f(x) - mu c_tilde - lambda c]`.
    fn envelope_at(&self, mu: f64) -> PlConvexFunction {
        let rows: Vec<PlConvexFunction> = (0..self.base.n())
            .map(|i| {
                let lines: Vec<Line> = self.row_items(i, mu).iter().map(|it| Line::new(it.reward, -it.cost)).collect();
                PlConvexFunction::upper_envelope(&lines)
            })
            .collect();
        let terms: Vec<(f64, &PlConvexFunction)> = self.base.nominal().weights().iter().copied().zip(&rows).collect();
        PlConvexFunction::weighted_sum(&terms)
    }

    /// Multiplier on `c_tilde` beyond which only zero-cost intermediate
    /// points are worth using.
    fn mu_saturation(&self) -> f64 {
        match self.base.cost().min_positive_finite() {
            Some(c) => (self.base.loss().max() - self.base.loss().min()) / c,
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalizedResult {
    pub value: f64,
    pub lambda_star: f64,
    pub mu_star: f64,
    /// Set when the shared-metric shortcut was used.
    pub shared_metric: bool,
}

/// Worst-case expected loss over the two-layer ambiguity set.
pub fn globalized_value(instance: &GlobalizedInstance) -> Result<GlobalizedResult> {
    if instance.has_shared_metric() {
        // max over x_tilde collapses to f(x) - min(lambda, mu) d(x_hat, x).
        let r = dual_value(&instance.base.with_radius(instance.rho() + instance.theta)?);
        return Ok(GlobalizedResult { value: r.value, lambda_star: r.lambda_star, mu_star: r.lambda_star, shared_metric: true });
    }
    globalized_value_generic(instance)
}

/// Generic two-multiplier solution, without the shared-metric shortcut.
pub fn globalized_value_generic(instance: &GlobalizedInstance) -> Result<GlobalizedResult> {
    let mu_star = minimize_outer(instance);
    let inner = minimize_with_radius(&instance.envelope_at(mu_star), instance.rho());
    Ok(GlobalizedResult {
        value: mu_star * instance.theta + inner.value,
        lambda_star: inner.lambda_star,
        mu_star,
        shared_metric: false,
    })
}

/// Smallest minimizer of the convex piecewise-linear outer function.
fn minimize_outer(instance: &GlobalizedInstance) -> f64 {
    let found = cutting_plane(instance);
    smallest_minimizer(instance, found)
}

/// Newton steps from `0` towards the level of `found`. Tangents of a convex
/// function stay below it, so the iterates increase to the left end of the
/// flat minimizing segment.
fn smallest_minimizer(instance: &GlobalizedInstance, found: f64) -> f64 {
    let level = instance.outer(found).0;
    let tol = CUT_TOLERANCE * (1.0 + level.abs());
    let mut mu = 0.0;
    for _ in 0..1_000 {
        let (f, g) = instance.outer(mu);
        if f <= level + tol || !(g < 0.0) {
            return mu;
        }
        let next = mu + (level - f) / g;
        if !(next > mu) || next >= found {
            return found;
        }
        mu = next;
    }
    found
}

/// Cutting planes: the two bracketing cuts are intersected, and the new
/// point replaces the end whose subgradient has its sign.
fn cutting_plane(instance: &GlobalizedInstance) -> f64 {
    let (mut a, (mut fa, mut ga)) = (0.0, instance.outer(0.0));
    if ga >= 0.0 {
        return 0.0;
    }
    let top = 2.0 * instance.mu_saturation() + 1.0;
    let (mut b, (mut fb, mut gb)) = (top, instance.outer(top));
    if gb <= 0.0 {
        return b;
    }
    for _ in 0..10_000 {
        let x = (fb - fa + ga * a - gb * b) / (ga - gb);
        if !(x > a && x < b) {
            break;
        }
        let cut = fa + ga * (x - a);
        let (fx, gx) = instance.outer(x);
        if fx - cut <= CUT_TOLERANCE * (1.0 + fx.abs()) || gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            (a, fa, ga) = (x, fx, gx);
        } else {
            (b, fb, gb) = (x, fx, gx);
        }
    }
    if fa <= fb {
        a
    } else {
        b
    }
}

/// `E[max_{x_tilde, x} f(x) - lambda c(x_tilde, x) - mu c_tilde(x_hat, x_tilde)]`
/// over pairs with finite costs.
pub fn globalized_soft(instance: &GlobalizedInstance, lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda >= 0.0 && mu >= 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return Err(ApplicationError::InvalidParameter(format!("multipliers ({lambda}, {mu}) must be finite and >= 0")));
    }
    let weights = instance.base.nominal().weights();
    Ok((0..instance.base.n())
        .map(|i| {
            let best = instance.row_items(i, mu).iter().map(|it| it.reward - lambda * it.cost).fold(f64::NEG_INFINITY, f64::max);
            weights[i] * best
        })
        .sum())
}
