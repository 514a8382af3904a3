//! Worst-case violation probability of a safe set `S`:
//!
//! ```text
//! sup { P(S^c) : W_p(P_hat, P) <= rho } = min_{lambda >= 0} lambda rho^p + E[(1 - lambda d^p)_+]
//! ```
//!
//! where `d` is the distance of each nominal atom to `S^c`. Only these
//! distances enter, so instances carry them precomputed.

use serde::Serialize;

use crate::dual::minimize_with_radius;
use crate::envelope::{Line, PlConvexFunction};
use crate::problem::{DiscreteDistribution, TransportOrder};
use crate::risk::{cvar_beta_tail, ScalarDistribution};

use super::{ApplicationError, Result};

/// Nominal atoms reduced to their masses and distances to the unsafe set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChanceInstance {
    weights: Vec<f64>,
    distances: Vec<f64>,
    p: TransportOrder,
    rho: f64,
    beta: f64,
}

impl ChanceInstance {
    pub fn new(weights: Vec<f64>, distances: Vec<f64>, p: TransportOrder, rho: f64, beta: f64) -> Result<Self> {
        let n = weights.len();
        if distances.len() != n {
            return Err(ApplicationError::InvalidParameter(format!("{} distances for {n} atoms", distances.len())));
        }
        // Validates the weights; zero-mass atoms are kept so indices stay aligned.
        DiscreteDistribution::new((0..n).collect(), weights.clone())?;
        if let Some(d) = distances.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(ApplicationError::InvalidParameter(format!("distance {d} must be finite and >= 0")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(ApplicationError::InvalidParameter(format!("radius {rho} must be finite and >= 0")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(ApplicationError::InvalidParameter(format!("beta = {beta} must lie in (0, 1)")));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self { weights, distances, p, rho, beta })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn p(&self) -> TransportOrder {
        self.p
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.weights.clone(), self.distances.clone(), self.p, rho, self.beta)
    }

    fn finite_order(&self) -> Result<f64> {
        match self.p {
            TransportOrder::Finite(p) => Ok(p),
            TransportOrder::Infinity => Err(ApplicationError::UnsupportedOrder("inf".into())),
        }
    }

    /// `d_i^p` per atom.
    fn powered(&self, p: f64) -> Vec<f64> {
        self.distances.iter().map(|d| if p == 1.0 { *d } else { d.powf(p) }).collect()
    }

    /// Radius from which no distribution in the ball can be kept safe:
    /// `E[d^p]^(1/p)` for finite `p`, the smallest distance for `p = inf`.
    pub fn infeasibility_threshold(&self) -> f64 {
        match self.p {
            TransportOrder::Finite(p) => {
                let mean: f64 = self.weights.iter().zip(self.powered(p)).map(|(w, d)| w * d).sum();
                mean.powf(1.0 / p)
            }
            TransportOrder::Infinity => self
                .weights
                .iter()
                .zip(&self.distances)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, d)| *d)
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Worst-case probability of leaving the safe set, finite `p`. The
/// objective is convex piecewise linear in `lambda` with breakpoints at
/// `d_i^(-p)`, minimized exactly.
pub fn chance_robust_value(instance: &ChanceInstance) -> Result<f64> {
    let p = instance.finite_order()?;
    let rows: Vec<PlConvexFunction> = instance
        .powered(p)
        .into_iter()
        .map(|d| PlConvexFunction::upper_envelope(&[Line::new(1.0, -d), Line::new(0.0, 0.0)]))
        .collect();
    let terms: Vec<(f64, &PlConvexFunction)> = instance.weights.iter().copied().zip(&rows).collect();
    let g = PlConvexFunction::weighted_sum(&terms);
    Ok(minimize_with_radius(&g, instance.rho.powf(p)).value)
}

/// Whether `inf_P P(S) >= 1 - beta` over the ball, via the tail condition
/// `rho^p <= -beta CVaR_beta(-d^p)` with `CVaR_beta` the mean of the worst
/// `beta` tail. At `rho = 0` the condition is vacuous and the robust value
/// is compared instead.
pub fn chance_feasible(instance: &ChanceInstance) -> Result<bool> {
    let p = instance.finite_order()?;
    if instance.rho == 0.0 {
        return Ok(chance_robust_value(instance)? <= instance.beta);
    }
    let negated: Vec<f64> = instance.powered(p).iter().map(|d| -d).collect();
    let dist = ScalarDistribution::new(negated, instance.weights.clone())?;
    Ok(instance.rho.powf(p) <= -instance.beta * cvar_beta_tail(&dist, instance.beta))
}

/// Chance constraint over a maximum-cost ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinfChance {
    /// Nominal mass within distance `rho` of the unsafe set.
    pub value: f64,
    pub feasible: bool,
    /// Smallest distance of a nominal atom to the unsafe set.
    pub threshold: f64,
}

/// `p = inf`: every atom within `rho` of `S^c` can be moved into it.
pub fn chance_linf(instance: &ChanceInstance) -> Result<LinfChance> {
    if !instance.p.is_infinite() {
        return Err(ApplicationError::UnsupportedOrder(instance.p.to_string()));
    }
    let value: f64 = instance.weights.iter().zip(&instance.distances).filter(|(_, d)| **d <= instance.rho).map(|(w, _)| w).sum();
    Ok(LinfChance { value, feasible: value <= instance.beta, threshold: instance.infeasibility_threshold() })
}

/// Safe sets with a closed-form Euclidean distance to their complement.
#[derive(Debug, Clone, PartialEq)]
pub enum SafeSet {
    /// `{x in R : x < upper}`.
    HalfLine { upper: f64 },
    /// Open box `prod_k (lower_k, upper_k)`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl SafeSet {
    /// Distance from `x` to the complement; zero outside the set.
    pub fn distance_to_complement(&self, x: &[f64]) -> Result<f64> {
        match self {
            SafeSet::HalfLine { upper } => match x {
                [v] => Ok((upper - v).max(0.0)),
                _ => Err(ApplicationError::InvalidParameter(format!("half-line point needs 1 coordinate, got {}", x.len()))),
            },
            SafeSet::Box { lower, upper } => {
                if x.len() != lower.len() || x.len() != upper.len() {
                    return Err(ApplicationError::InvalidParameter("box and point dimensions differ".into()));
                }
                Ok(x.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (lo, hi))| (v - lo).min(hi - v))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand(rho: f64, beta: f64) -> ChanceInstance {
        ChanceInstance::new(vec![1.0 / 3.0; 3], vec![1.5, 0.5, 0.0], TransportOrder::Finite(1.0), rho, beta).unwrap()
    }

    #[test]
    fn hand_instance() {
        assert!((chance_robust_value(&hand(0.1, 0.6)).unwrap() - 8.0 / 15.0).abs() < 1e-12);
        assert!(chance_feasible(&hand(0.1, 0.6)).unwrap());
        assert!(!chance_feasible(&hand(0.1, 0.5)).unwrap());
    }

    #[test]
    fn all_unsafe_is_certain() {
        let c = ChanceInstance::new(vec![0.5, 0.5], vec![0.0, 0.0], TransportOrder::Finite(2.0), 0.7, 0.5).unwrap();
        assert_eq!(chance_robust_value(&c).unwrap(), 1.0);
    }

    #[test]
    fn linf_counts_reachable_mass() {
        let at = |rho| {
            let c = ChanceInstance::new(vec![1.0 / 3.0; 3], vec![1.5, 0.5, 0.0], TransportOrder::Infinity, rho, 0.5).unwrap();
            chance_linf(&c).unwrap()
        };
        assert!((at(0.4).value - 1.0 / 3.0).abs() < 1e-15);
        assert!((at(0.5).value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(at(0.5).threshold, 0.0);
    }

    #[test]
    fn safe_set_distances() {
        let h = SafeSet::HalfLine { upper: 2.0 };
        assert_eq!(h.distance_to_complement(&[0.5]).unwrap(), 1.5);
        assert_eq!(h.distance_to_complement(&[3.0]).unwrap(), 0.0);
        let b = SafeSet::Box { lower: vec![0.0, 0.0], upper: vec![1.0, 4.0] };
        assert_eq!(b.distance_to_complement(&[0.5, 1.0]).unwrap(), 0.5);
        assert_eq!(b.distance_to_complement(&[2.0, 1.0]).unwrap(), 0.0);
    }
}
