//! Risk measures written as `inf_alpha E[f_alpha(X)]` and their worst cases
//! over transport balls on the real line.
//!
//! CVaR at level `beta` is the mean of the worst `1 - beta` tail:
//! `f_alpha(x) = alpha + (x - alpha)_+ / (1 - beta)`. The variant averaging
//! the worst `beta` tail is [`cvar_beta_tail`].

pub mod analytic;
pub mod robust;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::problem::{ProblemError, WEIGHT_SUM_TOLERANCE};

pub use analytic::{analytic_ball_sup, analytic_inner_sup};
pub use robust::{
    closed_form_robust_risk, robust_risk_generic, DivergenceCertificate, PortfolioInstance, RiskMode, RobustRisk, Witness,
};

/// `theta * max|x|` above which `exp` is considered unsafe.
pub const ENTROPIC_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("entropic exponent theta * max|x| = {exponent} exceeds {limit}; rescale the losses or lower theta")]
    OverflowEntropic { exponent: f64, limit: f64 },
    #[error("{family} with p = {p} has no analytic form")]
    UnsupportedCombination { family: String, p: String },
    #[error("worst-case {} risk is +inf (p = {})", .0.family, .0.p)]
    DivergesToInfinity(Box<DivergenceCertificate>),
    #[error("alpha search ended at {alpha}, on the edge of [{lo}, {hi}]")]
    BracketTouched { alpha: f64, lo: f64, hi: f64 },
    #[error("no divergence certificate: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub type Result<T, E = RiskError> = std::result::Result<T, E>;

/// Family `f_alpha` whose infimum over `alpha` defines the risk measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RiskFamily {
    Cvar { beta: f64 },
    Variance,
    Mad,
    Entropic { theta: f64 },
}

impl RiskFamily {
    pub fn cvar(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta < 1.0 {
            Ok(RiskFamily::Cvar { beta })
        } else {
            Err(RiskError::InvalidParameter(format!("beta = {beta} must lie in (0, 1)")))
        }
    }

    pub fn entropic(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta.is_finite() {
            Ok(RiskFamily::Entropic { theta })
        } else {
            Err(RiskError::InvalidParameter(format!("theta = {theta} must be positive")))
        }
    }

    /// `f_alpha(x)`.
    pub fn eval(&self, alpha: f64, x: f64) -> f64 {
        match *self {
            RiskFamily::Cvar { beta } => alpha + (x - alpha).max(0.0) / (1.0 - beta),
            RiskFamily::Variance => (x - alpha) * (x - alpha),
            RiskFamily::Mad => (x - alpha).abs(),
            RiskFamily::Entropic { theta } => alpha + (theta * (x - alpha)).exp_m1() / theta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RiskFamily::Cvar { .. } => "cvar",
            RiskFamily::Variance => "variance",
            RiskFamily::Mad => "mad",
            RiskFamily::Entropic { .. } => "entropic",
        }
    }
}

impl fmt::Display for RiskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskFamily::Cvar { beta } => write!(f, "cvar(beta={beta})"),
            RiskFamily::Entropic { theta } => write!(f, "entropic(theta={theta})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Finite distribution of a real-valued loss, atoms sorted ascending with
/// duplicates merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarDistribution {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl ScalarDistribution {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() || values.is_empty() {
            return Err(ProblemError::ShapeMismatch(format!("{} values and {} weights", values.len(), weights.len())).into());
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(RiskError::InvalidParameter(format!("loss value {bad} is not finite")));
        }
        for (index, &weight) in weights.iter().enumerate() {
            if !(weight >= 0.0) || !weight.is_finite() {
                return Err(ProblemError::NegativeWeight { index, weight }.into());
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ProblemError::WeightsNotNormalized { sum }.into());
        }
        let mut atoms: Vec<(f64, f64)> = values.into_iter().zip(weights).filter(|&(_, w)| w > 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        let (values, weights) = merged.into_iter().map(|(v, w)| (v, w / sum)).unzip();
        Ok(Self { values, weights })
    }

    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(&v, &w)| w * f(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    /// Mean of the largest `mass` of the distribution, `0 < mass <= 1`.
    pub fn upper_tail_mean(&self, mass: f64) -> f64 {
        let mut remaining = mass;
        let mut acc = 0.0;
        for (&v, &w) in self.values.iter().zip(&self.weights).rev() {
            let take = w.min(remaining);
            acc += take * v;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        acc / mass
    }

    /// Mean of the smallest `mass` of the distribution, `0 < mass <= 1`.
    pub fn lower_tail_mean(&self, mass: f64) -> f64 {
        let mut remaining = mass;
        let mut acc = 0.0;
        for (&v, &w) in self.values.iter().zip(&self.weights) {
            let take = w.min(remaining);
            acc += take * v;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        acc / mass
    }

    /// Largest atom `x` with `P(X >= x) >= mass`.
    pub fn upper_quantile(&self, mass: f64) -> f64 {
        let mut tail = 0.0;
        for (&v, &w) in self.values.iter().zip(&self.weights).rev() {
            tail += w;
            if tail >= mass - 1e-12 {
                return v;
            }
        }
        self.min()
    }

    /// Smallest atom `x` with `P(X <= x) >= 1/2`.
    pub fn lower_median(&self) -> f64 {
        let mut cdf = 0.0;
        for (&v, &w) in self.values.iter().zip(&self.weights) {
            cdf += w;
            if cdf >= 0.5 - 1e-12 {
                return v;
            }
        }
        self.max()
    }

    /// `log E[exp(theta X)]` without overflow in the shift.
    pub fn log_mgf(&self, theta: f64) -> f64 {
        let top = self.values.iter().map(|&v| theta * v).fold(f64::NEG_INFINITY, f64::max);
        top + self.expect(|x| (theta * x - top).exp()).ln()
    }
}

/// Risk value and a minimizing `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NominalRisk {
    pub value: f64,
    pub alpha_star: f64,
}

fn check_entropic(dist: &ScalarDistribution, theta: f64, shift: f64) -> Result<()> {
    let exponent = theta * (dist.min().abs().max(dist.max().abs()) + shift);
    if exponent > ENTROPIC_EXPONENT_LIMIT {
        return Err(RiskError::OverflowEntropic { exponent, limit: ENTROPIC_EXPONENT_LIMIT });
    }
    Ok(())
}

/// `inf_alpha E[f_alpha(X)]` in closed form.
///
/// The reported minimizer is the largest atom with upper tail mass at least
/// `1 - beta` for CVaR, the mean for variance, the lower median for MAD and
/// `log E[exp(theta X)] / theta` for the entropic risk.
pub fn nominal_risk(dist: &ScalarDistribution, family: &RiskFamily) -> Result<NominalRisk> {
    Ok(match *family {
        RiskFamily::Cvar { beta } => NominalRisk { value: cvar(dist, beta), alpha_star: dist.upper_quantile(1.0 - beta) },
        RiskFamily::Variance => NominalRisk { value: dist.variance(), alpha_star: dist.mean() },
        RiskFamily::Mad => {
            let med = dist.lower_median();
            NominalRisk { value: dist.expect(|x| (x - med).abs()), alpha_star: med }
        }
        RiskFamily::Entropic { theta } => {
            check_entropic(dist, theta, 0.0)?;
            let a = dist.log_mgf(theta) / theta;
            NominalRisk { value: a, alpha_star: a }
        }
    })
}

/// Mean of the worst `1 - beta` tail.
pub fn cvar(dist: &ScalarDistribution, beta: f64) -> f64 {
    dist.upper_tail_mean(1.0 - beta)
}

/// Mean of the worst `beta` tail, i.e. `min_alpha alpha + E[(X - alpha)_+] / beta`.
pub fn cvar_beta_tail(dist: &ScalarDistribution, beta: f64) -> f64 {
    dist.upper_tail_mean(beta)
}
