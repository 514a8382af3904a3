//! Reformulations built on the transport and dual engines: chance
//! constraints, globalized balls and finite-horizon robust MDPs.

pub mod chance;
pub mod globalized;
pub mod mdp;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::risk::RiskError;

pub use chance::{chance_feasible, chance_linf, chance_robust_value, ChanceInstance, LinfChance, SafeSet};
pub use globalized::{globalized_soft, globalized_value, globalized_value_generic, GlobalizedInstance, GlobalizedResult};
pub use mdp::{dr_value_iteration, nominal_value_iteration, Backup, MdpSolution, RobustMdp};

#[derive(Debug, Error)]
pub enum ApplicationError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("order p = {0} is not supported here")]
    UnsupportedOrder(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

pub type Result<T> = std::result::Result<T, ApplicationError>;
