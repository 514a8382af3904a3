//! Wasserstein distributionally robust optimization on discrete instances.
//!
//! Worst-case expected losses are computed twice: by linear programming over
//! couplings ([`transport`]) and by the one-dimensional dual in the transport
//! multiplier ([`dual`]). The remaining modules build on the two engines:
//! maximum-transport-cost balls ([`maxcost`]), risk measures ([`risk`]),
//! chance constraints, globalized counterparts and robust MDPs
//! ([`applications`]).

pub mod applications;
pub mod cli;
pub mod dual;
pub mod envelope;
pub mod fuzz;
pub mod io;
pub mod maxcost;
pub mod problem;
pub mod risk;
pub mod search;
pub mod transport;

pub use applications::{
    chance_feasible, chance_linf, chance_robust_value, dr_value_iteration, globalized_soft, globalized_value,
    nominal_value_iteration, ApplicationError, ChanceInstance, GlobalizedInstance, RobustMdp, SafeSet,
};
pub use dual::{dual_value, envelope_g, robust_curve, row_envelope, DualResult};
pub use envelope::{Line, PlConvexFunction};
pub use maxcost::{linf_primal_oracle, linf_robust, linf_robust_strict, linf_soft, MaxCostResult};
pub use problem::{
    cost_from_metric, validate_problem, CostMatrix, DiscreteDistribution, DroProblem, LossVector, MetricSpec, PointSet,
    ProblemError, RawProblem, TransportOrder,
};
pub use risk::{
    closed_form_robust_risk, cvar, cvar_beta_tail, nominal_risk, robust_risk_generic, DivergenceCertificate,
    PortfolioInstance, RiskError, RiskFamily, RiskMode, RobustRisk, ScalarDistribution,
};
pub use transport::{kantorovich_cost, max_transport_cost, primal_soft, primal_worst_case, Coupling, PrimalResult, TransportPlan};
