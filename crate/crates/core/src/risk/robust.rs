//! Worst-case risk over transport balls around a scalar nominal.
//!
//! The generic path minimizes over `alpha` by golden-section search on a
//! bracket known to contain every minimizer; the inner value for a fixed
//! `alpha` comes from the analytic suprema, from the exact dual on a finite
//! candidate grid, or from the maximum-cost ball on a finite grid.

use serde::Serialize;

use crate::dual::dual_value;
use crate::maxcost::linf_robust;
use crate::problem::{CostMatrix, DiscreteDistribution, DroProblem, PointSet, TransportOrder};
use crate::search::{golden_section, minimize_half_line};

use super::analytic::{analytic_ball_sup, analytic_inner_sup};
use super::{check_entropic, cvar, nominal_risk, Result, RiskError, RiskFamily, ScalarDistribution};

/// Risk at which a divergence witness sequence stops.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Relative width at which the `alpha` search stops.
const ALPHA_TOLERANCE: f64 = 1e-9;

/// Relative width at which the inner `lambda` search stops.
const LAMBDA_TOLERANCE: f64 = 1e-13;

/// Scalar nominal losses `b^T z_i` with the portfolio dual norm `|b|_*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioInstance {
    pub nominal: ScalarDistribution,
    pub dual_norm_b: f64,
    pub p: TransportOrder,
    pub rho: f64,
}

impl PortfolioInstance {
    pub fn new(nominal: ScalarDistribution, dual_norm_b: f64, p: TransportOrder, rho: f64) -> Result<Self> {
        if !(dual_norm_b >= 0.0) || !dual_norm_b.is_finite() {
            return Err(RiskError::InvalidParameter(format!("dual norm {dual_norm_b} must be finite and >= 0")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(RiskError::InvalidParameter(format!("radius {rho} must be finite and >= 0")));
        }
        Ok(Self { nominal, dual_norm_b, p, rho })
    }

    /// Radius of the equivalent ball for the scalar loss: `|b|_* * rho`.
    pub fn effective_radius(&self) -> f64 {
        self.dual_norm_b * self.rho
    }
}

/// How the inner supremum is evaluated for fixed `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskMode {
    /// Continuum suprema in closed form, cost `|x_hat - x|^p`.
    Analytic,
    /// Exact dual on the nominal atoms plus a uniform grid of spacing `h`
    /// over `[min - span, max + span]`.
    Grid { h: f64, span: f64 },
    /// Maximum-cost ball on the nominal atoms and their shifts by `+-rho`.
    Linf,
}

/// One member of a divergence witness sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    /// Mass moved (translation family) or `0` for grid widening.
    pub epsilon: f64,
    /// Translation distance, or the half-width added around the support.
    pub shift: f64,
    pub risk: f64,
}

/// Checkable evidence that the worst-case risk is `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub family: String,
    pub p: String,
    pub effective_radius: f64,
    /// `translation`: `P_eps = (1 - eps) P + eps * (P shifted by rho * eps^(-1/p))`,
    /// each inside the ball. `grid-widening`: worst-case value on ever wider
    /// candidate grids.
    pub method: String,
    pub witnesses: Vec<Witness>,
}

impl DivergenceCertificate {
    pub fn final_risk(&self) -> f64 {
        self.witnesses.last().map_or(f64::NAN, |w| w.risk)
    }
}

/// Result of a worst-case risk evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustRisk {
    pub value: f64,
    pub alpha_star: Option<f64>,
    pub lambda_star: Option<f64>,
}

/// Whether the worst-case risk is `+inf` for this family and order.
fn diverges(family: &RiskFamily, p: TransportOrder, effective_radius: f64) -> bool {
    if effective_radius == 0.0 {
        return false;
    }
    match (family, p) {
        (RiskFamily::Variance, TransportOrder::Finite(p)) => p < 2.0,
        (RiskFamily::Entropic { .. }, TransportOrder::Finite(_)) => true,
        _ => false,
    }
}

/// Closed-form worst-case risk for the combinations with a known formula.
/// Divergent combinations return `+inf`.
pub fn closed_form_robust_risk(instance: &PortfolioInstance, family: &RiskFamily) -> Result<f64> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    let p = instance.p;
    if diverges(family, p, w) {
        return Ok(f64::INFINITY);
    }
    Ok(match (*family, p) {
        (RiskFamily::Cvar { beta }, TransportOrder::Finite(p)) => cvar(d, beta) + (1.0 - beta).powf(-1.0 / p) * w,
        (RiskFamily::Cvar { beta }, TransportOrder::Infinity) => cvar(d, beta) + w,
        (RiskFamily::Variance, TransportOrder::Finite(p)) if p == 2.0 || w == 0.0 => {
            let s = d.variance().sqrt() + w;
            s * s
        }
        (RiskFamily::Variance, TransportOrder::Infinity) => spread_variance(d, w),
        (RiskFamily::Mad, _) => nominal_risk(d, family)?.value + w,
        (RiskFamily::Entropic { theta }, TransportOrder::Infinity) => {
            check_entropic(d, theta, 0.0)?;
            d.log_mgf(theta) / theta + w
        }
        (RiskFamily::Entropic { theta }, TransportOrder::Finite(_)) => {
            // Only reachable with a zero radius.
            check_entropic(d, theta, 0.0)?;
            d.log_mgf(theta) / theta
        }
        (RiskFamily::Variance, p) => {
            return Err(RiskError::UnsupportedCombination { family: family.name().into(), p: p.to_string() })
        }
    })
}

/// `min_alpha E[(|X - alpha| + w)^2]`, solved exactly: the objective is a
/// convex quadratic between consecutive atoms, so the minimum is at an atom
/// or at the stationary point of one of those pieces.
fn spread_variance(d: &ScalarDistribution, w: f64) -> f64 {
    let objective = |a: f64| d.expect(|x| {
        let r = (x - a).abs() + w;
        r * r
    });
    let mean = d.mean();
    let mut best = d.values().iter().map(|&a| objective(a)).fold(f64::INFINITY, f64::min);
    let mut below = 0.0;
    for k in 0..d.len() - 1 {
        below += d.weights()[k];
        // Derivative on (x_k, x_k+1): 2 (a - mean) + 2 w (P(X < a) - P(X > a)).
        let stationary = mean - w * (2.0 * below - 1.0);
        if stationary > d.values()[k] && stationary < d.values()[k + 1] {
            best = best.min(objective(stationary));
        }
    }
    best
}

/// Interval containing every minimizing `alpha`, widened so that a
/// minimizer never sits on its edge.
fn alpha_bracket(d: &ScalarDistribution, family: &RiskFamily, w: f64) -> (f64, f64) {
    let (lo, hi) = match *family {
        RiskFamily::Cvar { beta } => (d.lower_tail_mean(beta) - w / beta, d.upper_tail_mean(1.0 - beta) + w / (1.0 - beta)),
        RiskFamily::Mad => (d.lower_tail_mean(0.5) - 2.0 * w, d.upper_tail_mean(0.5) + 2.0 * w),
        RiskFamily::Variance | RiskFamily::Entropic { .. } => {
            let reach = d.max() - d.min() + w;
            (d.mean() - reach, d.mean() + reach)
        }
    };
    let margin = 1e-3 * (1.0 + hi - lo);
    (lo - margin, hi + margin)
}

/// Golden-section search over `alpha`; fails if the minimizer lands on the
/// bracket edge.
fn minimize_alpha(inner: impl FnMut(f64) -> f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let tol = |a: f64| ALPHA_TOLERANCE * (1.0 + a.abs());
    let m = golden_section(inner, lo, hi, tol, 2000);
    if m.x - lo <= 2.0 * tol(m.x) || hi - m.x <= 2.0 * tol(m.x) {
        return Err(RiskError::BracketTouched { alpha: m.x, lo, hi });
    }
    Ok((m.x, m.value))
}

/// Worst-case risk `inf_alpha sup_P E_P[f_alpha]` over the ball of radius
/// `|b|_* rho`, evaluated in the requested mode. Divergent combinations
/// return [`RiskError::DivergesToInfinity`] with a witness sequence.
pub fn robust_risk_generic(instance: &PortfolioInstance, family: &RiskFamily, mode: RiskMode) -> Result<RobustRisk> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    if let RiskFamily::Entropic { theta } = *family {
        if !diverges(family, instance.p, w) {
            check_entropic(d, theta, w)?;
        }
    }
    match mode {
        RiskMode::Analytic => {
            if diverges(family, instance.p, w) {
                return Err(RiskError::DivergesToInfinity(Box::new(translation_certificate(instance, family)?)));
            }
            analytic_mode(instance, family)
        }
        RiskMode::Grid { h, span } => {
            if !(h > 0.0) || !(span >= 0.0) {
                return Err(RiskError::InvalidParameter(format!("grid spacing {h} and span {span}")));
            }
            if diverges(family, instance.p, w) {
                return Err(RiskError::DivergesToInfinity(Box::new(widening_certificate(instance, family)?)));
            }
            let grid = uniform_grid(d, h, span);
            grid_mode(instance, family, &grid)
        }
        RiskMode::Linf => {
            if !matches!(instance.p, TransportOrder::Infinity) {
                return Err(RiskError::InvalidParameter("linf mode needs p = inf".into()));
            }
            linf_mode(instance, family)
        }
    }
}

fn analytic_mode(instance: &PortfolioInstance, family: &RiskFamily) -> Result<RobustRisk> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    let (lo, hi) = alpha_bracket(d, family, w);
    let p = match instance.p {
        TransportOrder::Infinity => {
            let (alpha, value) = minimize_alpha(|a| d.expect(|x| analytic_ball_sup(family, a, w, x)), lo, hi)?;
            return Ok(RobustRisk { value, alpha_star: Some(alpha), lambda_star: None });
        }
        TransportOrder::Finite(p) => p,
    };
    // Probe the combination once so unsupported pairs surface as errors.
    analytic_inner_sup(family, lo, 2.0, d.min(), instance.p)?;
    if w == 0.0 {
        let (alpha, value) = minimize_alpha(|a| d.expect(|x| family.eval(a, x)), lo, hi)?;
        return Ok(RobustRisk { value, alpha_star: Some(alpha), lambda_star: None });
    }
    let r = w.powf(p);
    // Below this multiplier the inner supremum is +inf.
    let floor = match *family {
        RiskFamily::Cvar { beta } if p == 1.0 => 1.0 / (1.0 - beta),
        RiskFamily::Mad if p == 1.0 => 1.0,
        RiskFamily::Variance => 1.0,
        _ => 0.0,
    };
    let penalized = |a: f64, lambda: f64| -> f64 {
        lambda * r + d.expect(|x| analytic_inner_sup(family, a, lambda, x, instance.p).unwrap_or(f64::INFINITY))
    };
    let inner = |a: f64| -> (f64, f64) {
        if p == 1.0 {
            // The supremum no longer depends on lambda past the floor.
            (floor, penalized(a, floor))
        } else {
            let m = minimize_half_line(|l| penalized(a, l), floor, 1.0, LAMBDA_TOLERANCE, 200);
            (m.x, m.value)
        }
    };
    let (alpha, value) = minimize_alpha(|a| inner(a).1, lo, hi)?;
    Ok(RobustRisk { value, alpha_star: Some(alpha), lambda_star: Some(inner(alpha).0) })
}

/// Nominal atoms plus `min - span, min - span + h, ..., max + span`.
fn uniform_grid(d: &ScalarDistribution, h: f64, span: f64) -> Vec<f64> {
    let (a, b) = (d.min() - span, d.max() + span);
    let steps = ((b - a) / h).round() as usize;
    let mut xs: Vec<f64> = (0..=steps).map(|k| a + k as f64 * h).collect();
    xs.extend_from_slice(d.values());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Scalar transport problem on `grid` with cost `|x_hat - x|^p` and loss
/// `loss`.
fn line_problem(d: &ScalarDistribution, grid: &[f64], p: f64, loss: Vec<f64>, radius: f64) -> Result<DroProblem> {
    let support: Vec<usize> = d.values().iter().map(|v| grid.iter().position(|g| g == v).expect("atoms are on the grid")).collect();
    let m = grid.len();
    let mut entries = Vec::with_capacity(support.len() * m);
    for &i in &support {
        let x = grid[i];
        entries.extend(grid.iter().map(|&g| {
            let dist = (x - g).abs();
            if p == 1.0 {
                dist
            } else {
                dist.powf(p)
            }
        }));
    }
    let cost = CostMatrix::from_flat(support.len(), m, entries, support.clone())?;
    let nominal = DiscreteDistribution::new(support, d.weights().to_vec())?;
    Ok(DroProblem::new(PointSet::labelled(m)?, nominal, cost, loss, radius)?)
}

fn grid_mode(instance: &PortfolioInstance, family: &RiskFamily, grid: &[f64]) -> Result<RobustRisk> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    let p = match instance.p {
        TransportOrder::Finite(p) => p,
        TransportOrder::Infinity => return linf_on_grid(instance, family, grid),
    };
    let base = line_problem(d, grid, p, vec![0.0; grid.len()], w.powf(p))?;
    if let RiskFamily::Entropic { theta } = *family {
        // Ent is a monotone transform of E[exp(theta X)]; shift before
        // exponentiating so the largest loss is exp(0).
        let top = grid[grid.len() - 1];
        let loss = grid.iter().map(|&x| (theta * (x - top)).exp()).collect();
        let r = dual_value(&base.with_loss(loss)?);
        return Ok(RobustRisk { value: top + r.value.ln() / theta, alpha_star: None, lambda_star: Some(r.lambda_star) });
    }
    let evaluate = |a: f64| -> Result<(f64, f64)> {
        let loss = grid.iter().map(|&x| family.eval(a, x)).collect();
        let r = dual_value(&base.with_loss(loss)?);
        Ok((r.value, r.lambda_star))
    };
    let (lo, hi) = alpha_bracket(d, family, w);
    let (alpha, value) = minimize_alpha(|a| evaluate(a).map_or(f64::INFINITY, |r| r.0), lo, hi)?;
    Ok(RobustRisk { value, alpha_star: Some(alpha), lambda_star: Some(evaluate(alpha)?.1) })
}

/// `x_hat + offset`, nudged toward `x_hat` until `|x - x_hat| <= |offset|`
/// holds in floating point.
fn shifted(xhat: f64, offset: f64) -> f64 {
    let mut x = xhat + offset;
    while (x - xhat).abs() > offset.abs() {
        x = if offset > 0.0 { x.next_down() } else { x.next_up() };
    }
    x
}

fn linf_mode(instance: &PortfolioInstance, family: &RiskFamily) -> Result<RobustRisk> {
    let w = instance.effective_radius();
    let mut grid: Vec<f64> = instance.nominal.values().to_vec();
    for &x in instance.nominal.values() {
        grid.push(shifted(x, w));
        grid.push(shifted(x, -w));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    linf_on_grid(instance, family, &grid)
}

fn linf_on_grid(instance: &PortfolioInstance, family: &RiskFamily, grid: &[f64]) -> Result<RobustRisk> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    let base = line_problem(d, grid, 1.0, vec![0.0; grid.len()], w)?;
    let (lo, hi) = alpha_bracket(d, family, w);
    let evaluate = |a: f64| -> f64 {
        let loss = grid.iter().map(|&x| family.eval(a, x)).collect();
        base.with_loss(loss).map_or(f64::INFINITY, |p| linf_robust(&p).value)
    };
    let (alpha, value) = minimize_alpha(evaluate, lo, hi)?;
    Ok(RobustRisk { value, alpha_star: Some(alpha), lambda_star: None })
}

/// Witnesses `P_eps = (1 - eps) P + eps * (P shifted by M)`,
/// `M = w * eps^(-1/p)`, whose transport cost is exactly `w^p`. Stops once
/// the risk exceeds [`DIVERGENCE_THRESHOLD`].
fn translation_certificate(instance: &PortfolioInstance, family: &RiskFamily) -> Result<DivergenceCertificate> {
    let w = instance.effective_radius();
    let d = &instance.nominal;
    let TransportOrder::Finite(p) = instance.p else {
        return Err(RiskError::Inconclusive("translation witnesses need finite p".into()));
    };
    let mut witnesses = Vec::new();
    for k in 1..=320 {
        let eps = 10f64.powi(-k);
        let shift = w * eps.powf(-1.0 / p);
        let risk = match *family {
            RiskFamily::Variance => d.variance() + eps * (1.0 - eps) * shift * shift,
            RiskFamily::Entropic { theta } => {
                let ts = theta * shift;
                // log(1 + eps (e^ts - 1)), kept finite for large ts.
                let bump = if ts < 700.0 { (eps * ts.exp_m1()).ln_1p() } else { ts + eps.ln() + ((1.0 - eps) * (-ts).exp() / eps).ln_1p() };
                d.log_mgf(theta) / theta + bump / theta
            }
            _ => return Err(RiskError::Inconclusive(format!("{family} has a finite worst case"))),
        };
        witnesses.push(Witness { epsilon: eps, shift, risk });
        if risk > DIVERGENCE_THRESHOLD {
            return Ok(DivergenceCertificate {
                family: family.name().into(),
                p: instance.p.to_string(),
                effective_radius: w,
                method: "translation".into(),
                witnesses,
            });
        }
    }
    Err(RiskError::Inconclusive("translation witnesses stayed below the threshold".into()))
}

/// Worst-case value on the candidate set `atoms U {min - S, max + S}` for
/// `S = 3 * 2^k`, until it exceeds [`DIVERGENCE_THRESHOLD`].
fn widening_certificate(instance: &PortfolioInstance, family: &RiskFamily) -> Result<DivergenceCertificate> {
    let d = &instance.nominal;
    let mut witnesses = Vec::new();
    let mut span = 3.0;
    for _ in 0..80 {
        let mut grid = d.values().to_vec();
        grid.push(d.min() - span);
        grid.push(d.max() + span);
        let r = grid_mode(instance, family, &grid)?;
        witnesses.push(Witness { epsilon: 0.0, shift: span, risk: r.value });
        if r.value > DIVERGENCE_THRESHOLD {
            return Ok(DivergenceCertificate {
                family: family.name().into(),
                p: instance.p.to_string(),
                effective_radius: instance.effective_radius(),
                method: "grid-widening".into(),
                witnesses,
            });
        }
        span *= 2.0;
    }
    Err(RiskError::Inconclusive("grid values stayed below the threshold".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin(p: TransportOrder, rho: f64) -> PortfolioInstance {
        PortfolioInstance::new(ScalarDistribution::uniform(vec![0.0, 1.0]).unwrap(), 1.0, p, rho).unwrap()
    }

    const P1: TransportOrder = TransportOrder::Finite(1.0);
    const P2: TransportOrder = TransportOrder::Finite(2.0);

    #[test]
    fn closed_form_hand_values() {
        let cvar = RiskFamily::cvar(0.5).unwrap();
        let v = closed_form_robust_risk(&coin(P2, 0.1), &cvar).unwrap();
        assert!((v - (1.0 + 0.1 * 2f64.sqrt())).abs() < 1e-15);
        let v = closed_form_robust_risk(&coin(P2, 0.1), &RiskFamily::Variance).unwrap();
        assert!((v - 0.36).abs() < 1e-15);
        let ent = RiskFamily::entropic(1.0).unwrap();
        let v = closed_form_robust_risk(&coin(TransportOrder::Infinity, 0.2), &ent).unwrap();
        assert!((v - (((1.0 + 1f64.exp()) / 2.0).ln() + 0.2)).abs() < 1e-15);
        assert_eq!(closed_form_robust_risk(&coin(P1, 0.1), &RiskFamily::Variance).unwrap(), f64::INFINITY);
        assert!((closed_form_robust_risk(&coin(P1, 0.3), &RiskFamily::Mad).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn analytic_matches_hand_values() {
        let cvar = RiskFamily::cvar(0.5).unwrap();
        let r = robust_risk_generic(&coin(P1, 0.1), &cvar, RiskMode::Analytic).unwrap();
        assert!((r.value - 1.2).abs() < 1e-12, "{}", r.value);
        let r = robust_risk_generic(&coin(P1, 0.3), &RiskFamily::Mad, RiskMode::Analytic).unwrap();
        assert!((r.value - 0.8).abs() < 1e-12);
        let r = robust_risk_generic(&coin(P2, 0.1), &RiskFamily::Variance, RiskMode::Analytic).unwrap();
        assert!((r.value - 0.36).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn divergence_is_certified() {
        match robust_risk_generic(&coin(P1, 0.1), &RiskFamily::Variance, RiskMode::Analytic) {
            Err(RiskError::DivergesToInfinity(c)) => {
                assert!(c.final_risk() > DIVERGENCE_THRESHOLD);
                assert_eq!(c.method, "translation");
            }
            other => panic!("{other:?}"),
        }
        let ent = RiskFamily::entropic(1.0).unwrap();
        match robust_risk_generic(&coin(P2, 0.1), &ent, RiskMode::Grid { h: 0.01, span: 3.0 }) {
            Err(RiskError::DivergesToInfinity(c)) => {
                assert!(c.final_risk() > DIVERGENCE_THRESHOLD);
                assert!(c.witnesses.windows(2).all(|w| w[1].risk >= w[0].risk));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linf_mode_shifts_the_tail() {
        let cvar = RiskFamily::cvar(0.5).unwrap();
        let r = robust_risk_generic(&coin(TransportOrder::Infinity, 0.1), &cvar, RiskMode::Linf).unwrap();
        assert!((r.value - 1.1).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn shifted_points_stay_in_the_ball() {
        for (x, w) in [(0.1, 0.2), (-1.7, 0.3), (1e-3, 0.05)] {
            for off in [w, -w] {
                let s = shifted(x, off);
                assert!((s - x).abs() <= w);
            }
        }
    }
}
