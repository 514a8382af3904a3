//! Continuum suprema of `f_alpha(x)` around a nominal point `x_hat` on the
//! real line, either penalized by `lambda * |x_hat - x|^p` or constrained to
//! `|x_hat - x| <= rho`.

use crate::problem::TransportOrder;

use super::{Result, RiskError, RiskFamily};

fn unsupported(family: &RiskFamily, p: TransportOrder) -> RiskError {
    RiskError::UnsupportedCombination { family: family.name().to_string(), p: p.to_string() }
}

/// `(p - 1) * (p * s)^(-p / (p - 1))`: the value of `sup_t t / s - t^p`
/// is this constant times `lambda^(-1 / (p - 1))` after scaling.
fn growth_constant(p: f64, s: f64) -> f64 {
    (p - 1.0) * (p * s).powf(-p / (p - 1.0))
}

/// `sup_{x in R} f_alpha(x) - lambda * |x_hat - x|^p` for finite `p`.
///
/// Returns `+inf` where the supremum diverges. Entropic losses (any finite
/// `p`) and variance with `p != 2` are rejected; `p = inf` has its own
/// function, [`analytic_ball_sup`].
pub fn analytic_inner_sup(family: &RiskFamily, alpha: f64, lambda: f64, xhat: f64, p: TransportOrder) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(RiskError::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
    }
    let TransportOrder::Finite(p) = p else {
        return Err(unsupported(family, p));
    };
    let order = TransportOrder::Finite(p);
    Ok(match *family {
        RiskFamily::Cvar { beta } => {
            let slope = 1.0 / (1.0 - beta);
            if p == 1.0 {
                if lambda >= slope {
                    alpha + slope * (xhat - alpha).max(0.0)
                } else {
                    f64::INFINITY
                }
            } else if lambda == 0.0 {
                f64::INFINITY
            } else {
                let reach = growth_constant(p, 1.0 - beta) * lambda.powf(-1.0 / (p - 1.0));
                alpha + (slope * (xhat - alpha) + reach).max(0.0)
            }
        }
        RiskFamily::Variance => {
            if p != 2.0 {
                return Err(unsupported(family, order));
            }
            if lambda > 1.0 {
                lambda / (lambda - 1.0) * (xhat - alpha) * (xhat - alpha)
            } else if lambda == 1.0 && xhat == alpha {
                0.0
            } else {
                f64::INFINITY
            }
        }
        RiskFamily::Mad => {
            if p == 1.0 {
                if lambda >= 1.0 {
                    (xhat - alpha).abs()
                } else {
                    f64::INFINITY
                }
            } else if lambda == 0.0 {
                f64::INFINITY
            } else {
                (xhat - alpha).abs() + growth_constant(p, 1.0) * lambda.powf(-1.0 / (p - 1.0))
            }
        }
        RiskFamily::Entropic { .. } => return Err(unsupported(family, order)),
    })
}

/// `sup { f_alpha(x) : |x_hat - x| <= rho }`.
pub fn analytic_ball_sup(family: &RiskFamily, alpha: f64, rho: f64, xhat: f64) -> f64 {
    match *family {
        RiskFamily::Cvar { beta } => alpha + (xhat + rho - alpha).max(0.0) / (1.0 - beta),
        RiskFamily::Variance => {
            let r = (xhat - alpha).abs() + rho;
            r * r
        }
        RiskFamily::Mad => (xhat - alpha).abs() + rho,
        RiskFamily::Entropic { theta } => alpha + (theta * (xhat + rho - alpha)).exp_m1() / theta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: TransportOrder = TransportOrder::Finite(1.0);
    const P2: TransportOrder = TransportOrder::Finite(2.0);

    #[test]
    fn hand_values() {
        let cvar = RiskFamily::cvar(0.5).unwrap();
        assert_eq!(analytic_inner_sup(&cvar, 1.0, 2.0, 1.0, P1).unwrap(), 1.0);
        assert_eq!(analytic_inner_sup(&cvar, 1.0, 1.9, 1.0, P1).unwrap(), f64::INFINITY);
        assert_eq!(analytic_inner_sup(&RiskFamily::Variance, 0.0, 2.0, 1.0, P2).unwrap(), 2.0);
        assert_eq!(analytic_inner_sup(&RiskFamily::Variance, 1.0, 1.0, 1.0, P2).unwrap(), 0.0);
        assert_eq!(analytic_inner_sup(&RiskFamily::Variance, 0.0, 1.0, 1.0, P2).unwrap(), f64::INFINITY);
        assert_eq!(analytic_inner_sup(&RiskFamily::Mad, 0.0, 0.5, 0.3, P1).unwrap(), f64::INFINITY);
        assert_eq!(analytic_inner_sup(&RiskFamily::Mad, 0.0, 1.0, 0.3, P1).unwrap(), 0.3);
    }

    #[test]
    fn unsupported_pairs() {
        let ent = RiskFamily::entropic(1.0).unwrap();
        assert!(matches!(analytic_inner_sup(&ent, 0.0, 1.0, 0.0, P2), Err(RiskError::UnsupportedCombination { .. })));
        let p3 = TransportOrder::Finite(3.0);
        assert!(analytic_inner_sup(&RiskFamily::Variance, 0.0, 2.0, 0.0, p3).is_err());
        assert!(analytic_inner_sup(&RiskFamily::Mad, 0.0, 2.0, 0.0, TransportOrder::Infinity).is_err());
    }

    /// Brute-force supremum over a fine grid around `xhat`.
    fn grid_sup(f: impl Fn(f64) -> f64, xhat: f64) -> f64 {
        (-400_000..=400_000).map(|k| f(xhat + k as f64 * 1e-5)).fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn finite_sups_match_grid_search() {
        let cases = [
            (RiskFamily::cvar(0.3).unwrap(), 3.0),
            (RiskFamily::cvar(0.8).unwrap(), 2.0),
            (RiskFamily::Mad, 2.0),
            (RiskFamily::Mad, 1.5),
        ];
        for (fam, p) in cases {
            for (alpha, lambda, xhat) in [(0.2, 3.0, 0.5), (1.0, 7.0, -0.4), (0.0, 12.0, 0.0)] {
                let exact = analytic_inner_sup(&fam, alpha, lambda, xhat, TransportOrder::Finite(p)).unwrap();
                let brute = grid_sup(|x| fam.eval(alpha, x) - lambda * (xhat - x).abs().powf(p), xhat);
                assert!(exact >= brute - 1e-12 && exact - brute < 1e-6, "{fam} p={p}: {exact} vs {brute}");
            }
        }
        let brute = grid_sup(|x| (x - 0.1) * (x - 0.1) - 3.0 * (0.7 - x) * (0.7 - x), 0.7);
        let exact = analytic_inner_sup(&RiskFamily::Variance, 0.1, 3.0, 0.7, P2).unwrap();
        assert!((exact - brute).abs() < 1e-6);
    }

    #[test]
    fn ball_sups_match_grid_search() {
        for fam in [RiskFamily::cvar(0.6).unwrap(), RiskFamily::Variance, RiskFamily::Mad, RiskFamily::entropic(2.0).unwrap()] {
            let (alpha, rho, xhat) = (0.3, 0.25, 0.1);
            let brute = (0..=10_000).map(|k| fam.eval(alpha, xhat - rho + 2.0 * rho * k as f64 / 10_000.0)).fold(f64::NEG_INFINITY, f64::max);
            assert!((analytic_ball_sup(&fam, alpha, rho, xhat) - brute).abs() < 1e-12, "{fam}");
        }
    }
}
