//! Worst-case risk of a scalar portfolio loss, closed forms against the
//! generic modes, and a divergence certificate.

use wdro::{
    closed_form_robust_risk, robust_risk_generic, PortfolioInstance, RiskError, RiskFamily, RiskMode, ScalarDistribution,
    TransportOrder,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nominal = ScalarDistribution::new(vec![-0.4, 0.1, 0.7], vec![0.3, 0.5, 0.2])?;
    let families = [RiskFamily::cvar(0.8)?, RiskFamily::Mad, RiskFamily::Variance];
    for family in &families {
        let inst = PortfolioInstance::new(nominal.clone(), 1.0, TransportOrder::Finite(2.0), 0.1)?;
        let closed = closed_form_robust_risk(&inst, family)?;
        let analytic = robust_risk_generic(&inst, family, RiskMode::Analytic)?;
        println!("{:<14} closed {closed:.9}  analytic {:.9}", family.to_string(), analytic.value);
    }

    let inst = PortfolioInstance::new(nominal, 1.0, TransportOrder::Finite(2.0), 0.1)?;
    match robust_risk_generic(&inst, &RiskFamily::entropic(1.0)?, RiskMode::Analytic) {
        Err(RiskError::DivergesToInfinity(cert)) => {
            println!("entropic diverges: {} witnesses, last risk {:.3e}", cert.witnesses.len(), cert.final_risk())
        }
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
