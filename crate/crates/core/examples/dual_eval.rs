//! Worst-case expected loss on a three-point line, by the dual and by the
//! coupling LP, plus the robust curve.

use wdro::{dual_value, primal_worst_case, robust_curve, DiscreteDistribution, DroProblem, MetricSpec, PointSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = PointSet::on_line(&[0.0, 0.5, 2.0])?;
    let nominal = DiscreteDistribution::new(vec![0, 1], vec![0.6, 0.4])?;
    let problem = DroProblem::from_metric(points, &MetricSpec::Euclidean, 2.0, nominal, vec![0.0, 0.3, 1.0], 0.25)?;

    let dual = dual_value(&problem);
    let primal = primal_worst_case(&problem)?;
    println!("dual   {:.12}  lambda* {:.12}", dual.value, dual.lambda_star);
    println!("primal {:.12}  transport cost {:.12}", primal.value, primal.transport_cost);

    for (rho, value) in robust_curve(&problem, &[0.05, 0.25, 1.0, 4.0])? {
        println!("L({rho}) = {value:.12}");
    }
    Ok(())
}
