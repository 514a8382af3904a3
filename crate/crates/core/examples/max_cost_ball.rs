//! Maximum-transport-cost balls: closed, strict and penalized.

use wdro::{linf_robust, linf_robust_strict, linf_soft, DiscreteDistribution, DroProblem, MetricSpec, PointSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = PointSet::on_line(&[0.0, 1.0, 2.5])?;
    let nominal = DiscreteDistribution::new(vec![0, 1], vec![0.5, 0.5])?;
    let problem = DroProblem::from_metric(points, &MetricSpec::Euclidean, 1.0, nominal, vec![0.0, 0.4, 1.0], 1.5)?;

    let closed = linf_robust(&problem);
    println!("closed ball  {:.12}  argmax {:?}", closed.value, closed.per_row_argmax);
    println!("strict ball  {:.12}", linf_robust_strict(&problem)?.value);
    for lambda in [0.0, 0.2, 1.0] {
        println!("soft({lambda}) = {:.12}", linf_soft(&problem, lambda)?);
    }
    Ok(())
}
