//! Primal and dual values on seeded random instances.

use wdro::fuzz::{instance_rng, random_problem, FuzzConfig};
use wdro::{dual_value, primal_worst_case};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = FuzzConfig::default();
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let problem = random_problem(&mut instance_rng(7, k), &config)?;
        let primal = primal_worst_case(&problem)?.value;
        let dual = dual_value(&problem).value;
        worst = worst.max((primal - dual).abs() / primal.abs().max(1.0));
    }
    println!("200 instances, worst relative gap {worst:.3e}");
    Ok(())
}
