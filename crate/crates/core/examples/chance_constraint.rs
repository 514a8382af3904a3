//! Robust chance constraint for the safe half-line `x < 1`.

use wdro::{chance_feasible, chance_linf, chance_robust_value, ChanceInstance, SafeSet, TransportOrder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let safe = SafeSet::HalfLine { upper: 1.0 };
    let samples = [-0.5, 0.0, 0.5, 0.8];
    let distances = samples.iter().map(|x| safe.distance_to_complement(&[*x])).collect::<Result<Vec<_>, _>>()?;
    let weights = vec![0.25; samples.len()];

    for rho in [0.05, 0.1, 0.2] {
        let inst = ChanceInstance::new(weights.clone(), distances.clone(), TransportOrder::Finite(1.0), rho, 0.3)?;
        println!("rho {rho:<5} violation {:.12}  feasible {}", chance_robust_value(&inst)?, chance_feasible(&inst)?);
    }
    let linf = ChanceInstance::new(weights, distances, TransportOrder::Infinity, 0.25, 0.3)?;
    let r = chance_linf(&linf)?;
    println!("max-cost ball: violation {:.12}  feasible {}  threshold {}", r.value, r.feasible, r.threshold);
    Ok(())
}
