//! Robust inventory-style MDP on five states, nominal against robust.

use wdro::{dr_value_iteration, nominal_value_iteration, CostMatrix, RobustMdp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = 5;
    // Action 0 drifts down, action 1 drifts up at a unit price.
    let drift = |state: usize, up: bool| {
        let mut k = vec![0.0; s];
        let next = if up { (state + 1).min(s - 1) } else { state.saturating_sub(1) };
        k[next] += 0.8;
        k[state] += 0.2;
        k
    };
    let kernels = (0..s).map(|x| vec![drift(x, false), drift(x, true)]).collect();
    let stage = (0..s).map(|x| vec![(s - 1 - x) as f64 * 0.5, (s - 1 - x) as f64 * 0.5 + 1.0]).collect::<Vec<_>>();
    let cost = CostMatrix::square((0..s).map(|i| (0..s).map(|j| (i as f64 - j as f64).abs()).collect()).collect())?;
    let horizon = 4;
    let mdp = RobustMdp::new(vec![2; s], horizon, vec![stage; horizon], kernels, vec![vec![0.3, 0.3]; s], cost)?;

    let nominal = nominal_value_iteration(&mdp);
    let robust = dr_value_iteration(&mdp, true)?;
    println!("nominal V_1 {:?}", nominal[0]);
    println!("robust  V_1 {:?}", robust.values[0]);
    println!("policy at stage 1 {:?}", robust.policy[0]);
    println!("largest primal-dual gap {:.3e}", robust.max_gap().unwrap_or(0.0));
    Ok(())
}
