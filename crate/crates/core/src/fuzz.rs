//! Seeded random instances for self-tests.
//!
//! Instance `k` of a run with seed `s` is drawn from its own ChaCha stream,
//! so results do not depend on evaluation order or thread count.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dual::dual_value;
use crate::problem::{CostMatrix, DiscreteDistribution, DroProblem, PointSet, Result};
use crate::transport::primal_worst_case;

/// Shape of random problem instances.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzConfig {
    pub max_atoms: usize,
    pub max_points: usize,
    pub dim: usize,
    /// Probability that an off-diagonal cost is replaced by `+inf`.
    pub forbidden_fraction: f64,
    pub orders: Vec<f64>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self { max_atoms: 20, max_points: 30, dim: 2, forbidden_fraction: 0.1, orders: vec![1.0, 2.0] }
    }
}

/// RNG for instance `index` of the run seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Probability vector with entries bounded away from zero.
pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// Random points in the unit cube, metric `|.|_2^p`, a random fraction of
/// forbidden transports, losses uniform in `[-1, 1]` and a radius uniform in
/// `(0, max finite cost)`.
pub fn random_problem(rng: &mut impl Rng, config: &FuzzConfig) -> Result<DroProblem> {
    let m = rng.gen_range(2..=config.max_points);
    let n = rng.gen_range(1..=config.max_atoms.min(m));
    let p = config.orders[rng.gen_range(0..config.orders.len())];
    let coords: Vec<Vec<f64>> = (0..m).map(|_| (0..config.dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut entries = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                entries[i][j] = if rng.gen::<f64>() < config.forbidden_fraction {
                    f64::INFINITY
                } else {
                    let d: f64 = coords[i].iter().zip(&coords[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    d.powf(p)
                };
            }
        }
    }
    let square = CostMatrix::square(entries)?;
    let support: Vec<usize> = sample(rng, m, n).into_vec();
    let nominal = DiscreteDistribution::new(support, random_weights(rng, n))?;
    let loss: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let rows = square.select_rows(nominal.support())?;
    let top = rows.max_finite();
    let radius = if top > 0.0 { top * rng.gen_range(f64::EPSILON..1.0) } else { 0.5 };
    DroProblem::from_square_cost(PointSet::from_coords(coords)?, nominal, &square, loss, radius)
}

/// Primal and dual values of one random instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzRecord {
    pub index: u64,
    pub atoms: usize,
    pub points: usize,
    pub radius: f64,
    pub primal: f64,
    pub dual: f64,
    pub lambda_star: f64,
    pub gap: f64,
}

/// Solves `count` random instances in parallel; records come back in index
/// order.
pub fn fuzz_compare(count: u64, seed: u64, config: &FuzzConfig) -> Result<Vec<FuzzRecord>> {
    (0..count)
        .into_par_iter()
        .map(|index| {
            let problem = random_problem(&mut instance_rng(seed, index), config)?;
            let primal = primal_worst_case(&problem)?.value;
            let dual = dual_value(&problem);
            Ok(FuzzRecord {
                index,
                atoms: problem.n(),
                points: problem.m(),
                radius: problem.radius(),
                primal,
                dual: dual.value,
                lambda_star: dual.lambda_star,
                gap: (primal - dual.value).abs(),
            })
        })
        .collect()
}
