mod common;

use proptest::prelude::*;
use wdro::fuzz::{instance_rng, random_problem, FuzzConfig};
use wdro::*;

fn indicator_problem(problem: &DroProblem) -> DroProblem {
    let cost = problem.cost();
    let entries = cost.entries().iter().map(|&c| if c <= problem.radius() { 0.0 } else { f64::INFINITY }).collect();
    let indicator = CostMatrix::from_flat(cost.rows(), cost.cols(), entries, cost.diagonal_map().to_vec()).unwrap();
    DroProblem::new(problem.points().clone(), problem.nominal().clone(), indicator, problem.loss().values().to_vec(), 0.0).unwrap()
}

#[test]
fn linf_matches_simplex_on_indicator_cost() {
    let config = FuzzConfig { max_atoms: 6, max_points: 9, ..FuzzConfig::default() };
    for k in 0..150 {
        let problem = random_problem(&mut instance_rng(41, k), &config).unwrap();
        let fast = linf_robust(&problem).value;
        let oracle = common::primal_lp(&indicator_problem(&problem));
        assert!((fast - oracle).abs() < 1e-12, "instance {k}: {fast} vs {oracle}");
        assert!((linf_primal_oracle(&problem).unwrap() - fast).abs() <= 1e-15 * (1.0 + fast.abs()));
    }
}

#[test]
fn strict_ball_excludes_the_boundary() {
    let p = DroProblem::from_metric(
        PointSet::on_line(&[0.0, 1.0]).unwrap(),
        &MetricSpec::Euclidean,
        1.0,
        DiscreteDistribution::dirac(0),
        vec![0.0, 1.0],
        1.0,
    )
    .unwrap();
    assert_eq!(linf_robust(&p).value, 1.0);
    assert_eq!(linf_robust_strict(&p).unwrap().value, 0.0);
    assert!(linf_robust_strict(&p.with_radius(0.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The maximum-cost ball sits inside every `W_p` ball of the same radius.
    #[test]
    fn linf_is_below_every_finite_order(seed in 0u64..10_000, p in 1.0f64..6.0) {
        let problem = random_problem(&mut instance_rng(seed, 0), &FuzzConfig::default()).unwrap();
        let rho = problem.radius();
        let wp = DroProblem::new(
            problem.points().clone(),
            problem.nominal().clone(),
            problem.cost().powf(p),
            problem.loss().values().to_vec(),
            rho.powf(p),
        )
        .unwrap();
        prop_assert!(linf_robust(&problem).value <= dual_value(&wp).value + 1e-12);
    }

    #[test]
    fn soft_dominates_every_radius(seed in 0u64..10_000, lambda in 0.0f64..10.0, t in 0.0f64..1.5) {
        let problem = random_problem(&mut instance_rng(seed, 1), &FuzzConfig::default()).unwrap();
        let rho = t * problem.cost().max_finite();
        let soft = linf_soft(&problem, lambda).unwrap();
        prop_assert!(soft >= linf_robust(&problem.with_radius(rho).unwrap()).value - lambda * rho - 1e-12);
        prop_assert!(soft >= problem.nominal_expectation() - 1e-12);
    }

    #[test]
    fn strict_never_exceeds_closed(seed in 0u64..10_000) {
        let problem = random_problem(&mut instance_rng(seed, 2), &FuzzConfig::default()).unwrap();
        if problem.radius() > 0.0 {
            prop_assert!(linf_robust_strict(&problem).unwrap().value <= linf_robust(&problem).value);
        }
    }
}
