//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;
use wdro::applications::globalized_value_generic;
use wdro::fuzz::{fuzz_compare, instance_rng, random_problem, FuzzConfig};
use wdro::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const SEED: u64 = 20_240_601;

fn fuzz_instances(count: u64) -> Vec<DroProblem> {
    let config = FuzzConfig::default();
    (0..count).map(|k| random_problem(&mut instance_rng(SEED, k), &config).unwrap()).collect()
}

/// Strong duality on 500 random instances, within 30 s.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let records = fuzz_compare(500, SEED, &FuzzConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let worst = records.iter().map(|r| r.gap / (1.0 + r.primal.abs())).fold(0.0, f64::max);
    let failures = records.iter().filter(|r| r.gap > 1e-7 * (1.0 + r.primal.abs())).count();
    check(
        failures == 0 && elapsed <= 30.0,
        format!("500 instances, {failures} over tolerance, worst relative gap {worst:.2e}, {elapsed:.2} s"),
    )
}

/// Soft duality at fixed multipliers.
fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for problem in fuzz_instances(500) {
        let g = envelope_g(&problem);
        for lambda in [0.0, 0.1, 1.0, 10.0, problem.saturation_lambda()] {
            let primal = primal_soft(&problem, lambda).map_err(|e| e.to_string())?.value;
            worst = worst.max((primal - g.eval(lambda)).abs());
        }
    }
    check(worst <= 1e-9, format!("2500 evaluations, worst gap {worst:.2e}"))
}

/// Shape of `L` and `G`.
fn criterion_3() -> Outcome {
    let tol = 1e-9;
    let mut violations = 0;
    for problem in fuzz_instances(200) {
        let mean = problem.nominal_expectation();
        let top = problem.cost().max_finite().max(1e-3);
        let rhos: Vec<f64> = (1..=20).map(|k| top * k as f64 / 20.0).collect();
        let curve: Vec<f64> = robust_curve(&problem, &rhos).unwrap().into_iter().map(|(_, v)| v).collect();
        for k in 0..20 {
            violations += usize::from(curve[k] < mean - tol);
            if k + 1 < 20 {
                violations += usize::from(curve[k + 1] < curve[k] - tol);
            }
            if k + 2 < 20 {
                violations += usize::from(curve[k + 1] < 0.5 * (curve[k] + curve[k + 2]) - tol);
            }
        }
        let g = envelope_g(&problem);
        let sat = problem.saturation_lambda();
        let lambdas: Vec<f64> = (0..20).map(|k| 1.5 * sat.max(1e-3) * k as f64 / 19.0).collect();
        let values: Vec<f64> = lambdas.iter().map(|&l| g.eval(l)).collect();
        for k in 0..20 {
            violations += usize::from(values[k] < mean - tol);
            if lambdas[k] >= sat {
                violations += usize::from((values[k] - mean).abs() > tol);
            }
            if k + 1 < 20 {
                violations += usize::from(values[k + 1] > values[k] + tol);
            }
            if k + 2 < 20 {
                violations += usize::from(values[k + 1] > 0.5 * (values[k] + values[k + 2]) + tol);
            }
        }
    }
    check(violations == 0, format!("200 instances, {violations} violations"))
}

/// Discontinuity of `L` at zero under refinement.
fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    for eps in [0.1, 0.01, 0.001] {
        let points = PointSet::on_line(&[0.0, eps, 1.0]).unwrap();
        let base =
            DroProblem::from_metric(points, &MetricSpec::Euclidean, 1.0, DiscreteDistribution::dirac(0), vec![0.0, 1.0, 1.0], 0.0)
                .unwrap();
        let at_zero = primal_worst_case(&base).unwrap().value;
        worst = worst.max(at_zero.abs());
        for rho in [eps / 2.0, eps, 2.0 * eps, 1.0] {
            let p = base.with_radius(rho).unwrap();
            let expected = (rho / eps).min(1.0);
            worst = worst.max((primal_worst_case(&p).unwrap().value - expected).abs());
            worst = worst.max((dual_value(&p).value - expected).abs());
        }
    }
    check(worst <= 1e-15, format!("12 radii and L(0) = 0, worst deviation {worst:.2e}"))
}

/// Maximum-cost balls.
fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for problem in fuzz_instances(200) {
        let fast = linf_robust(&problem).value;
        let oracle = linf_primal_oracle(&problem).map_err(|e| e.to_string())?;
        worst = worst.max((fast - oracle).abs());
    }
    let two = DroProblem::from_metric(
        PointSet::on_line(&[0.0, 1.0]).unwrap(),
        &MetricSpec::Euclidean,
        1.0,
        DiscreteDistribution::dirac(0),
        vec![0.0, 1.0],
        1.0,
    )
    .unwrap();
    let loose = linf_robust(&two).value;
    let strict = linf_robust_strict(&two).map_err(|e| e.to_string())?.value;
    check(
        worst <= 1e-12 && loose == 1.0 && strict == 0.0,
        format!("200 instances, worst gap {worst:.2e}; two-point at rho = 1: strict {strict}, non-strict {loose}"),
    )
}

/// Worst-case risk: analytic against closed form, certificates, grid mode.
fn criterion_6() -> Outcome {
    let mut rng = common::rng(SEED + 6);
    let (mut worst_rel, mut certificates, mut grid_excess): (f64, usize, f64) = (0.0, 0, f64::NEG_INFINITY);
    let mut failures = Vec::new();
    let inf = TransportOrder::Infinity;
    let p = TransportOrder::Finite;
    for k in 0..50 {
        let nominal = common::random_scalar(&mut rng, 12);
        let beta = rng.gen_range(0.05..0.95);
        let theta = rng.gen_range(0.2..2.0);
        // The continuum worst case shifts the upper tail by |b| rho / (1 - beta);
        // beta <= 0.75 keeps that shift (at most 2.4) inside the +-3 grid.
        let beta_grid = rng.gen_range(0.05..0.75);
        let cvar_grid = RiskFamily::cvar(beta_grid).unwrap();
        let cvar = RiskFamily::cvar(beta).unwrap();
        let ent = RiskFamily::entropic(theta).unwrap();
        let matched = [
            (cvar, p(1.0)),
            (cvar, p(2.0)),
            (cvar, inf),
            (RiskFamily::Mad, p(1.0)),
            (RiskFamily::Mad, inf),
            (RiskFamily::Variance, p(2.0)),
            (RiskFamily::Variance, inf),
            (ent, inf),
        ];
        for b in [0.5, 1.0, 2.0] {
            for rho in [0.05, 0.3] {
                for (family, order) in matched {
                    let inst = PortfolioInstance::new(nominal.clone(), b, order, rho).unwrap();
                    let closed = closed_form_robust_risk(&inst, &family).unwrap();
                    match robust_risk_generic(&inst, &family, RiskMode::Analytic) {
                        Ok(r) => {
                            let rel = (r.value - closed).abs() / closed.abs().max(1e-300);
                            worst_rel = worst_rel.max(rel);
                            if rel > 1e-7 {
                                failures.push(format!("#{k} {family} p={order}: {} vs {closed}", r.value));
                            }
                        }
                        Err(e) => failures.push(format!("#{k} {family} p={order}: {e}")),
                    }
                }
                for (family, order) in [(RiskFamily::Variance, p(1.0)), (ent, p(1.0)), (ent, p(2.0))] {
                    let inst = PortfolioInstance::new(nominal.clone(), b, order, rho).unwrap();
                    match robust_risk_generic(&inst, &family, RiskMode::Analytic) {
                        Err(RiskError::DivergesToInfinity(c)) if c.final_risk() > 1e12 => certificates += 1,
                        other => failures.push(format!("#{k} {family} p={order}: no certificate ({other:?})")),
                    }
                }
                let inst = PortfolioInstance::new(nominal.clone(), b, p(1.0), rho).unwrap();
                let closed = closed_form_robust_risk(&inst, &cvar_grid).unwrap();
                let h = 0.01;
                match robust_risk_generic(&inst, &cvar_grid, RiskMode::Grid { h, span: 3.0 }) {
                    Ok(r) => {
                        let excess = (r.value - closed).abs() - h / (1.0 - beta_grid);
                        grid_excess = grid_excess.max(excess);
                        if excess > 0.0 {
                            failures.push(format!("#{k} grid cvar: {} vs {closed}", r.value));
                        }
                    }
                    Err(e) => failures.push(format!("#{k} grid cvar: {e}")),
                }
            }
        }
    }
    let detail = format!(
        "2400 analytic checks, worst relative error {worst_rel:.2e}; {certificates}/900 certificates; grid slack used {:.2e}",
        grid_excess
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first failure: {}", failures[0]))
    }
}

/// Chance constraints.
fn criterion_7() -> Outcome {
    let mut rng = common::rng(SEED + 7);
    let (mut disagreements, mut threshold_failures) = (0, 0);
    for k in 0..200 {
        let p = if k % 2 == 0 { 1.0 } else { 2.0 };
        let inst = common::random_chance(&mut rng, 20, p);
        let value = chance_robust_value(&inst).unwrap();
        let feasible = chance_feasible(&inst).unwrap();
        if (value - inst.beta()).abs() > 1e-9 && feasible != (value <= inst.beta()) {
            disagreements += 1;
        }
        for factor in [1.0, 1.5] {
            let past = inst.with_rho(factor * inst.infeasibility_threshold()).unwrap();
            if chance_feasible(&past).unwrap() || chance_robust_value(&past).unwrap() <= past.beta() {
                threshold_failures += 1;
            }
        }
    }
    let hand = ChanceInstance::new(vec![1.0 / 3.0; 3], vec![1.5, 0.5, 0.0], TransportOrder::Finite(1.0), 0.1, 0.6).unwrap();
    let hand_err = (chance_robust_value(&hand).unwrap() - 8.0 / 15.0).abs();
    check(
        disagreements == 0 && threshold_failures == 0 && hand_err <= 1e-12,
        format!("200 instances, {disagreements} disagreements, {threshold_failures} threshold failures; hand instance error {hand_err:.2e}"),
    )
}

/// Globalized balls.
fn criterion_8() -> Outcome {
    let mut rng = common::rng(SEED + 8);
    let mut worst_shared: f64 = 0.0;
    for _ in 0..100 {
        let g = common::random_shared_globalized(&mut rng, 12);
        let reference = dual_value(&g.base().with_radius(g.rho() + g.theta()).unwrap()).value;
        let fast = globalized_value(&g).unwrap();
        let generic = globalized_value_generic(&g).unwrap();
        if !fast.shared_metric {
            return Err("shared metric not detected".into());
        }
        worst_shared = worst_shared.max((fast.value - reference).abs()).max((generic.value - reference).abs());
    }
    let mut worst_grid: f64 = 0.0;
    for _ in 0..20 {
        let g = common::random_generic_globalized(&mut rng, 6);
        let value = globalized_value(&g).unwrap().value;
        let grid = common::globalized_grid(&g, 25.0, 25.0, 1e-4);
        worst_grid = worst_grid.max((value - grid).abs());
    }
    check(
        worst_shared <= 1e-9 && worst_grid <= 1e-3,
        format!("100 shared-metric instances, worst gap {worst_shared:.2e}; 20 generic instances, worst grid gap {worst_grid:.2e}"),
    )
}

/// Robust MDPs.
fn criterion_9() -> Outcome {
    let mut rng = common::rng(SEED + 9);
    let (mut worst_gap, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let mdp = common::random_mdp(&mut rng, 0.2);
        let sol = dr_value_iteration(&mdp, true).unwrap();
        worst_gap = worst_gap.max(sol.max_gap().unwrap_or(0.0));
        let nominal = nominal_value_iteration(&mdp);
        for rho in [1e-2, 1e-4, 1e-6, 1e-9] {
            let scaled = mdp.scale_radii(rho / 0.2).unwrap();
            let v = dr_value_iteration(&scaled, false).unwrap().values;
            let err = v.iter().flatten().zip(nominal.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst_ratio = worst_ratio.max(err / rho);
        }
    }
    check(
        worst_gap <= 1e-7 && worst_ratio <= 10.0,
        format!("20 MDPs, worst backup gap {worst_gap:.2e}, worst error / rho {worst_ratio:.3}"),
    )
}

fn wdro(args: &[&str], threads: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wdro"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .env("DRO_LOG", "quiet")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn without_timings(report: &str) -> String {
    let mut v: Value = serde_json::from_str(report).unwrap();
    v.as_object_mut().unwrap().remove("timings_ms");
    serde_json::to_string(&v).unwrap()
}

/// CLI determinism and exit codes.
fn criterion_10() -> Outcome {
    let args = ["compare", "--fuzz", "100", "--seed", "7"];
    let (c1, a) = wdro(&args, "1");
    let (c2, b) = wdro(&args, "4");
    let identical = c1 == 0 && c2 == 0 && without_timings(&a) == without_timings(&b);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let good = dir.path().join("two_point.json");
    std::fs::write(
        &good,
        r#"{"points": [[0.0], [1.0]], "nominal": {"support": [0], "weights": [1.0]}, "loss": [0.0, 1.0], "radius": 0.3}"#,
    )
    .unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"points": [[0.0], [1.0]], "nominal": {"support": [0, 1], "weights": [0.6, 0.5]}, "loss": [0.0, 1.0], "radius": 0.3}"#,
    )
    .unwrap();
    let good = good.to_str().unwrap();
    let bad = bad.to_str().unwrap();
    let missing = dir.path().join("missing.json");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["compare", "--file", good], 0),
        (vec!["eval", "--file", bad], 2),
        (vec!["eval", "--file", good, "--strict"], 2),
        (vec!["frobnicate"], 2),
        (vec!["risk", "--measure", "var", "--p", "1", "--rho", "0.3", "--values", "0,1"], 3),
        (vec!["eval", "--file", missing.to_str().unwrap()], 1),
    ];
    let mut wrong = Vec::new();
    for (args, expected) in &cases {
        let (code, _) = wdro(args, "2");
        if code != *expected {
            wrong.push(format!("{} -> {code} (expected {expected})", args.join(" ")));
        }
    }
    check(
        identical && wrong.is_empty(),
        format!("fuzz reports identical across 1 and 4 threads: {identical}; exit-code mismatches: {wrong:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("strong duality fuzz", criterion_1),
        ("soft duality", criterion_2),
        ("shape of L and G", criterion_3),
        ("discontinuity at zero radius", criterion_4),
        ("maximum-cost balls", criterion_5),
        ("risk closed forms", criterion_6),
        ("chance constraints", criterion_7),
        ("globalized balls", criterion_8),
        ("robust MDP", criterion_9),
        ("CLI determinism and exit codes", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
