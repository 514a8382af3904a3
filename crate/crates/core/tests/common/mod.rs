//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use wdro::applications::{ChanceInstance, GlobalizedInstance, RobustMdp};
use wdro::fuzz::random_weights;
use wdro::{CostMatrix, DiscreteDistribution, DroProblem, PointSet, ScalarDistribution, TransportOrder};

const EPS: f64 = 1e-11;

/// `maximize c.x` subject to `eq` rows (`a.x = b`), `le` rows (`a.x <= b`)
/// and `x >= 0`, with every `b >= 0`.
pub struct Lp {
    pub objective: Vec<f64>,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub le: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule; `false` when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let ncols = cost.len();
        loop {
            let entering = (0..ncols).find(|&j| {
                allowed[j] && {
                    let z: f64 = self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum();
                    cost[j] - z > EPS
                }
            });
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > EPS {
                    let ratio = row[ncols] / row[j];
                    leave = match leave {
                        Some((k, best)) if ratio > best + EPS || (ratio >= best - EPS && self.basis[k] < self.basis[i]) => {
                            Some((k, best))
                        }
                        _ => Some((i, ratio)),
                    };
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }

    fn value(&self, cost: &[f64]) -> f64 {
        let rhs = cost.len();
        self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[rhs]).sum()
    }
}

/// Two-phase dense simplex.
pub fn maximize(lp: &Lp) -> LpOutcome {
    let n = lp.objective.len();
    let (ne, nl) = (lp.eq.len(), lp.le.len());
    // Columns: originals, slacks of `le` rows, artificials of `eq` rows, rhs.
    let ncols = n + nl + ne;
    let mut rows = Vec::with_capacity(ne + nl);
    let mut basis = Vec::with_capacity(ne + nl);
    for (k, (a, b)) in lp.le.iter().enumerate() {
        let mut row = a.clone();
        row.resize(ncols + 1, 0.0);
        row[n + k] = 1.0;
        row[ncols] = *b;
        rows.push(row);
        basis.push(n + k);
    }
    for (k, (a, b)) in lp.eq.iter().enumerate() {
        let mut row = a.clone();
        row.resize(ncols + 1, 0.0);
        row[n + nl + k] = 1.0;
        row[ncols] = *b;
        rows.push(row);
        basis.push(n + nl + k);
    }
    let mut t = Tableau { rows, basis };
    let mut phase1 = vec![0.0; ncols];
    for c in phase1.iter_mut().skip(n + nl) {
        *c = -1.0;
    }
    t.optimize(&phase1, &vec![true; ncols]);
    if t.value(&phase1) < -1e-9 {
        return LpOutcome::Infeasible;
    }
    // Drive artificials out of the basis, dropping redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n + nl {
            match (0..n + nl).find(|&j| t.rows[r][j].abs() > 1e-9) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut cost = lp.objective.clone();
    cost.resize(ncols, 0.0);
    let allowed: Vec<bool> = (0..ncols).map(|j| j < n + nl).collect();
    if !t.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    LpOutcome::Optimal(t.value(&cost))
}

fn optimal(lp: &Lp) -> f64 {
    match maximize(lp) {
        LpOutcome::Optimal(v) => v,
        other => panic!("oracle LP not optimal: {other:?}"),
    }
}

/// Worst-case expected loss as an LP over couplings with finite cost.
pub fn primal_lp(problem: &DroProblem) -> f64 {
    let (n, m) = (problem.n(), problem.m());
    let vars: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|&(i, j)| problem.cost().get(i, j).is_finite()).collect();
    let loss = problem.loss().values();
    let objective = vars.iter().map(|&(_, j)| loss[j]).collect();
    let eq = (0..n)
        .map(|i| (vars.iter().map(|&(r, _)| if r == i { 1.0 } else { 0.0 }).collect(), problem.nominal().weights()[i]))
        .collect();
    let budget = vars.iter().map(|&(i, j)| problem.cost().get(i, j)).collect();
    optimal(&Lp { objective, eq, le: vec![(budget, problem.radius())] })
}

/// Kantorovich cost between two distributions on the same points, or
/// `None` when no finite-cost coupling exists.
pub fn transport_lp(mu: &[f64], nu: &[f64], cost: &CostMatrix) -> Option<f64> {
    let (n, m) = (mu.len(), nu.len());
    let vars: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|&(i, j)| cost.get(i, j).is_finite()).collect();
    let objective = vars.iter().map(|&(i, j)| -cost.get(i, j)).collect();
    let mut eq: Vec<(Vec<f64>, f64)> =
        (0..n).map(|i| (vars.iter().map(|&(r, _)| if r == i { 1.0 } else { 0.0 }).collect(), mu[i])).collect();
    eq.extend((0..m).map(|j| (vars.iter().map(|&(_, c)| if c == j { 1.0 } else { 0.0 }).collect(), nu[j])));
    match maximize(&Lp { objective, eq, le: vec![] }) {
        LpOutcome::Optimal(v) => Some(-v),
        _ => None,
    }
}

/// Globalized worst case as one LP over `(i, x_tilde, x)` with two budgets.
pub fn globalized_lp(g: &GlobalizedInstance) -> f64 {
    let base = g.base();
    let (n, m) = (base.n(), base.m());
    let mut vars = Vec::new();
    for i in 0..n {
        for k in 0..m {
            for j in 0..m {
                if base.cost().get(i, k).is_finite() && g.inner_cost().get(k, j).is_finite() {
                    vars.push((i, k, j));
                }
            }
        }
    }
    let loss = base.loss().values();
    let objective = vars.iter().map(|&(_, _, j)| loss[j]).collect();
    let eq = (0..n)
        .map(|i| (vars.iter().map(|&(r, _, _)| if r == i { 1.0 } else { 0.0 }).collect(), base.nominal().weights()[i]))
        .collect();
    let inner = vars.iter().map(|&(_, k, j)| g.inner_cost().get(k, j)).collect();
    let outer = vars.iter().map(|&(i, k, _)| base.cost().get(i, k)).collect();
    optimal(&Lp { objective, eq, le: vec![(inner, g.rho()), (outer, g.theta())] })
}

/// `min_{lambda, mu >= 0} lambda rho + mu theta + soft(lambda, mu)` on a grid
/// that is refined around its best node until the pitch reaches `pitch`.
pub fn globalized_grid(g: &GlobalizedInstance, lambda_max: f64, mu_max: f64, pitch: f64) -> f64 {
    let f = |l: f64, m: f64| l * g.rho() + m * g.theta() + wdro::globalized_soft(g, l, m).unwrap();
    let nodes = 40;
    let (mut l0, mut l1, mut m0, mut m1) = (0.0, lambda_max, 0.0, mu_max);
    loop {
        let (hl, hm) = ((l1 - l0) / nodes as f64, (m1 - m0) / nodes as f64);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for a in 0..=nodes {
            for b in 0..=nodes {
                let (l, m) = (l0 + a as f64 * hl, m0 + b as f64 * hm);
                let v = f(l, m);
                if v < best.0 {
                    best = (v, l, m);
                }
            }
        }
        if hl <= pitch && hm <= pitch {
            return best.0;
        }
        let (_, l, m) = best;
        // Half-widths of at least `pitch * nodes / 4` give a final pitch of `pitch / 2`.
        let floor = pitch * nodes as f64 / 4.0;
        let (wl, wm) = ((4.0 * hl).max(floor), (4.0 * hm).max(floor));
        l0 = (l - wl).max(0.0);
        l1 = l + wl;
        m0 = (m - wm).max(0.0);
        m1 = m + wm;
    }
}

/// Scalar nominal with up to `max_atoms` atoms in `[-2, 2]`.
pub fn random_scalar(rng: &mut impl Rng, max_atoms: usize) -> ScalarDistribution {
    let n = rng.gen_range(1..=max_atoms);
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    ScalarDistribution::new(values, random_weights(rng, n)).unwrap()
}

/// Chance instance with about 15% of atoms already unsafe and a radius up
/// to 1.2 times the infeasibility threshold.
pub fn random_chance(rng: &mut impl Rng, max_atoms: usize, p: f64) -> ChanceInstance {
    let n = rng.gen_range(1..=max_atoms);
    let distances: Vec<f64> = (0..n).map(|_| if rng.gen::<f64>() < 0.15 { 0.0 } else { rng.gen_range(0.0..2.0) }).collect();
    let weights = random_weights(rng, n);
    let beta = rng.gen_range(0.05..0.95);
    let probe = ChanceInstance::new(weights.clone(), distances.clone(), TransportOrder::Finite(p), 0.0, beta).unwrap();
    let rho = rng.gen_range(0.0..1.2) * probe.infeasibility_threshold();
    probe.with_rho(rho).unwrap()
}

fn random_points(rng: &mut impl Rng, m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

fn euclidean(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points.iter().map(|a| points.iter().map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()).collect()).collect()
}

fn random_nominal(rng: &mut impl Rng, m: usize, max_atoms: usize) -> DiscreteDistribution {
    let n = rng.gen_range(1..=max_atoms.min(m));
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(rng);
    idx.truncate(n);
    DiscreteDistribution::new(idx, random_weights(rng, n)).unwrap()
}

/// `c = c_tilde = |.|_2` on random points of the unit square.
pub fn random_shared_globalized(rng: &mut impl Rng, max_points: usize) -> GlobalizedInstance {
    let m = rng.gen_range(2..=max_points);
    let points = random_points(rng, m);
    let square = CostMatrix::square(euclidean(&points)).unwrap();
    let nominal = random_nominal(rng, m, m);
    let loss: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let rho = rng.gen_range(0.01..0.5);
    let base = DroProblem::from_square_cost(PointSet::from_coords(points).unwrap(), nominal, &square, loss, rho).unwrap();
    GlobalizedInstance::new(base, square, rng.gen_range(0.01..0.5)).unwrap()
}

/// Independent random costs `c` and `c_tilde` (symmetric, zero diagonal,
/// entries in `[0.1, 1]`, not metrics in general).
pub fn random_generic_globalized(rng: &mut impl Rng, max_points: usize) -> GlobalizedInstance {
    let m = rng.gen_range(2..=max_points);
    let outer = random_symmetric(rng, m);
    let inner = random_symmetric(rng, m);
    let nominal = random_nominal(rng, m, m);
    let loss: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let rho = rng.gen_range(0.05..0.5);
    let base = DroProblem::from_square_cost(PointSet::labelled(m).unwrap(), nominal, &outer, loss, rho).unwrap();
    GlobalizedInstance::new(base, inner, rng.gen_range(0.05..0.5)).unwrap()
}

fn random_symmetric(rng: &mut impl Rng, m: usize) -> CostMatrix {
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let v = rng.gen_range(0.1..1.0);
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    CostMatrix::square(c).unwrap()
}

/// MDP on states `0..S` of the integer line, cost `|s - s'|^p`, stage costs
/// in `[0, 1]` and a common radius.
pub fn random_mdp(rng: &mut impl Rng, rho: f64) -> RobustMdp {
    let s = rng.gen_range(2..=6);
    let horizon = rng.gen_range(1..=4);
    let p: f64 = if rng.gen() { 1.0 } else { 2.0 };
    let actions: Vec<usize> = (0..s).map(|_| rng.gen_range(1..=3)).collect();
    let g = (0..horizon).map(|_| actions.iter().map(|&a| (0..a).map(|_| rng.gen::<f64>()).collect()).collect()).collect();
    let kernels = actions
        .iter()
        .map(|&a| {
            (0..a)
                .map(|_| {
                    let support = rng.gen_range(1..=s);
                    let mut k = vec![0.0; s];
                    let mut idx: Vec<usize> = (0..s).collect();
                    idx.shuffle(rng);
                    for (&i, w) in idx.iter().take(support).zip(random_weights(rng, support)) {
                        k[i] = w;
                    }
                    k
                })
                .collect()
        })
        .collect();
    let radii = actions.iter().map(|&a| vec![rho; a]).collect();
    let cost = CostMatrix::square((0..s).map(|i| (0..s).map(|j| (i as f64 - j as f64).abs().powf(p)).collect()).collect()).unwrap();
    RobustMdp::new(actions, horizon, g, kernels, radii, cost).unwrap()
}

/// Seeded RNG for tests.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    wdro::fuzz::instance_rng(seed, 0)
}
