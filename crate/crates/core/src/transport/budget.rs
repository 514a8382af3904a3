//! Exact solver for the "one-budget" assignment LP
//!
//! ```text
//! maximize   sum_i w_i sum_k x_ik r_ik
//! subject to sum_k x_ik = 1          for every row i
//!            sum_i w_i sum_k x_ik c_ik <= budget
//!            x >= 0
//! ```
//!
//! which is the LP relaxation of a multiple-choice knapsack. Each row only
//! ever uses items on the upper concave hull of its `(cost, reward)` points,
//! and an optimal vertex spends the budget greedily on hull segments in
//! order of decreasing reward per unit cost. At most one row ends up split
//! between two adjacent hull items.

/// A candidate item of a row: consumes `cost` per unit of row mass and earns
/// `reward`. Items with infinite cost must not be passed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub id: usize,
    pub cost: f64,
    pub reward: f64,
}

/// Optimal assignment: for every row the items used and their fractions
/// (summing to one).
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSolution {
    pub value: f64,
    pub spent: f64,
    pub rows: Vec<Vec<(usize, f64)>>,
}

struct Segment {
    row: usize,
    step: usize,
    slope: f64,
}

/// Upper concave hull of a row's items restricted to the increasing-reward
/// part, starting from the best zero-cost item. Returns indices into `items`.
fn row_hull(items: &[Item]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    // Cost ascending; among equal costs the larger reward first, then id.
    order.sort_by(|&a, &b| {
        items[a]
            .cost
            .total_cmp(&items[b].cost)
            .then(items[b].reward.total_cmp(&items[a].reward))
            .then(items[a].id.cmp(&items[b].id))
    });
    let mut hull: Vec<usize> = Vec::new();
    for &k in &order {
        let it = items[k];
        if let Some(&last) = hull.last() {
            let l = items[last];
            if it.cost == l.cost || it.reward <= l.reward {
                continue;
            }
        }
        while hull.len() >= 2 {
            let a = items[hull[hull.len() - 2]];
            let b = items[hull[hull.len() - 1]];
            // b is dropped when it lies on or below the chord a -> it.
            let lhs = (b.reward - a.reward) * (it.cost - a.cost);
            let rhs = (it.reward - a.reward) * (b.cost - a.cost);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    hull
}

/// Solves the LP exactly. `rows[i]` lists the items of row `i`; every row
/// must contain at least one item, and the cheapest item cost of each row
/// must be zero so that the zero-spend assignment is feasible.
pub fn solve(weights: &[f64], rows: &[Vec<Item>], budget: f64) -> BudgetSolution {
    debug_assert_eq!(weights.len(), rows.len());
    let hulls: Vec<Vec<usize>> = rows.iter().map(|items| row_hull(items)).collect();

    let mut segments = Vec::new();
    for (row, hull) in hulls.iter().enumerate() {
        if weights[row] == 0.0 {
            continue;
        }
        for step in 1..hull.len() {
            let a = rows[row][hull[step - 1]];
            let b = rows[row][hull[step]];
            segments.push(Segment { row, step, slope: (b.reward - a.reward) / (b.cost - a.cost) });
        }
    }
    segments.sort_by(|x, y| y.slope.total_cmp(&x.slope).then(x.row.cmp(&y.row)).then(x.step.cmp(&y.step)));

    // position[i] = hull vertex currently used by row i.
    let mut position = vec![0usize; rows.len()];
    let mut split: Option<(usize, f64)> = None;
    let mut remaining = budget.max(0.0);
    let mut spent = 0.0;
    for seg in &segments {
        if remaining <= 0.0 {
            break;
        }
        debug_assert_eq!(position[seg.row] + 1, seg.step);
        let a = rows[seg.row][hulls[seg.row][seg.step - 1]];
        let b = rows[seg.row][hulls[seg.row][seg.step]];
        let need = weights[seg.row] * (b.cost - a.cost);
        if need <= remaining {
            remaining -= need;
            spent += need;
            position[seg.row] = seg.step;
        } else {
            let t = remaining / need;
            spent += remaining;
            remaining = 0.0;
            split = Some((seg.row, t));
        }
    }

    let mut value = 0.0;
    let mut out = Vec::with_capacity(rows.len());
    for (row, hull) in hulls.iter().enumerate() {
        let here = rows[row][hull[position[row]]];
        match split {
            Some((r, t)) if r == row => {
                let next = rows[row][hull[position[row] + 1]];
                value += weights[row] * ((1.0 - t) * here.reward + t * next.reward);
                out.push(vec![(here.id, 1.0 - t), (next.id, t)]);
            }
            _ => {
                value += weights[row] * here.reward;
                out.push(vec![(here.id, 1.0)]);
            }
        }
    }
    BudgetSolution { value, spent, rows: out }
}
