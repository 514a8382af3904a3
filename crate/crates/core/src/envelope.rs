//! Exact piecewise-linear convex functions on `[0, inf)`.
//!
//! Used for `G(lambda)`, the dual objective `lambda * rho + G(lambda)` and
//! every other one-dimensional upper envelope of lines in the crate.

use serde::Serialize;

use crate::problem::{ProblemError, Result};

/// Breakpoints closer than `MERGE_TOLERANCE * (1 + |b|)` are merged when
/// functions are summed.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Slack allowed when checking the stored values against the slopes.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// A line `lambda -> intercept + slope * lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

impl Line {
    pub fn new(intercept: f64, slope: f64) -> Self {
        Self { intercept, slope }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Convex piecewise-linear function on `[0, inf)`.
///
/// `slopes[k]` is the slope on `[breakpoints[k], breakpoints[k + 1]]` and
/// `tail_slope` the slope after the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlConvexFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    tail_slope: f64,
}

impl PlConvexFunction {
    /// Checks shape, ordering, value consistency and convexity.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>, tail_slope: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints[0] != 0.0 {
            return Err(ProblemError::InvalidValue("breakpoints must start at 0".into()));
        }
        if values.len() != breakpoints.len() || slopes.len() + 1 != breakpoints.len() {
            return Err(ProblemError::ShapeMismatch("piecewise-linear arrays".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ProblemError::InvalidValue("breakpoints must increase strictly".into()));
        }
        let f = Self { breakpoints, values, slopes, tail_slope };
        for k in 0..f.slopes.len() {
            let predicted = f.values[k] + f.slopes[k] * (f.breakpoints[k + 1] - f.breakpoints[k]);
            let scale = 1.0 + f.values[k + 1].abs().max(f.values[k].abs());
            if (predicted - f.values[k + 1]).abs() > CONSISTENCY_TOLERANCE * scale {
                return Err(ProblemError::InvalidValue(format!("value at breakpoint {} disagrees with slope", k + 1)));
            }
        }
        if !f.is_convex(CONSISTENCY_TOLERANCE) {
            return Err(ProblemError::InvalidValue("slopes must be nondecreasing".into()));
        }
        Ok(f)
    }

    pub fn constant(c: f64) -> Self {
        Self { breakpoints: vec![0.0], values: vec![c], slopes: vec![], tail_slope: 0.0 }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    /// Slope on the piece starting at breakpoint `k` (the tail for the last one).
    pub fn slope_after(&self, k: usize) -> f64 {
        self.slopes.get(k).copied().unwrap_or(self.tail_slope)
    }

    /// Index of the piece containing `x >= 0`.
    fn piece(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x).saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.piece(x);
        self.values[k] + self.slope_after(k) * (x - self.breakpoints[k])
    }

    /// Right derivative at `x`.
    pub fn right_slope(&self, x: f64) -> f64 {
        self.slope_after(self.piece(x))
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        let mut all = self.slopes.clone();
        all.push(self.tail_slope);
        all.windows(2).all(|w| w[1] >= w[0] - tol * (1.0 + w[0].abs()))
    }

    /// `self + a * x`.
    pub fn add_linear(&self, a: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().zip(&self.breakpoints).map(|(v, b)| v + a * b).collect(),
            slopes: self.slopes.iter().map(|s| s + a).collect(),
            tail_slope: self.tail_slope + a,
        }
    }

    /// Smallest minimizer on `[0, inf)` and the minimum, or `None` when the
    /// function decreases without bound.
    pub fn argmin(&self) -> Option<(f64, f64)> {
        for k in 0..self.breakpoints.len() {
            if self.slope_after(k) >= 0.0 {
                return Some((self.breakpoints[k], self.values[k]));
            }
        }
        None
    }

    /// Weighted sum `sum_k w_k f_k` on the union of breakpoints.
    pub fn weighted_sum(terms: &[(f64, &PlConvexFunction)]) -> Self {
        let mut xs: Vec<f64> = terms.iter().flat_map(|(_, f)| f.breakpoints.iter().copied()).collect();
        xs.push(0.0);
        xs.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(xs.len());
        for x in xs {
            match merged.last() {
                Some(&last) if x - last <= MERGE_TOLERANCE * (1.0 + last.abs()) => {}
                _ => merged.push(x),
            }
        }
        let values = merged.iter().map(|&x| terms.iter().map(|(w, f)| w * f.eval(x)).sum()).collect();
        let slopes = merged
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                terms.iter().map(|(c, f)| c * f.right_slope(mid)).sum()
            })
            .collect();
        let tail_slope = terms.iter().map(|(w, f)| w * f.tail_slope).sum();
        Self { breakpoints: merged, values, slopes, tail_slope }
    }

    /// Exact upper envelope of `lines` on `[0, inf)`. Panics on an empty set.
    pub fn upper_envelope(lines: &[Line]) -> Self {
        assert!(!lines.is_empty(), "upper envelope of no lines");
        let mut sorted = lines.to_vec();
        // Slope ascending, and among equal slopes the highest intercept first.
        sorted.sort_by(|a, b| a.slope.total_cmp(&b.slope).then(b.intercept.total_cmp(&a.intercept)));
        sorted.dedup_by(|later, kept| later.slope == kept.slope);

        let mut hull: Vec<Line> = Vec::with_capacity(sorted.len());
        for l in sorted {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                // b is never strictly on top when a and l cross before a and b.
                if (a.intercept - l.intercept) * (b.slope - a.slope) <= (a.intercept - b.intercept) * (l.slope - a.slope) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(l);
        }

        // crossings[k] is where hull[k + 1] overtakes hull[k].
        let crossings: Vec<f64> =
            hull.windows(2).map(|w| (w[0].intercept - w[1].intercept) / (w[1].slope - w[0].slope)).collect();
        let first = crossings.iter().position(|&x| x > 0.0).unwrap_or(crossings.len());
        let mut breakpoints = vec![0.0];
        let mut values = vec![hull[first].intercept];
        let mut slopes = Vec::new();
        for k in first..crossings.len() {
            let x = crossings[k];
            if x <= *breakpoints.last().unwrap() {
                continue;
            }
            slopes.push(hull[k].slope);
            breakpoints.push(x);
            values.push(hull[k + 1].at(x));
        }
        Self { breakpoints, values, slopes, tail_slope: hull.last().unwrap().slope }
    }
}
