//! Domain types for discrete distributionally robust instances.
//!
//! A [`DroProblem`] bundles a finite candidate set ([`PointSet`]), a nominal
//! distribution supported on some of those points, a transport cost matrix
//! whose rows follow the nominal support and whose columns follow the
//! candidate set, a loss value per candidate and a transport budget.
//!
//! Costs live in `[0, +inf]`. Forbidden transports are stored as
//! `f64::INFINITY` and every solver in this crate drops such entries from its
//! feasible set outright, so a zero multiplier never rescues an infinite cost.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack on the total mass of a distribution before renormalizing.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("negative weight {weight} at atom {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },
    #[error("negative or NaN cost {value} at ({row}, {col})")]
    NegativeCost { row: usize, col: usize, value: f64 },
    #[error("row {row} has nonzero cost {value} at its own point (column {col})")]
    MissingDiagonalZero { row: usize, col: usize, value: f64 },
    #[error("metric needs point coordinates")]
    MissingCoordinates,
    #[error("transport order p = {0} must be a finite number >= 1")]
    InvalidP(f64),
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

pub type Result<T, E = ProblemError> = std::result::Result<T, E>;

/// Order of the Wasserstein distance: a finite `p >= 1`, or the maximum
/// transport cost (`p = inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportOrder {
    Finite(f64),
    Infinity,
}

impl TransportOrder {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(TransportOrder::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(TransportOrder::Finite(p))
        } else {
            Err(ProblemError::InvalidP(p))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TransportOrder::Infinity)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            TransportOrder::Finite(p) => *p,
            TransportOrder::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for TransportOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransportOrder::Finite(p) => write!(f, "{p}"),
            TransportOrder::Infinity => write!(f, "inf"),
        }
    }
}

/// Finite orders serialize as numbers, `inf` as the string `"inf"`.
impl serde::Serialize for TransportOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TransportOrder::Finite(p) => s.serialize_f64(*p),
            TransportOrder::Infinity => s.serialize_str("inf"),
        }
    }
}

impl std::str::FromStr for TransportOrder {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(TransportOrder::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| ProblemError::InvalidValue(format!("transport order {other:?}")))?;
                TransportOrder::new(p)
            }
        }
    }
}

/// Finite candidate set. Labels are unique; coordinates are optional and,
/// when present, share one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    labels: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
}

impl PointSet {
    pub fn new(labels: Vec<String>, coords: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(ProblemError::ShapeMismatch("point set is empty".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(ProblemError::InvalidValue(format!("duplicate point label {label:?}")));
            }
        }
        if let Some(coords) = &coords {
            if coords.len() != labels.len() {
                return Err(ProblemError::ShapeMismatch(format!(
                    "{} coordinate vectors for {} labels",
                    coords.len(),
                    labels.len()
                )));
            }
            let dim = coords[0].len();
            if dim == 0 {
                return Err(ProblemError::ShapeMismatch("zero-dimensional coordinates".into()));
            }
            for (i, c) in coords.iter().enumerate() {
                if c.len() != dim {
                    return Err(ProblemError::ShapeMismatch(format!(
                        "point {i} has dimension {}, expected {dim}",
                        c.len()
                    )));
                }
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(ProblemError::InvalidValue(format!("point {i} has a non-finite coordinate")));
                }
            }
        }
        Ok(Self { labels, coords })
    }

    /// Points labelled `"0"`, `"1"`, ... with the given coordinates.
    pub fn from_coords(coords: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..coords.len()).map(|i| i.to_string()).collect();
        Self::new(labels, Some(coords))
    }

    /// One-dimensional points.
    pub fn on_line(xs: &[f64]) -> Result<Self> {
        Self::from_coords(xs.iter().map(|&x| vec![x]).collect())
    }

    /// Points with labels only (costs must then be given explicitly).
    pub fn labelled(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), None)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Finite-support probability vector over indices of a [`PointSet`].
///
/// Zero-weight atoms are dropped at construction and the remaining weights
/// are rescaled so that they sum to one up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let (support, weights, _) = normalize_atoms(support, weights)?;
        Ok(Self { support, weights })
    }

    /// Like [`DiscreteDistribution::new`] but additionally checks every index
    /// against `m`.
    pub fn with_bound(support: Vec<usize>, weights: Vec<f64>, m: usize) -> Result<Self> {
        if let Some(&bad) = support.iter().find(|&&s| s >= m) {
            return Err(ProblemError::ShapeMismatch(format!("support index {bad} out of range 0..{m}")));
        }
        Self::new(support, weights)
    }

    pub fn dirac(index: usize) -> Self {
        Self { support: vec![index], weights: vec![1.0] }
    }

    pub fn uniform(support: Vec<usize>) -> Result<Self> {
        let n = support.len();
        if n == 0 {
            return Err(ProblemError::ShapeMismatch("empty support".into()));
        }
        Self::new(support, vec![1.0 / n as f64; n])
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Dense weight vector of length `m` (zeros off the support).
    pub fn dense(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (s, w) in self.iter() {
            out[s] += w;
        }
        out
    }

    /// Builds a distribution from a dense vector, keeping only positive
    /// entries.
    pub fn from_dense(masses: &[f64]) -> Result<Self> {
        let (support, weights): (Vec<usize>, Vec<f64>) =
            masses.iter().copied().enumerate().filter(|&(_, w)| w != 0.0).unzip();
        Self::new(support, weights)
    }

    /// Expectation of `values` (indexed like the point set).
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.iter().map(|(s, w)| w * values[s]).sum()
    }
}

/// Validates weights, drops zero atoms and rescales. Returns the kept
/// original positions as the third component.
fn normalize_atoms(support: Vec<usize>, weights: Vec<f64>) -> Result<(Vec<usize>, Vec<f64>, Vec<usize>)> {
    if support.len() != weights.len() {
        return Err(ProblemError::ShapeMismatch(format!(
            "{} support indices but {} weights",
            support.len(),
            weights.len()
        )));
    }
    for (index, &weight) in weights.iter().enumerate() {
        if weight.is_nan() || weight < 0.0 {
            return Err(ProblemError::NegativeWeight { index, weight });
        }
        if !weight.is_finite() {
            return Err(ProblemError::InvalidValue(format!("weight {weight} at atom {index}")));
        }
    }
    let mut seen = HashSet::with_capacity(support.len());
    for &s in &support {
        if !seen.insert(s) {
            return Err(ProblemError::InvalidValue(format!("support index {s} repeated")));
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ProblemError::WeightsNotNormalized { sum });
    }
    let kept: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    let support: Vec<usize> = kept.iter().map(|&i| support[i]).collect();
    let weights: Vec<f64> = kept.iter().map(|&i| weights[i] / sum).collect();
    Ok((support, weights, kept))
}

/// Dense `n x m` transport cost matrix with values in `[0, +inf]`.
///
/// `diagonal_map[i]` names the column that represents the same point as row
/// `i`; that entry is always exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    diagonal_map: Vec<usize>,
}

impl CostMatrix {
    pub fn new(entries: Vec<Vec<f64>>, diagonal_map: Vec<usize>) -> Result<Self> {
        let rows = entries.len();
        if rows == 0 {
            return Err(ProblemError::ShapeMismatch("cost matrix has no rows".into()));
        }
        let cols = entries[0].len();
        if cols == 0 {
            return Err(ProblemError::ShapeMismatch("cost matrix has no columns".into()));
        }
        if let Some((i, r)) = entries.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(ProblemError::ShapeMismatch(format!("cost row {i} has {} entries, expected {cols}", r.len())));
        }
        Self::from_flat(rows, cols, entries.into_iter().flatten().collect(), diagonal_map)
    }

    pub fn from_flat(rows: usize, cols: usize, entries: Vec<f64>, diagonal_map: Vec<usize>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(ProblemError::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} cost matrix",
                entries.len()
            )));
        }
        if diagonal_map.len() != rows {
            return Err(ProblemError::ShapeMismatch(format!(
                "diagonal map has {} entries for {rows} rows",
                diagonal_map.len()
            )));
        }
        for (k, &value) in entries.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(ProblemError::NegativeCost { row: k / cols, col: k % cols, value });
            }
        }
        for (row, &col) in diagonal_map.iter().enumerate() {
            if col >= cols {
                return Err(ProblemError::ShapeMismatch(format!("diagonal column {col} out of range for row {row}")));
            }
            let value = entries[row * cols + col];
            if value != 0.0 {
                return Err(ProblemError::MissingDiagonalZero { row, col, value });
            }
        }
        Ok(Self { rows, cols, entries, diagonal_map })
    }

    /// Square matrix over one index set; the diagonal map is the identity.
    pub fn square(entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = entries.len();
        Self::new(entries, (0..n).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn diagonal_map(&self) -> &[usize] {
        &self.diagonal_map
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Rows of a square matrix picked by `indices`; row `k` of the result is
    /// anchored at column `indices[k]`.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut entries = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(ProblemError::ShapeMismatch(format!("row {i} out of range 0..{}", self.rows)));
            }
            entries.extend_from_slice(self.row(i));
        }
        let diagonal_map = indices.iter().map(|&i| self.diagonal_map[i]).collect();
        Self::from_flat(indices.len(), self.cols, entries, diagonal_map)
    }

    /// Entrywise power `c^p` (`inf^p = inf`).
    pub fn powf(&self, p: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&c| c.powf(p)).collect(),
            diagonal_map: self.diagonal_map.clone(),
        }
    }

    pub fn transpose_square(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(ProblemError::ShapeMismatch("transpose of a non-square cost matrix".into()));
        }
        let n = self.rows;
        let entries = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        Self::from_flat(n, n, entries, (0..n).collect())
    }

    /// Smallest strictly positive finite entry, if any.
    pub fn min_positive_finite(&self) -> Option<f64> {
        self.entries
            .iter()
            .copied()
            .filter(|&c| c > 0.0 && c.is_finite())
            .min_by(f64::total_cmp)
    }

    /// Largest finite entry (zero for the all-diagonal case).
    pub fn max_finite(&self) -> f64 {
        self.entries.iter().copied().filter(|c| c.is_finite()).fold(0.0, f64::max)
    }

    /// Sorted distinct finite entries, including zero.
    pub fn distinct_finite(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().copied().filter(|c| c.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Loss values aligned with the candidate columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidValue(format!("loss value {} at column {i} is not finite", values[i])));
        }
        if values.is_empty() {
            return Err(ProblemError::ShapeMismatch("empty loss vector".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for LossVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Pointwise metric used to derive costs `d(x, y)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricSpec {
    Euclidean,
    Chebyshev,
    Manhattan,
    /// Square `m x m` distance matrix; `inf` marks forbidden pairs.
    #[serde(skip)]
    Explicit(Vec<Vec<f64>>),
}

impl MetricSpec {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            MetricSpec::Euclidean => {
                if a.len() == 1 {
                    (a[0] - b[0]).abs()
                } else {
                    diffs.map(|d| d * d).sum::<f64>().sqrt()
                }
            }
            MetricSpec::Chebyshev => diffs.fold(0.0, f64::max),
            MetricSpec::Manhattan => diffs.sum(),
            MetricSpec::Explicit(_) => unreachable!("explicit metric has no coordinate formula"),
        }
    }
}

/// Square cost matrix `c(x_i, x_j) = d(x_i, x_j)^p` over all points.
pub fn cost_from_metric(points: &PointSet, metric: &MetricSpec, p: f64) -> Result<CostMatrix> {
    if !p.is_finite() || p < 1.0 {
        return Err(ProblemError::InvalidP(p));
    }
    let m = points.len();
    let entries: Vec<Vec<f64>> = match metric {
        MetricSpec::Explicit(d) => {
            if d.len() != m || d.iter().any(|r| r.len() != m) {
                return Err(ProblemError::ShapeMismatch(format!("explicit metric must be {m}x{m}")));
            }
            d.iter().map(|r| r.iter().map(|&v| pow_cost(v, p)).collect()).collect()
        }
        _ => {
            let coords = points.coords().ok_or(ProblemError::MissingCoordinates)?;
            coords
                .iter()
                .map(|a| coords.iter().map(|b| pow_cost(metric.distance(a, b), p)).collect())
                .collect()
        }
    };
    CostMatrix::square(entries)
}

fn pow_cost(d: f64, p: f64) -> f64 {
    if p == 1.0 {
        d
    } else {
        d.powf(p)
    }
}

/// A validated distributionally robust instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DroProblem {
    points: PointSet,
    nominal: DiscreteDistribution,
    cost: CostMatrix,
    loss: LossVector,
    radius: f64,
}

/// Unvalidated parts of a problem. `cost` rows follow `support` in order,
/// including atoms whose weight is zero.
#[derive(Debug, Clone)]
pub struct RawProblem {
    pub points: PointSet,
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub cost: CostMatrix,
    pub loss: Vec<f64>,
    pub radius: f64,
}

/// Checks every invariant, drops zero-weight atoms (and their cost rows) and
/// returns the validated problem.
pub fn validate_problem(raw: RawProblem) -> Result<DroProblem> {
    let RawProblem { points, support, weights, cost, loss, radius } = raw;
    let m = points.len();
    if cost.rows() != support.len() {
        return Err(ProblemError::ShapeMismatch(format!(
            "cost has {} rows for {} nominal atoms",
            cost.rows(),
            support.len()
        )));
    }
    if cost.cols() != m {
        return Err(ProblemError::ShapeMismatch(format!("cost has {} columns for {m} points", cost.cols())));
    }
    if loss.len() != m {
        return Err(ProblemError::ShapeMismatch(format!("loss has {} values for {m} points", loss.len())));
    }
    if let Some(&bad) = support.iter().find(|&&s| s >= m) {
        return Err(ProblemError::ShapeMismatch(format!("support index {bad} out of range 0..{m}")));
    }
    for (row, (&s, &d)) in support.iter().zip(cost.diagonal_map()).enumerate() {
        if s != d {
            return Err(ProblemError::ShapeMismatch(format!(
                "cost row {row} is anchored at column {d} but the atom is point {s}"
            )));
        }
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(ProblemError::InvalidValue(format!("radius {radius} must be finite and >= 0")));
    }
    let loss = LossVector::new(loss)?;
    let (support, weights, kept) = normalize_atoms(support, weights)?;
    let cost = if kept.len() == cost.rows() { cost } else { cost.select_kept(&kept) };
    Ok(DroProblem { points, nominal: DiscreteDistribution { support, weights }, cost, loss, radius })
}

impl CostMatrix {
    fn select_kept(&self, kept: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(kept.len() * self.cols);
        for &i in kept {
            entries.extend_from_slice(self.row(i));
        }
        Self {
            rows: kept.len(),
            cols: self.cols,
            entries,
            diagonal_map: kept.iter().map(|&i| self.diagonal_map[i]).collect(),
        }
    }
}

impl DroProblem {
    /// Builds and validates a problem whose cost rows are already aligned
    /// with `nominal`.
    pub fn new(
        points: PointSet,
        nominal: DiscreteDistribution,
        cost: CostMatrix,
        loss: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        validate_problem(RawProblem {
            points,
            support: nominal.support,
            weights: nominal.weights,
            cost,
            loss,
            radius,
        })
    }

    /// Builds a problem from a square point-by-point cost matrix by picking
    /// the rows of the nominal support.
    pub fn from_square_cost(
        points: PointSet,
        nominal: DiscreteDistribution,
        square_cost: &CostMatrix,
        loss: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        let cost = square_cost.select_rows(nominal.support())?;
        Self::new(points, nominal, cost, loss, radius)
    }

    /// Builds a problem whose costs are `d^p` for the given metric.
    pub fn from_metric(
        points: PointSet,
        metric: &MetricSpec,
        p: f64,
        nominal: DiscreteDistribution,
        loss: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        let square = cost_from_metric(&points, metric, p)?;
        Self::from_square_cost(points, nominal, &square, loss, radius)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn nominal(&self) -> &DiscreteDistribution {
        &self.nominal
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn loss(&self) -> &LossVector {
        &self.loss
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of nominal atoms (cost rows).
    pub fn n(&self) -> usize {
        self.nominal.len()
    }

    /// Number of candidate points (cost columns).
    pub fn m(&self) -> usize {
        self.points.len()
    }

    /// Same instance with another radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(ProblemError::InvalidValue(format!("radius {radius} must be finite and >= 0")));
        }
        Ok(Self { radius, ..self.clone() })
    }

    /// Same instance with another loss vector.
    pub fn with_loss(&self, loss: Vec<f64>) -> Result<Self> {
        if loss.len() != self.m() {
            return Err(ProblemError::ShapeMismatch(format!("loss has {} values for {} points", loss.len(), self.m())));
        }
        Ok(Self { loss: LossVector::new(loss)?, ..self.clone() })
    }

    /// `E_nominal[f]`.
    pub fn nominal_expectation(&self) -> f64 {
        self.nominal.expect(self.loss.values())
    }

    /// `(max f - min f) / (smallest positive finite cost)`; beyond this
    /// multiplier every row of the dual envelope sits on its own point.
    pub fn saturation_lambda(&self) -> f64 {
        match self.cost.min_positive_finite() {
            Some(c) => (self.loss.max() - self.loss.min()) / c,
            None => 0.0,
        }
    }
}
