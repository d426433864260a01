//! Finite quasi-metric measure spaces.
//!
//! A [`SpaceDescriptor`] is a finite point set `0..n` with a distance
//! function and strictly positive point masses. Balls are open,
//! `B(x, r) = {y : d(x, y) < r}`. On a finite space only finitely many
//! distinct balls exist around each center; [`center_family`] lists them as
//! closed sublevel sets at the distinct values of the distance row.

mod file;
mod generate;

pub use file::{load_space, parse_space, save_space, write_space};
pub use generate::{gen_dyadic_interval, gen_grid_torus, gen_power_weight};

use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::{exact_sum, PrefixSums};

pub type PointId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("distance between distinct points {0} and {1} is zero")]
    ZeroDistanceOffDiagonal(PointId, PointId),
    #[error("distance d({0}, {1}) = {2} is negative or not finite")]
    NegativeDistance(PointId, PointId, f64),
    #[error("diagonal entry d({0}, {0}) = {1} is not zero")]
    NonzeroDiagonal(PointId, f64),
    #[error("distance table is not square ({rows} rows, row {row} has {len} entries)")]
    NotSquare { rows: usize, row: usize, len: usize },
    #[error("space must contain at least one point")]
    Empty,
    #[error("weight of point {0} is {1}; weights must be positive and finite")]
    InvalidWeight(PointId, f64),
    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("point {0} is not in the space")]
    InvalidPoint(PointId),
    #[error("radius {0} is not positive")]
    NonpositiveRadius(f64),
    #[error("radius window is empty or malformed: {0}")]
    EmptyWindow(String),
    #[error("depth {0} is outside 1..=24")]
    DepthOutOfRange(u32),
    #[error("power-weight exponent {0} is outside [0, 3]")]
    AlphaOutOfRange(f64),
    #[error("torus size out of range: {0}")]
    SizeOutOfRange(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl SpaceError {
    /// True for violations of the quasi-metric axioms and other structural
    /// defects of the distance function (as opposed to syntax errors).
    pub fn is_axiom_violation(&self) -> bool {
        matches!(
            self,
            SpaceError::ZeroDistanceOffDiagonal(..)
                | SpaceError::NegativeDistance(..)
                | SpaceError::NonzeroDiagonal(..)
        )
    }
}

/// Metric applied to coordinate labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    L2,
    Linf,
    /// Per-coordinate wrap-around distance on `[0, 1)`, combined by max.
    Circle,
}

impl Metric {
    pub fn tag(self) -> &'static str {
        match self {
            Metric::L2 => "l2",
            Metric::Linf => "linf",
            Metric::Circle => "circle",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "l2" => Some(Metric::L2),
            "linf" => Some(Metric::Linf),
            "circle" => Some(Metric::Circle),
            _ => None,
        }
    }

    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        if a.len() == 1 && self != Metric::Circle {
            return (a[0] - b[0]).abs();
        }
        match self {
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Linf => a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            Metric::Circle => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = (x - y).abs();
                    d.min(1.0 - d)
                })
                .fold(0.0, f64::max),
        }
    }
}

/// Per-point coordinate metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Labels {
    dim: usize,
    coords: Vec<f64>,
}

impl Labels {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim >= 1 && coords.len().is_multiple_of(dim));
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, x: PointId) -> &[f64] {
        &self.coords[x * self.dim..(x + 1) * self.dim]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Distances {
    /// Row-major `n × n` table.
    Table(Vec<f64>),
    /// Computed from the labels.
    Coordinates(Metric),
    /// Integer grid `{0..side}^dim` with wrap-around max-coordinate distance / side.
    Torus { dim: usize, side: usize },
}

/// Finite point set with distances and positive point masses.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceDescriptor {
    weights: Vec<f64>,
    dist: Distances,
    labels: Option<Labels>,
}

fn check_weights(weights: &[f64]) -> Result<(), SpaceError> {
    if weights.is_empty() {
        return Err(SpaceError::Empty);
    }
    for (x, &w) in weights.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(SpaceError::InvalidWeight(x, w));
        }
    }
    Ok(())
}

impl SpaceDescriptor {
    /// Space from an explicit distance table. Runs the O(n²) axiom checks.
    pub fn from_table(table: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, SpaceError> {
        let n = table.len();
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::NotSquare { rows: n, row, len: r.len() });
            }
        }
        let flat: Vec<f64> = table.into_iter().flatten().collect();
        Self::from_flat_table(flat, weights, None)
    }

    pub(crate) fn from_flat_table(
        flat: Vec<f64>,
        weights: Vec<f64>,
        labels: Option<Labels>,
    ) -> Result<Self, SpaceError> {
        check_weights(&weights)?;
        let n = weights.len();
        if flat.len() != n * n {
            return Err(SpaceError::ShapeMismatch { expected: n * n, found: flat.len() });
        }
        check_axioms(n, |x, y| flat[x * n + y])?;
        Ok(Self { weights, dist: Distances::Table(flat), labels })
    }

    /// Space whose distances are computed from coordinates.
    pub fn from_coordinates(
        dim: usize,
        coords: Vec<f64>,
        metric: Metric,
        weights: Vec<f64>,
    ) -> Result<Self, SpaceError> {
        check_weights(&weights)?;
        if dim == 0 || coords.len() != dim * weights.len() {
            return Err(SpaceError::ShapeMismatch {
                expected: dim * weights.len(),
                found: coords.len(),
            });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(SpaceError::Parse { line: 0, msg: format!("coordinate {bad} is not finite") });
        }
        let space = Self {
            weights,
            dist: Distances::Coordinates(metric),
            labels: Some(Labels::new(dim, coords)),
        };
        space.check_axioms()?;
        Ok(space)
    }

    pub(crate) fn torus_unchecked(dim: usize, side: usize, labels: Labels, weights: Vec<f64>) -> Self {
        Self { weights, dist: Distances::Torus { dim, side }, labels: Some(labels) }
    }

    pub(crate) fn coordinates_unchecked(labels: Labels, metric: Metric, weights: Vec<f64>) -> Self {
        Self { weights, dist: Distances::Coordinates(metric), labels: Some(labels) }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, x: PointId) -> f64 {
        self.weights[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub(crate) fn distances(&self) -> &Distances {
        &self.dist
    }

    pub fn dist(&self, x: PointId, y: PointId) -> f64 {
        match &self.dist {
            Distances::Table(t) => t[x * self.n() + y],
            Distances::Coordinates(m) => {
                let l = self.labels.as_ref().expect("coordinate space has labels");
                m.eval(l.point(x), l.point(y))
            }
            Distances::Torus { dim, side } => {
                let (mut a, mut b) = (x, y);
                let mut best = 0usize;
                for _ in 0..*dim {
                    let (ca, cb) = (a % side, b % side);
                    a /= side;
                    b /= side;
                    let d = ca.abs_diff(cb);
                    best = best.max(d.min(side - d));
                }
                best as f64 / *side as f64
            }
        }
    }

    /// Distance row `d(x, ·)`.
    pub fn row(&self, x: PointId) -> Vec<f64> {
        (0..self.n()).map(|y| self.dist(x, y)).collect()
    }

    /// The same geometry with every weight multiplied by `c`.
    pub fn with_scaled_weights(&self, c: f64) -> Result<Self, SpaceError> {
        let weights: Vec<f64> = self.weights.iter().map(|w| w * c).collect();
        check_weights(&weights)?;
        Ok(Self { weights, ..self.clone() })
    }

    pub fn total_measure(&self) -> f64 {
        exact_sum(self.weights.iter().copied())
    }

    /// μ of a point set (correctly rounded).
    pub fn measure(&self, members: &[PointId]) -> f64 {
        exact_sum(members.iter().map(|&y| self.weights[y]))
    }

    pub(crate) fn check_point(&self, x: PointId) -> Result<(), SpaceError> {
        if x < self.n() {
            Ok(())
        } else {
            Err(SpaceError::InvalidPoint(x))
        }
    }

    /// Axiom (a), nonnegativity and zero diagonal. O(n²).
    pub fn check_axioms(&self) -> Result<(), SpaceError> {
        check_axioms(self.n(), |x, y| self.dist(x, y))
    }

    /// Coordinate order for spaces whose distance is `|c_x − c_y|` for a
    /// one-dimensional label `c`. Balls in such spaces are index ranges of
    /// the order.
    pub fn interval_order(&self) -> Option<IntervalOrder> {
        let labels = self.labels.as_ref()?;
        if labels.dim() != 1 {
            return None;
        }
        let coord = |x: PointId| labels.point(x)[0];
        let structured = match &self.dist {
            Distances::Coordinates(Metric::L2 | Metric::Linf) => true,
            Distances::Coordinates(Metric::Circle) | Distances::Torus { .. } => false,
            Distances::Table(_) => (0..self.n()).all(|x| {
                (0..self.n()).all(|y| self.dist(x, y) == (coord(x) - coord(y)).abs())
            }),
        };
        if !structured {
            return None;
        }
        let mut order: Vec<PointId> = (0..self.n()).collect();
        order.sort_by(|&a, &b| coord(a).total_cmp(&coord(b)).then(a.cmp(&b)));
        let coords: Vec<f64> = order.iter().map(|&x| coord(x)).collect();
        if coords.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let mut position = vec![0; self.n()];
        for (i, &x) in order.iter().enumerate() {
            position[x] = i;
        }
        Some(IntervalOrder { order, position, coords })
    }
}

fn check_axioms(n: usize, d: impl Fn(PointId, PointId) -> f64) -> Result<(), SpaceError> {
    if n == 0 {
        return Err(SpaceError::Empty);
    }
    for x in 0..n {
        for y in 0..n {
            let v = d(x, y);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(SpaceError::NegativeDistance(x, y, v));
            }
            if x == y && v != 0.0 {
                return Err(SpaceError::NonzeroDiagonal(x, v));
            }
            if x != y && v == 0.0 {
                return Err(SpaceError::ZeroDistanceOffDiagonal(x, y));
            }
        }
    }
    Ok(())
}

/// Points of a one-dimensional space sorted by coordinate.
#[derive(Clone, Debug)]
pub struct IntervalOrder {
    /// Point ids by increasing coordinate.
    pub order: Vec<PointId>,
    /// Inverse of `order`.
    pub position: Vec<usize>,
    /// Sorted coordinates.
    pub coords: Vec<f64>,
}

impl IntervalOrder {
    /// Half-open position range of the open ball around the point at
    /// position `pos`.
    pub fn ball_range(&self, pos: usize, r: f64) -> (usize, usize) {
        let c = self.coords[pos];
        let lo = self.coords[..pos].partition_point(|&y| (c - y).abs() >= r);
        let hi = pos + 1 + self.coords[pos + 1..].partition_point(|&y| (y - c).abs() < r);
        (lo, hi)
    }
}

/// Minimal quasi-metric constants of a finite space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiMetricCertificate {
    /// Smallest `c0` with `d(y,x) ≤ c0·d(x,y)`.
    pub c0: f64,
    /// Smallest `c1` with `d(x,y) ≤ c1·max(d(x,z), d(z,y))`.
    pub c1: f64,
    pub symmetric: bool,
}

/// Checks axiom (a) and returns the minimal constants `c0`, `c1`.
///
/// O(n³) in general; O(n² log n) for interval-structured spaces.
pub fn verify_quasi_metric(space: &SpaceDescriptor) -> Result<QuasiMetricCertificate, SpaceError> {
    space.check_axioms()?;
    let n = space.n();
    let mut c0: f64 = 1.0;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                c0 = c0.max(space.dist(y, x) / space.dist(x, y));
            }
        }
    }
    let c1 = if n < 3 {
        1.0
    } else if let Some(order) = space.interval_order() {
        interval_c1(&order)
    } else {
        let rows: Vec<Vec<f64>> = (0..n).map(|x| space.row(x)).collect();
        (0..n)
            .into_par_iter()
            .map(|x| {
                let mut best: f64 = 1.0;
                for y in 0..n {
                    if y == x {
                        continue;
                    }
                    // z ∈ {x, y} only ever gives ratio 1.
                    let mut detour = f64::INFINITY;
                    for z in 0..n {
                        if z != x && z != y {
                            detour = detour.min(rows[x][z].max(rows[z][y]));
                        }
                    }
                    best = best.max(rows[x][y] / detour);
                }
                best
            })
            .reduce(|| 1.0, f64::max)
    };
    Ok(QuasiMetricCertificate { c0, c1, symmetric: c0 == 1.0 })
}

fn interval_c1(order: &IntervalOrder) -> f64 {
    let c = &order.coords;
    let n = c.len();
    let mut best: f64 = 1.0;
    for i in 0..n {
        for j in i + 2..n {
            let d = (c[j] - c[i]).abs();
            let mid = 0.5 * (c[i] + c[j]);
            let k = i + 1 + c[i + 1..j].partition_point(|&v| v < mid);
            let mut detour = f64::INFINITY;
            for z in [k.saturating_sub(1), k] {
                if z > i && z < j {
                    detour = detour.min((c[z] - c[i]).abs().max((c[j] - c[z]).abs()));
                }
            }
            best = best.max(d / detour);
        }
    }
    best
}

/// An open ball with its members (sorted ids).
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: PointId,
    pub radius: f64,
    pub members: Vec<PointId>,
}

pub fn open_ball(space: &SpaceDescriptor, x: PointId, r: f64) -> Result<Ball, SpaceError> {
    space.check_point(x)?;
    if !(r > 0.0) {
        return Err(SpaceError::NonpositiveRadius(r));
    }
    let members = (0..space.n()).filter(|&y| space.dist(x, y) < r).collect();
    Ok(Ball { center: x, radius: r, members })
}

/// All distinct balls around one center.
///
/// Entry `j` is the closed sublevel set `{y : d(x,y) ≤ thresholds[j]}`,
/// which is the open ball of every radius in `(thresholds[j], thresholds[j+1]]`.
#[derive(Clone, Debug)]
pub struct CenterFamily {
    pub center: PointId,
    /// Points by increasing distance from the center, ties by id.
    pub order: Vec<PointId>,
    /// Distinct distance values, increasing; `thresholds[0] = 0`.
    pub thresholds: Vec<f64>,
    /// `order[..ends[j]]` are the members of entry `j`.
    pub ends: Vec<usize>,
}

impl CenterFamily {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn members(&self, j: usize) -> &[PointId] {
        &self.order[..self.ends[j]]
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, &[PointId])> + '_ {
        (0..self.len()).map(move |j| (self.thresholds[j], self.members(j)))
    }
}

pub fn center_family(space: &SpaceDescriptor, x: PointId) -> CenterFamily {
    let row = space.row(x);
    let mut order: Vec<PointId> = (0..space.n()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    let mut thresholds = Vec::new();
    let mut ends = Vec::new();
    for (i, &y) in order.iter().enumerate() {
        let d = row[y];
        if i + 1 == order.len() || row[order[i + 1]] != d {
            thresholds.push(d);
            ends.push(i + 1);
        }
    }
    CenterFamily { center: x, order, thresholds, ends }
}

/// Every distinct open ball of the space, grouped by center.
pub fn distinct_ball_family(space: &SpaceDescriptor) -> Vec<CenterFamily> {
    (0..space.n()).map(|x| center_family(space, x)).collect()
}

/// Radii at which doubling constants are measured.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusWindow {
    r_min: f64,
    r_max: f64,
    grid: Vec<f64>,
}

impl RadiusWindow {
    pub fn new(r_min: f64, r_max: f64, grid: Vec<f64>) -> Result<Self, SpaceError> {
        if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
            return Err(SpaceError::EmptyWindow(format!("r_min={r_min}, r_max={r_max}")));
        }
        if grid.is_empty() {
            return Err(SpaceError::EmptyWindow("no grid radii".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SpaceError::EmptyWindow("grid not strictly increasing".into()));
        }
        if grid[0] < r_min || grid[grid.len() - 1] > r_max {
            return Err(SpaceError::EmptyWindow("grid leaves [r_min, r_max]".into()));
        }
        Ok(Self { r_min, r_max, grid })
    }

    /// Grid `r_max / 2^j` for every `j ≥ 0` with `r_max / 2^j ≥ r_min`.
    pub fn dyadic(r_min: f64, r_max: f64) -> Result<Self, SpaceError> {
        if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
            return Err(SpaceError::EmptyWindow(format!("r_min={r_min}, r_max={r_max}")));
        }
        let mut grid = Vec::new();
        let mut r = r_max;
        while r >= r_min {
            grid.push(r);
            r *= 0.5;
        }
        grid.reverse();
        Self::new(r_min, r_max, grid)
    }

    /// `steps` geometrically spaced radii from `r_min` to `r_max`.
    pub fn geometric(r_min: f64, r_max: f64, steps: usize) -> Result<Self, SpaceError> {
        if steps == 0 {
            return Err(SpaceError::EmptyWindow("zero steps".into()));
        }
        if !(r_min > 0.0 && r_min <= r_max && r_max.is_finite()) {
            return Err(SpaceError::EmptyWindow(format!("r_min={r_min}, r_max={r_max}")));
        }
        if steps == 1 {
            return Self::new(r_min, r_max, vec![r_max]);
        }
        let ratio = r_max / r_min;
        let halvings = (steps - 1) as i32;
        let grid: Vec<f64> = if ratio == 2f64.powi(halvings) {
            (0..steps).rev().map(|j| r_max * 0.5f64.powi(j as i32)).collect()
        } else {
            (0..steps)
                .map(|j| match j {
                    0 => r_min,
                    j if j == steps - 1 => r_max,
                    j => r_min * ratio.powf(j as f64 / (steps - 1) as f64),
                })
                .collect()
        };
        Self::new(r_min, r_max, grid)
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Every grid radius at least `2·r_min` has its half in the grid.
    pub fn is_halving_closed(&self) -> bool {
        self.grid
            .iter()
            .filter(|&&r| r * 0.5 >= self.r_min)
            .all(|&r| self.grid.contains(&(r * 0.5)))
    }
}

/// Measured doubling and reverse-doubling constants over a radius window.
#[derive(Clone, Debug, PartialEq)]
pub struct DoublingCertificate {
    /// max μ(B(x,r)) / μ(B(x,r/2)).
    pub a_const: f64,
    /// max μ(B(x,r/2)) / μ(B(x,r)).
    pub delta_const: f64,
    pub a_witness: (PointId, f64),
    pub delta_witness: (PointId, f64),
    /// `delta_const < 1`.
    pub reverse_doubling: bool,
    pub window: RadiusWindow,
}

/// Ball masses for several weightings at once, with an interval fast path.
///
/// Each weighting is a per-point vector of terms (for example `μ({y})`, or
/// `μ({y})·χ_E(y)`); `mass(x, r, k)` is the correctly rounded sum of
/// weighting `k` over `B(x, r)`.
pub struct BallMasses<'a> {
    space: &'a SpaceDescriptor,
    terms: Vec<Vec<f64>>,
    interval: Option<(IntervalOrder, Vec<PrefixSums>)>,
}

impl<'a> BallMasses<'a> {
    pub fn new(space: &'a SpaceDescriptor, terms: Vec<Vec<f64>>) -> Self {
        let interval = space.interval_order().map(|order| {
            let prefix = terms
                .iter()
                .map(|t| PrefixSums::new(&order.order.iter().map(|&y| t[y]).collect::<Vec<_>>()))
                .collect();
            (order, prefix)
        });
        Self { space, terms, interval }
    }

    pub fn center(&self, x: PointId) -> CenterMasses<'_> {
        match &self.interval {
            Some((order, prefix)) => CenterMasses::Interval {
                order,
                prefix,
                pos: order.position[x],
            },
            None => {
                let row = self.space.row(x);
                let mut ids: Vec<PointId> = (0..self.space.n()).collect();
                ids.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
                let dists = ids.iter().map(|&y| row[y]).collect();
                let prefix = self
                    .terms
                    .iter()
                    .map(|t| PrefixSums::new(&ids.iter().map(|&y| t[y]).collect::<Vec<_>>()))
                    .collect();
                CenterMasses::General { dists, prefix }
            }
        }
    }
}

pub enum CenterMasses<'m> {
    Interval { order: &'m IntervalOrder, prefix: &'m [PrefixSums], pos: usize },
    General { dists: Vec<f64>, prefix: Vec<PrefixSums> },
}

impl CenterMasses<'_> {
    /// Mass of weighting `k` over the open ball of radius `r`.
    pub fn mass(&self, r: f64, k: usize) -> f64 {
        match self {
            CenterMasses::Interval { order, prefix, pos } => {
                let (lo, hi) = order.ball_range(*pos, r);
                prefix[k].range(lo, hi)
            }
            CenterMasses::General { dists, prefix } => {
                let count = dists.partition_point(|&d| d < r);
                prefix[k].range(0, count)
            }
        }
    }
}

pub fn doubling_certificate(
    space: &SpaceDescriptor,
    window: &RadiusWindow,
) -> Result<DoublingCertificate, SpaceError> {
    if window.grid().is_empty() {
        return Err(SpaceError::EmptyWindow("no grid radii".into()));
    }
    let masses = BallMasses::new(space, vec![space.weights().to_vec()]);
    // Per center: (a, witness r, delta, witness r); first maximum wins.
    let per_center: Vec<(f64, f64, f64, f64)> = (0..space.n())
        .into_par_iter()
        .map(|x| {
            let c = masses.center(x);
            let mut best = (f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 0.0);
            for &r in window.grid() {
                let big = c.mass(r, 0);
                let small = c.mass(r * 0.5, 0);
                let a = big / small;
                let d = small / big;
                if a > best.0 {
                    best.0 = a;
                    best.1 = r;
                }
                if d > best.2 {
                    best.2 = d;
                    best.3 = r;
                }
            }
            best
        })
        .collect();
    let mut a_const = f64::NEG_INFINITY;
    let mut delta_const = f64::NEG_INFINITY;
    let mut a_witness = (0, 0.0);
    let mut delta_witness = (0, 0.0);
    for (x, &(a, ra, d, rd)) in per_center.iter().enumerate() {
        if a > a_const {
            a_const = a;
            a_witness = (x, ra);
        }
        if d > delta_const {
            delta_const = d;
            delta_witness = (x, rd);
        }
    }
    Ok(DoublingCertificate {
        a_const,
        delta_const,
        a_witness,
        delta_witness,
        reverse_doubling: delta_const < 1.0,
        window: window.clone(),
    })
}
