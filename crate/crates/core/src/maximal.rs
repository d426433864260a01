//! Exact Hardy–Littlewood maximal function on a finite space.
//!
//! `Mf(x)` is the largest average of `f` over the balls that contain `x`.
//! Every ball average is `fl(Σ fl(μ_y f_y)) / fl(Σ μ_y)` with correctly rounded
//! sums, and a one-point ball averages to `f(y)` itself. All evaluation paths
//! share that definition, so they agree bit for bit.
//!
//! Ties between balls go to the first `(center, threshold)` pair in
//! lexicographic order.

use rayon::prelude::*;
use thiserror::Error;

use crate::numeric::{exact_sum, PrefixSums};
use crate::space::{center_family, IntervalOrder, PointId, SpaceDescriptor};
use crate::varlp::PointFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaximalError {
    #[error("ball has no members")]
    EmptyBall,
    #[error("space is not interval-structured (needs 1-d labels with d(x,y) = |x − y|)")]
    NotIntervalStructured,
    #[error("function has {found} values, space has {expected} points")]
    ShapeMismatch { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalResult {
    pub values: Vec<f64>,
    /// `(center, threshold)` of a ball attaining `values[x]`; the ball is
    /// `{y : d(center, y) ≤ threshold}`.
    pub argmax_ball: Vec<(PointId, f64)>,
}

impl MaximalResult {
    /// CSV `point,f,Mf,argmax_center,argmax_threshold`.
    pub fn to_csv(&self, f: &PointFunction) -> String {
        use crate::numeric::fmt_num;
        let mut out = String::from("point,f,Mf,argmax_center,argmax_threshold\n");
        for (x, (&m, &(c, t))) in self.values.iter().zip(&self.argmax_ball).enumerate() {
            out.push_str(&format!("{x},{},{},{c},{}\n", fmt_num(f.get(x)), fmt_num(m), fmt_num(t)));
        }
        out
    }
}

fn check_len(space: &SpaceDescriptor, f: &PointFunction) -> Result<(), MaximalError> {
    if f.len() != space.n() {
        return Err(MaximalError::ShapeMismatch { expected: space.n(), found: f.len() });
    }
    Ok(())
}

#[inline]
fn average(count: usize, single: f64, mass_f: f64, mass: f64) -> f64 {
    if count == 1 {
        single
    } else {
        mass_f / mass
    }
}

/// Average of `f` over `members` with respect to the point masses.
pub fn ball_average(space: &SpaceDescriptor, members: &[PointId], f: &PointFunction) -> Result<f64, MaximalError> {
    match members {
        [] => Err(MaximalError::EmptyBall),
        [y] => Ok(f.get(*y)),
        _ => {
            let num = exact_sum(members.iter().map(|&y| space.weight(y) * f.get(y)));
            let den = exact_sum(members.iter().map(|&y| space.weight(y)));
            Ok(num / den)
        }
    }
}

/// Running per-point maxima for a contiguous block of centers.
struct Best {
    values: Vec<f64>,
    argmax: Vec<(PointId, f64)>,
}

impl Best {
    fn new(n: usize) -> Self {
        Self { values: vec![f64::NEG_INFINITY; n], argmax: vec![(0, 0.0); n] }
    }

    #[inline]
    fn offer(&mut self, y: PointId, value: f64, ball: (PointId, f64)) {
        if value > self.values[y] {
            self.values[y] = value;
            self.argmax[y] = ball;
        }
    }

    /// Merge a block of later centers; ties keep the earlier center.
    fn absorb(&mut self, later: Best) {
        for (y, (v, a)) in later.values.into_iter().zip(later.argmax).enumerate() {
            self.offer(y, v, a);
        }
    }

    fn finish(self) -> MaximalResult {
        MaximalResult { values: self.values, argmax_ball: self.argmax }
    }
}

/// Suffix maxima of `avg`, keeping the earliest index among ties.
fn suffix_max(avg: &[f64]) -> Vec<(f64, usize)> {
    let mut out = vec![(f64::NEG_INFINITY, 0); avg.len()];
    let mut cur = (f64::NEG_INFINITY, 0);
    for j in (0..avg.len()).rev() {
        if avg[j] >= cur.0 {
            cur = (avg[j], j);
        }
        out[j] = cur;
    }
    out
}

fn blocks(n: usize) -> Vec<std::ops::Range<usize>> {
    let parts = (rayon::current_num_threads() * 4).clamp(1, n.max(1));
    let size = n.div_ceil(parts).max(1);
    (0..n).step_by(size).map(|s| s..(s + size).min(n)).collect()
}

fn reduce_blocks(n: usize, run: impl Fn(std::ops::Range<usize>, &mut Best) + Sync) -> MaximalResult {
    let partial: Vec<Best> = blocks(n)
        .into_par_iter()
        .map(|range| {
            let mut best = Best::new(n);
            run(range, &mut best);
            best
        })
        .collect();
    let mut iter = partial.into_iter();
    let mut total = iter.next().unwrap_or_else(|| Best::new(n));
    for b in iter {
        total.absorb(b);
    }
    total.finish()
}

/// `Mf` over every distinct ball of the space. O(n² log n).
pub fn maximal_function(space: &SpaceDescriptor, f: &PointFunction) -> Result<MaximalResult, MaximalError> {
    check_len(space, f)?;
    let n = space.n();
    Ok(reduce_blocks(n, |centers, best| {
        for x in centers {
            let fam = center_family(space, x);
            let wf: Vec<f64> = fam.order.iter().map(|&y| space.weight(y) * f.get(y)).collect();
            let w: Vec<f64> = fam.order.iter().map(|&y| space.weight(y)).collect();
            let (pwf, pw) = (PrefixSums::new(&wf), PrefixSums::new(&w));
            let avg: Vec<f64> = fam
                .ends
                .iter()
                .map(|&end| average(end, f.get(fam.order[0]), pwf.range(0, end), pw.range(0, end)))
                .collect();
            let sup = suffix_max(&avg);
            let mut start = 0;
            for (j, &end) in fam.ends.iter().enumerate() {
                let (value, k) = sup[j];
                for &y in &fam.order[start..end] {
                    best.offer(y, value, (x, fam.thresholds[k]));
                }
                start = end;
            }
        }
    }))
}

/// Same values and argmax as [`maximal_function`] for interval-structured
/// spaces, using prefix sums over the coordinate order. O(n²).
pub fn maximal_function_interval(space: &SpaceDescriptor, f: &PointFunction) -> Result<MaximalResult, MaximalError> {
    check_len(space, f)?;
    let order = space.interval_order().ok_or(MaximalError::NotIntervalStructured)?;
    Ok(maximal_on_order(space, f, &order))
}

pub(crate) fn maximal_on_order(space: &SpaceDescriptor, f: &PointFunction, order: &IntervalOrder) -> MaximalResult {
    let n = space.n();
    let wf: Vec<f64> = order.order.iter().map(|&y| space.weight(y) * f.get(y)).collect();
    let w: Vec<f64> = order.order.iter().map(|&y| space.weight(y)).collect();
    let (pwf, pw) = (PrefixSums::new(&wf), PrefixSums::new(&w));
    let c = &order.coords;
    reduce_blocks(n, |centers, best| {
        // Per step j: the ball is positions lo[j]..hi[j] at threshold t[j].
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        let mut thresholds = Vec::with_capacity(n);
        let mut avg = Vec::with_capacity(n);
        for x in centers {
            lo.clear();
            hi.clear();
            thresholds.clear();
            avg.clear();
            let pos = order.position[x];
            let (mut l, mut h) = (pos, pos + 1);
            let mut t = 0.0;
            loop {
                lo.push(l);
                hi.push(h);
                thresholds.push(t);
                avg.push(average(h - l, f.get(x), pwf.range(l, h), pw.range(l, h)));
                let dl = if l > 0 { (c[pos] - c[l - 1]).abs() } else { f64::INFINITY };
                let dh = if h < n { (c[h] - c[pos]).abs() } else { f64::INFINITY };
                t = dl.min(dh);
                if t == f64::INFINITY {
                    break;
                }
                while l > 0 && (c[pos] - c[l - 1]).abs() == t {
                    l -= 1;
                }
                while h < n && (c[h] - c[pos]).abs() == t {
                    h += 1;
                }
            }
            let sup = suffix_max(&avg);
            for j in 0..avg.len() {
                let (value, k) = sup[j];
                let ball = (x, thresholds[k]);
                let (new_lo, new_hi) = if j == 0 { (pos, pos + 1) } else { (lo[j - 1], hi[j - 1]) };
                for p in (lo[j]..new_lo).chain(new_hi..hi[j]) {
                    best.offer(order.order[p], value, ball);
                }
                if j == 0 {
                    best.offer(x, value, ball);
                }
            }
        }
    })
}

/// Interval path when available, general path otherwise.
pub fn maximal_function_auto(space: &SpaceDescriptor, f: &PointFunction) -> Result<MaximalResult, MaximalError> {
    check_len(space, f)?;
    match space.interval_order() {
        Some(order) => Ok(maximal_on_order(space, f, &order)),
        None => maximal_function(space, f),
    }
}
