#![allow(dead_code)]

use maxblow::numeric::exact_sum;
use maxblow::space::{Metric, SpaceDescriptor};
use maxblow::varlp::PointFunction;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.01..2.0)).collect()
}

/// Random function with a sprinkling of exact zeros and repeated values, so
/// that ties between ball averages actually occur.
pub fn random_function(rng: &mut impl Rng, n: usize) -> PointFunction {
    let values = (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen_range(0.0..10.0),
        })
        .collect();
    PointFunction::new(values).unwrap()
}

/// One of: points on a line (sometimes on an integer lattice, so distances
/// repeat), points in the plane under l2 or linf, or an explicit table of a
/// random ultrametric-like quasi-metric.
pub fn random_space(rng: &mut impl Rng, n: usize) -> SpaceDescriptor {
    let weights = random_weights(rng, n);
    match rng.gen_range(0..4) {
        0 => {
            let mut ids: Vec<u32> = (0..4 * n as u32).collect();
            for i in 0..n {
                let j = rng.gen_range(i..ids.len());
                ids.swap(i, j);
            }
            let coords = ids[..n].iter().map(|&v| v as f64).collect();
            SpaceDescriptor::from_coordinates(1, coords, Metric::L2, weights).unwrap()
        }
        1 => {
            let coords = (0..2 * n).map(|_| rng.gen_range(0..16) as f64 + rng.gen_range(0.0..1e-3)).collect();
            let metric = if rng.gen_bool(0.5) { Metric::L2 } else { Metric::Linf };
            SpaceDescriptor::from_coordinates(2, coords, metric, weights).unwrap()
        }
        2 => {
            let coords = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            SpaceDescriptor::from_coordinates(1, coords, Metric::Circle, weights).unwrap()
        }
        _ => {
            // d(x, y) = max of per-level labels on the path: levels give many ties.
            let labels: Vec<[u8; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
            let mut table = vec![vec![0.0; n]; n];
            for x in 0..n {
                for y in 0..n {
                    if x != y {
                        let level = (0..3).find(|&l| labels[x][l] != labels[y][l]).map_or(0, |l| 3 - l);
                        table[x][y] = level as f64 + (x.abs_diff(y) % 3) as f64 * 0.25 + 0.5;
                    }
                }
            }
            SpaceDescriptor::from_table(table, weights).unwrap()
        }
    }
}

/// `(value, center, threshold)` per point by direct enumeration: every
/// closed sublevel ball of every center, each average summed from scratch.
pub fn naive_maximal(space: &SpaceDescriptor, f: &PointFunction) -> Vec<(f64, usize, f64)> {
    let n = space.n();
    let mut best = vec![(f64::NEG_INFINITY, 0, 0.0); n];
    for c in 0..n {
        let row = space.row(c);
        let mut thresholds = row.clone();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        for &t in &thresholds {
            let members: Vec<usize> = (0..n).filter(|&z| row[z] <= t).collect();
            let avg = if members.len() == 1 {
                f.get(members[0])
            } else {
                exact_sum(members.iter().map(|&z| space.weight(z) * f.get(z)))
                    / exact_sum(members.iter().map(|&z| space.weight(z)))
            };
            for &z in &members {
                if avg > best[z].0 {
                    best[z] = (avg, c, t);
                }
            }
        }
    }
    best
}
