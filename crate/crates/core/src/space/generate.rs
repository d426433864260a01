//! Standard example spaces.

use super::{Labels, Metric, SpaceDescriptor, SpaceError};

fn check_depth(depth: u32) -> Result<(), SpaceError> {
    if (1..=24).contains(&depth) {
        Ok(())
    } else {
        Err(SpaceError::DepthOutOfRange(depth))
    }
}

fn dyadic_centers(depth: u32) -> Vec<f64> {
    let denom = (1u64 << (depth + 1)) as f64;
    (0..1u64 << depth).map(|i| (2 * i + 1) as f64 / denom).collect()
}

/// `2^depth` cells of `[0, 1)` at their centers, Lebesgue weights.
pub fn gen_dyadic_interval(depth: u32) -> Result<SpaceDescriptor, SpaceError> {
    gen_power_weight(depth, 0.0)
}

/// Dyadic geometry with weight `center^alpha · 2^-depth`.
pub fn gen_power_weight(depth: u32, alpha: f64) -> Result<SpaceDescriptor, SpaceError> {
    check_depth(depth)?;
    if !(0.0..=3.0).contains(&alpha) {
        return Err(SpaceError::AlphaOutOfRange(alpha));
    }
    let centers = dyadic_centers(depth);
    let cell = 1.0 / (1u64 << depth) as f64;
    let weights = centers.iter().map(|c| c.powf(alpha) * cell).collect();
    Ok(SpaceDescriptor::coordinates_unchecked(
        Labels::new(1, centers),
        Metric::L2,
        weights,
    ))
}

/// `side^dim` grid points on the unit torus with the wrap-around
/// max-coordinate distance and uniform weights.
pub fn gen_grid_torus(dim: usize, side: usize) -> Result<SpaceDescriptor, SpaceError> {
    if !(1..=3).contains(&dim) {
        return Err(SpaceError::SizeOutOfRange(format!("dim={dim} not in 1..=3")));
    }
    let total = (side as u128).pow(dim as u32);
    if side == 0 || total > 1 << 20 {
        return Err(SpaceError::SizeOutOfRange(format!("{side}^{dim} points")));
    }
    let total = total as usize;
    let mut coords = Vec::with_capacity(total * dim);
    for id in 0..total {
        let mut rest = id;
        for _ in 0..dim {
            coords.push((rest % side) as f64 / side as f64);
            rest /= side;
        }
    }
    let weights = vec![1.0 / total as f64; total];
    Ok(SpaceDescriptor::torus_unchecked(dim, side, Labels::new(dim, coords), weights))
}
