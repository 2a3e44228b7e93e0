//! Adaptive well-exposedness weighting.
//!
//! Instead of scoring distance from a fixed mid-gray, each exposure is
//! scored against its own statistics: a dark image (low mean luminance)
//! rewards bright pixels and vice versa, with the spread set by the image's
//! luminance standard deviation.

use crate::config::FusionConfig;
use crate::error::Result;
use crate::parallel;
use crate::raster::Plane;
use crate::stack::{ExposureStack, WeightStack};

/// Mean and population standard deviation of a luminance plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuminanceStats {
    pub mean: f64,
    pub std: f64,
}

/// Compute [`LuminanceStats`] over every sample of `luma`.
pub fn luminance_stats(luma: &Plane) -> LuminanceStats {
    let w = luma.width();
    let n = luma.len() as f64;
    let data = luma.data();

    let row_sums = parallel::map_indexed(luma.height(), |y| {
        data[y * w..(y + 1) * w].iter().sum::<f64>()
    });
    let mean = row_sums.iter().sum::<f64>() / n;

    let row_sq = parallel::map_indexed(luma.height(), |y| {
        data[y * w..(y + 1) * w]
            .iter()
            .map(|&v| {
                let d = v - mean;
                d * d
            })
            .sum::<f64>()
    });
    let var = row_sq.iter().sum::<f64>() / n;
    LuminanceStats {
        mean,
        std: var.sqrt(),
    }
}

/// Well-exposedness map for one luminance plane with known statistics:
/// `exp(-(Y - (1 - mean))^2 / (2 * max(std, sigma_floor)^2))`.
///
/// The target `1 - mean` adapts per exposure; `sigma_floor` keeps the
/// denominator sane for near-constant images.
pub fn adaptive_exposedness_with_stats(
    luma: &Plane,
    stats: &LuminanceStats,
    sigma_floor: f64,
) -> Plane {
    assert!(sigma_floor > 0.0, "sigma_floor must be positive");
    let target = 1.0 - stats.mean;
    let sigma = stats.std.max(sigma_floor);
    let denom = 2.0 * sigma * sigma;
    luma.map(move |v| {
        let d = v - target;
        (-(d * d) / denom).exp()
    })
}

/// Well-exposedness map for one luminance plane, computing the statistics
/// internally.
pub fn adaptive_exposedness(luma: &Plane, config: &FusionConfig) -> Plane {
    let stats = luminance_stats(luma);
    adaptive_exposedness_with_stats(luma, &stats, config.sigma_floor)
}

/// Per-exposure well-exposedness maps `A_n` for a stack, in stack order.
/// The maps are raw branch outputs, not yet normalized across the stack.
pub fn exposedness_maps(stack: &ExposureStack, config: &FusionConfig) -> Result<WeightStack> {
    let lumas = stack.luminances();
    let maps = parallel::map_indexed(lumas.len(), |i| adaptive_exposedness(&lumas[i], config));
    WeightStack::new(maps)
}
