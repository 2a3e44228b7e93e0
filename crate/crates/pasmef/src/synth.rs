//! Deterministic synthetic exposure stacks for tests and benches.
//!
//! A smooth high-dynamic-range radiance scene is exposed at log-spaced
//! shutter times, tone-mapped, and clamped, giving a stack that ranges from
//! underexposed (shadows crushed) to overexposed (highlights clipped) with
//! structure that moves between exposures. Everything is a pure function of
//! the pixel coordinates, so stacks are reproducible across runs, platforms,
//! and thread counts.

use crate::raster::{Image, Plane};
use crate::stack::ExposureStack;

/// Scene radiance at (x, y) in [0, 1] normalized coordinates. Spans roughly
/// four orders of magnitude: a dim textured floor, two bright blobs, and a
/// sharp-edged window.
fn radiance(u: f64, v: f64) -> f64 {
    let floor = 0.02 + 0.015 * ((12.0 * u).sin() * (9.0 * v).cos() + 1.0);
    let blob = |cx: f64, cy: f64, s: f64, peak: f64| {
        let d2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
        peak * (-d2 / (2.0 * s * s)).exp()
    };
    let window = if u > 0.62 && u < 0.88 && v > 0.15 && v < 0.45 {
        30.0
    } else {
        0.0
    };
    floor + blob(0.28, 0.62, 0.10, 4.0) + blob(0.55, 0.30, 0.05, 12.0) + window
}

/// One simulated exposure of the radiance scene: scale by shutter time,
/// apply a display-like 1/2.2 response, clamp to [0, 1]. A small per-channel
/// gain keeps the three channels distinct without changing the structure.
fn expose(width: usize, height: usize, shutter: f64, gain: f64) -> Plane {
    Plane::from_fn(width, height, |x, y| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        let e = radiance(u, v) * shutter * gain;
        e.powf(1.0 / 2.2).clamp(0.0, 1.0)
    })
}

/// Build an `n`-image stack of the synthetic scene, darkest first. Shutter
/// times are log-spaced so each step brightens by a constant factor.
///
/// Panics if `n` is zero or the dimensions are below the 2x2 stack minimum;
/// test fixtures are expected to be well-formed.
pub fn synthetic_stack(width: usize, height: usize, n: usize) -> ExposureStack {
    assert!(n >= 1, "stack needs at least one exposure");
    let images = (0..n)
        .map(|i| {
            // n == 1 gets the mid exposure; otherwise span 2^-4 .. 2^2.
            let t = if n == 1 {
                0.5
            } else {
                i as f64 / (n - 1) as f64
            };
            let shutter = (2.0f64).powf(-4.0 + 6.0 * t);
            Image::rgb(
                expose(width, height, shutter, 1.00),
                expose(width, height, shutter, 0.97),
                expose(width, height, shutter, 1.03),
            )
            .expect("synthetic planes share dimensions")
        })
        .collect();
    ExposureStack::new(images).expect("synthetic stack is well-formed")
}
