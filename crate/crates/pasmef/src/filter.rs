//! Separable convolution, Gaussian smoothing, bilinear resampling, and the
//! unit-interval rescale shared by the score and saliency branches.

use crate::parallel;
use crate::raster::Plane;

/// Mirror an out-of-range index back into `0..len` without repeating the
/// edge sample (`-1 -> 1`, `len -> len - 2`). A length-1 axis folds to 0.
///
/// This policy preserves index parity (reflections are about 0 and about
/// `len - 1`, both mapping even offsets to even offsets), which is what lets
/// zero-stuffed upsampling keep normalized kernels summing to one at borders.
pub(crate) fn reflect(index: isize, len: usize) -> usize {
    debug_assert!(len > 0);
    if len == 1 {
        return 0;
    }
    let max = (len - 1) as isize;
    let mut i = index;
    while i < 0 || i > max {
        if i < 0 {
            i = -i;
        }
        if i > max {
            i = 2 * max - i;
        }
    }
    i as usize
}

/// Odd-length normalized Gaussian taps with radius `ceil(3 sigma)`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as usize;
    let radius = radius.max(1);
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= sum;
    }
    kernel
}

/// Convolve each row with an odd-length kernel, mirrored boundary.
pub(crate) fn convolve_rows(src: &Plane, kernel: &[f64]) -> Plane {
    debug_assert!(kernel.len() % 2 == 1);
    let (w, h) = (src.width(), src.height());
    let radius = (kernel.len() / 2) as isize;
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |y, row| {
        let srow = &data[y * w..(y + 1) * w];
        for (x, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = reflect(x as isize + k as isize - radius, w);
                acc += kv * srow[sx];
            }
            *slot = acc;
        }
    });
    out
}

/// Convolve each column with an odd-length kernel, mirrored boundary.
pub(crate) fn convolve_cols(src: &Plane, kernel: &[f64]) -> Plane {
    debug_assert!(kernel.len() % 2 == 1);
    let (w, h) = (src.width(), src.height());
    let radius = (kernel.len() / 2) as isize;
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |y, row| {
        for (k, &kv) in kernel.iter().enumerate() {
            let sy = reflect(y as isize + k as isize - radius, h);
            let srow = &data[sy * w..(sy + 1) * w];
            for x in 0..w {
                row[x] += kv * srow[x];
            }
        }
    });
    out
}

/// Separable Gaussian blur (rows then columns), mirrored boundary.
pub fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    let kernel = gaussian_kernel(sigma);
    convolve_cols(&convolve_rows(src, &kernel), &kernel)
}

/// Bilinear resample to `dst_w x dst_h` under the pixel-center convention:
/// output center `(x + 0.5, y + 0.5)` maps to source coordinates scaled by
/// `src/dst`, with source samples at integer-plus-half positions. Sampling
/// clamps to the source extent, so constants are preserved exactly.
pub fn resize_bilinear(src: &Plane, dst_w: usize, dst_h: usize) -> Plane {
    assert!(dst_w > 0 && dst_h > 0, "target dimensions must be nonzero");
    let (sw, sh) = (src.width(), src.height());
    if sw == dst_w && sh == dst_h {
        return src.clone();
    }
    let scale_x = sw as f64 / dst_w as f64;
    let scale_y = sh as f64 / dst_h as f64;
    let data = src.data();
    let mut out = Plane::new(dst_w, dst_h);
    parallel::for_each_chunk(out.data_mut(), dst_w, |y, row| {
        let sy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (sh - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(sh - 1);
        let fy = sy - y0 as f64;
        let row0 = &data[y0 * sw..(y0 + 1) * sw];
        let row1 = &data[y1 * sw..(y1 + 1) * sw];
        // Interpolate in lerp form a + t*(b - a): equal neighbors reproduce
        // their value exactly, so constant planes resize without drift.
        for (x, slot) in row.iter_mut().enumerate() {
            let sx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (sw - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(sw - 1);
            let fx = sx - x0 as f64;
            let top = row0[x0] + fx * (row0[x1] - row0[x0]);
            let bottom = row1[x0] + fx * (row1[x1] - row1[x0]);
            *slot = top + fy * (bottom - top);
        }
    });
    out
}

/// Affinely rescale samples to [0, 1]. A constant plane maps to 0.5.
pub(crate) fn rescale_unit(src: &Plane) -> Plane {
    let (mn, mx) = src.min_max();
    if mx == mn {
        return Plane::filled(src.width(), src.height(), 0.5);
    }
    let span = mx - mn;
    src.map(move |v| (v - mn) / span)
}
