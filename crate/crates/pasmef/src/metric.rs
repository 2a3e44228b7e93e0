//! MEF-SSIM: structural fidelity of a fused image against its source stack.
//!
//! Every fused-image patch is compared to a per-patch "desired" patch
//! assembled from the stack: the strongest contrast any exposure offers,
//! along a consensus structure direction weighted toward high-contrast
//! exposures. Patch mean (brightness) is deliberately excluded; the score
//! measures contrast and structure only.

use crate::config::not_positive;
use crate::error::{FusionError, Result};
use crate::parallel;
use crate::raster::{to_luminance, Image, Plane};
use crate::stack::ExposureStack;

/// MEF-SSIM parameters. Defaults: 8x8 patches, stride 1, stability constant
/// `0.0009` (on a [0, 1] intensity scale), strength-weighting exponent 4.
#[derive(Debug, Clone, PartialEq)]
pub struct MefSsimConfig {
    /// Square patch side in pixels.
    pub patch_size: usize,
    /// Patch step in pixels; 1 evaluates every fully-inside position.
    pub stride: usize,
    /// Stability constant added to variance terms.
    pub stability_const: f64,
    /// Exponent applied to patch strengths when weighting structures.
    pub strength_exponent: f64,
}

impl Default for MefSsimConfig {
    fn default() -> Self {
        Self {
            patch_size: 8,
            stride: 1,
            stability_const: 0.0009,
            strength_exponent: 4.0,
        }
    }
}

impl MefSsimConfig {
    fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.patch_size < 2 {
            return Err(FusionError::InvalidConfig(
                "metric patch size must be at least 2".into(),
            ));
        }
        if self.stride == 0 {
            return Err(FusionError::InvalidConfig(
                "metric stride must be at least 1".into(),
            ));
        }
        if not_positive(self.stability_const) {
            return Err(FusionError::InvalidConfig(
                "metric stability constant must be positive".into(),
            ));
        }
        if not_positive(self.strength_exponent) {
            return Err(FusionError::InvalidConfig(
                "metric strength exponent must be positive".into(),
            ));
        }
        if width < self.patch_size || height < self.patch_size {
            return Err(FusionError::InvalidConfig(format!(
                "metric patch size {} exceeds the {}x{} image",
                self.patch_size, width, height
            )));
        }
        Ok(())
    }
}

/// Gather one `p x p` patch starting at `(x0, y0)` into `buf`.
fn gather_patch(plane: &Plane, x0: usize, y0: usize, p: usize, buf: &mut [f64]) {
    let w = plane.width();
    let data = plane.data();
    for dy in 0..p {
        let row = &data[(y0 + dy) * w + x0..(y0 + dy) * w + x0 + p];
        buf[dy * p..(dy + 1) * p].copy_from_slice(row);
    }
}

fn mean(buf: &[f64]) -> f64 {
    buf.iter().sum::<f64>() / buf.len() as f64
}

/// Score the fused image against the stack. Returns the mean local score
/// over all fully-inside patch positions; 1.0 is a perfect score and values
/// near it indicate the fused image carries each patch's best structure.
pub fn mef_ssim(stack: &ExposureStack, fused: &Image, config: &MefSsimConfig) -> Result<f64> {
    let (w, h) = (stack.width(), stack.height());
    if fused.width() != w || fused.height() != h {
        return Err(FusionError::SizeMismatch(format!(
            "fused image is {}x{}, stack is {}x{}",
            fused.width(),
            fused.height(),
            w,
            h
        )));
    }
    config.validate(w, h)?;

    let lumas = stack.luminances();
    let fused_luma = to_luminance(fused);
    let n = lumas.len();
    let p = config.patch_size;
    let pp = p * p;
    let stride = config.stride;
    let c = config.stability_const;
    let q = config.strength_exponent;

    let xs = (w - p) / stride + 1;
    let ys = (h - p) / stride + 1;

    // One task per patch row: deterministic order, scratch reused across
    // the row's positions.
    let row_sums = parallel::map_indexed(ys, |py| {
        let y0 = py * stride;
        let mut centered = vec![0.0; n * pp];
        let mut strengths = vec![0.0; n];
        let mut desired = vec![0.0; pp];
        let mut fpatch = vec![0.0; pp];
        let mut sum = 0.0;
        for px in 0..xs {
            let x0 = px * stride;

            // Per-exposure decomposition: mean removed, strength = norm of
            // the centered patch, structure = its direction.
            for (k, luma) in lumas.iter().enumerate() {
                let buf = &mut centered[k * pp..(k + 1) * pp];
                gather_patch(luma, x0, y0, p, buf);
                let mu = mean(buf);
                for v in buf.iter_mut() {
                    *v -= mu;
                }
                strengths[k] = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
            }

            // Desired contrast: the strongest any exposure offers here.
            let c_hat = strengths.iter().fold(0.0f64, |m, &s| m.max(s));

            // Desired structure: strength^q weighted mean of the unit
            // structures, renormalized. With weights w_k = s_k^q / sum and
            // structures c_k / s_k, each term is s_k^(q-1) * c_k / sum.
            let weight_total: f64 = strengths.iter().map(|&s| s.powf(q)).sum();
            desired.iter_mut().for_each(|v| *v = 0.0);
            if weight_total > 0.0 {
                for k in 0..n {
                    if strengths[k] <= 0.0 {
                        continue;
                    }
                    let coef = strengths[k].powf(q - 1.0) / weight_total;
                    let buf = &centered[k * pp..(k + 1) * pp];
                    for (d, &v) in desired.iter_mut().zip(buf) {
                        *d += coef * v;
                    }
                }
            }
            let norm = desired.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let scale = c_hat / norm;
                for d in desired.iter_mut() {
                    *d *= scale;
                }
            } else {
                desired.iter_mut().for_each(|v| *v = 0.0);
            }

            // Fused patch, mean removed (brightness is not scored).
            gather_patch(&fused_luma, x0, y0, p, &mut fpatch);
            let fmu = mean(&fpatch);
            for v in fpatch.iter_mut() {
                *v -= fmu;
            }

            // Structural similarity of the zero-mean patches.
            let var_d = desired.iter().map(|v| v * v).sum::<f64>() / pp as f64;
            let var_f = fpatch.iter().map(|v| v * v).sum::<f64>() / pp as f64;
            let cov = desired.iter().zip(&fpatch).map(|(a, b)| a * b).sum::<f64>() / pp as f64;
            sum += (2.0 * cov + c) / (var_d + var_f + c);
        }
        sum
    });

    let total: f64 = row_sums.iter().sum();
    Ok(total / (xs * ys) as f64)
}
