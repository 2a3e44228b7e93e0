//! DCT-signature saliency maps.
//!
//! The sign pattern of an image's DCT spectrum is a compact signature of
//! where its foreground energy lives: inverse-transforming the signs alone
//! and squaring concentrates energy on spatially sparse structure. Each
//! exposure is scored at a reduced working width, blurred, upsampled back,
//! and rescaled to [0, 1].

use crate::config::FusionConfig;
use crate::dct::{dct2, idct2, DctPlane};
use crate::error::{FusionError, Result};
use crate::filter::{gaussian_blur, rescale_unit, resize_bilinear};
use crate::parallel;
use crate::raster::{Image, Plane};
use crate::stack::{ExposureStack, WeightStack};

/// `sign(v)` with `sign(0) = 0`.
#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Working size for the signature transform: cap the width at
/// `saliency_width`, scale the height to preserve aspect (at least 1).
fn working_size(w: usize, h: usize, max_width: usize) -> (usize, usize) {
    if w <= max_width {
        return (w, h);
    }
    let sw = max_width;
    let sh = ((h as f64 * sw as f64 / w as f64).round() as usize).max(1);
    (sw, sh)
}

/// Ternary signs of a spectrum. Coefficients within `1e-12` of the peak
/// magnitude count as zero: analytically-zero coefficients (constant
/// regions) only reach floating round-off, and must not fabricate signature
/// energy. The cutoff is relative, so the signature is invariant under
/// exact rescaling of the input.
fn signature(freq: &DctPlane) -> Plane {
    let peak = freq
        .coefficients()
        .data()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let cutoff = peak * 1e-12;
    freq.coefficients()
        .map(move |v| if v.abs() <= cutoff { 0.0 } else { sign(v) })
}

/// Signature reconstruction of one channel at working size:
/// `idct2(sign(dct2(x)))`.
fn signature_reconstruction(channel: &Plane) -> Plane {
    idct2(&DctPlane::from_coefficients(signature(&dct2(channel))))
}

/// Saliency map of one RGB image: per-channel signature reconstructions are
/// squared and summed, Gaussian-blurred at working size, bilinearly
/// upsampled to the input size, and rescaled to [0, 1] (constant maps
/// become 0.5).
pub fn image_signature_saliency(image: &Image, config: &FusionConfig) -> Result<Plane> {
    if image.channels() != 3 {
        return Err(FusionError::ChannelMismatch(image.channels()));
    }
    let (w, h) = (image.width(), image.height());
    let (sw, sh) = working_size(w, h, config.saliency_width);

    let squared = parallel::map_indexed(3, |c| {
        let small = resize_bilinear(image.plane(c), sw, sh);
        let recon = signature_reconstruction(&small);
        recon.map(|v| v * v)
    });
    // Fixed three-term sum; order never varies.
    let energy = squared[0]
        .zip_map(&squared[1], |a, b| a + b)
        .zip_map(&squared[2], |ab, c| ab + c);

    let blurred = gaussian_blur(&energy, config.saliency_blur_sigma);
    let full = resize_bilinear(&blurred, w, h);
    Ok(rescale_unit(&full))
}

/// Per-exposure saliency maps `S_n` for a stack, in stack order. Raw branch
/// outputs, not yet normalized across the stack.
pub fn saliency_maps(stack: &ExposureStack, config: &FusionConfig) -> Result<WeightStack> {
    let maps = parallel::map_indexed(stack.len(), |i| {
        image_signature_saliency(&stack.images()[i], config)
    });
    let mut out = Vec::with_capacity(maps.len());
    for m in maps {
        out.push(m?);
    }
    WeightStack::new(out)
}
