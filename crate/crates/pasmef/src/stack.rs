//! Exposure stacks, weight stacks, and sum-to-one normalization.

use std::path::Path;

use crate::error::{FusionError, Result};
use crate::io::{read_image, STACK_EXTENSIONS};
use crate::parallel;
use crate::raster::{to_luminance, Image, Plane};

/// Sum `terms` after sorting by value, so the result does not depend on the
/// order the terms arrived in. Used for every cross-exposure accumulation,
/// which makes fusion bit-identical under permutations of the stack.
pub(crate) fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// An ordered set of equally sized RGB exposures of the same scene,
/// darkest first.
#[derive(Debug, Clone)]
pub struct ExposureStack {
    images: Vec<Image>,
}

impl ExposureStack {
    /// Validate and wrap exposures: at least one image, all RGB, all the
    /// same size, at least 2x2.
    pub fn new(images: Vec<Image>) -> Result<Self> {
        let first = images
            .first()
            .ok_or_else(|| FusionError::EmptyStack(Path::new(".").to_path_buf()))?;
        let (w, h) = (first.width(), first.height());
        if w < 2 || h < 2 {
            return Err(FusionError::ImageTooSmall {
                width: w,
                height: h,
            });
        }
        for img in &images {
            if img.channels() != 3 {
                return Err(FusionError::ChannelMismatch(img.channels()));
            }
            if img.width() != w || img.height() != h {
                return Err(FusionError::SizeMismatch(format!(
                    "stack images differ in size: {}x{} vs {}x{}",
                    img.width(),
                    img.height(),
                    w,
                    h
                )));
            }
        }
        Ok(Self { images })
    }

    pub fn images(&self) -> &[Image] {
        &self.images
    }

    /// Number of exposures.
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn width(&self) -> usize {
        self.images[0].width()
    }

    pub fn height(&self) -> usize {
        self.images[0].height()
    }

    /// Per-exposure BT.601 luminance planes, in stack order.
    pub fn luminances(&self) -> Vec<Plane> {
        parallel::map_indexed(self.len(), |i| to_luminance(&self.images[i]))
    }
}

/// Load every decodable image under `dir` (extensions png/jpg/jpeg/tif/tiff,
/// matched case-insensitively) in ascending filename order. From darkest to
/// brightest is the expected naming convention.
pub fn load_stack(dir: &Path) -> Result<ExposureStack> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase());
        if let Some(ext) = ext {
            if STACK_EXTENSIONS.contains(&ext.as_str()) {
                paths.push(path);
            }
        }
    }
    if paths.is_empty() {
        return Err(FusionError::EmptyStack(dir.to_path_buf()));
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let decoded = parallel::map_indexed(paths.len(), |i| read_image(&paths[i]));
    let mut images = Vec::with_capacity(decoded.len());
    for (img, path) in decoded.into_iter().zip(&paths) {
        let img = img?;
        if let Some(first) = images.first() {
            let first: &Image = first;
            if img.width() != first.width() || img.height() != first.height() {
                return Err(FusionError::DimensionMismatch {
                    path: path.clone(),
                    want_w: first.width(),
                    want_h: first.height(),
                    got_w: img.width(),
                    got_h: img.height(),
                });
            }
        }
        images.push(img);
    }
    ExposureStack::new(images)
}

/// Per-exposure weight maps. `normalized` records whether the maps form a
/// per-pixel partition of unity; fusion only accepts normalized stacks.
#[derive(Debug, Clone)]
pub struct WeightStack {
    maps: Vec<Plane>,
    normalized: bool,
}

impl WeightStack {
    /// Wrap raw (not yet normalized) weight maps; all must share one size.
    pub fn new(maps: Vec<Plane>) -> Result<Self> {
        if maps.is_empty() {
            return Err(FusionError::SizeMismatch(
                "weight stack must not be empty".into(),
            ));
        }
        if !maps.iter().all(|m| m.same_size(&maps[0])) {
            return Err(FusionError::SizeMismatch(
                "weight maps differ in size".into(),
            ));
        }
        Ok(Self {
            maps,
            normalized: false,
        })
    }

    pub(crate) fn new_normalized(maps: Vec<Plane>) -> Self {
        Self {
            maps,
            normalized: true,
        }
    }

    pub fn maps(&self) -> &[Plane] {
        &self.maps
    }

    /// Number of maps (one per exposure).
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn width(&self) -> usize {
        self.maps[0].width()
    }

    pub fn height(&self) -> usize {
        self.maps[0].height()
    }

    pub fn into_maps(self) -> Vec<Plane> {
        self.maps
    }
}

/// Divide each map by the per-pixel sum across the stack. Pixels whose sum
/// falls below `1e-12` get the uniform weight `1/N` in every map, so the
/// output is a partition of unity everywhere. Inputs must be nonnegative.
///
/// The per-pixel sum is accumulated in value-sorted order, so permuting the
/// input maps permutes the output maps bit-for-bit.
pub fn normalize_sum_to_one(weights: &WeightStack) -> WeightStack {
    let n = weights.len();
    let (w, h) = (weights.width(), weights.height());
    let uniform = 1.0 / n as f64;

    let mut denom = Plane::new(w, h);
    let maps = weights.maps();
    parallel::for_each_chunk(denom.data_mut(), w, |y, row| {
        let mut terms = vec![0.0; n];
        for (x, slot) in row.iter_mut().enumerate() {
            for (t, m) in terms.iter_mut().zip(maps) {
                let v = m.get(x, y);
                debug_assert!(v >= 0.0, "normalize_sum_to_one expects nonnegative maps");
                *t = v;
            }
            *slot = sorted_sum(&mut terms);
        }
    });

    let normalized = parallel::map_indexed(n, |i| {
        let src = &maps[i];
        let mut out = Plane::new(w, h);
        let dd = denom.data();
        let sd = src.data();
        parallel::for_each_chunk(out.data_mut(), w, |y, row| {
            let o = y * w;
            for (x, slot) in row.iter_mut().enumerate() {
                let d = dd[o + x];
                *slot = if d < 1e-12 { uniform } else { sd[o + x] / d };
            }
        });
        out
    });
    WeightStack::new_normalized(normalized)
}
