//! Gaussian and Laplacian pyramids built with the 5-tap binomial kernel
//! `[1, 4, 6, 4, 1] / 16` and a mirrored (edge-excluding) boundary.
//!
//! The boundary choice is load-bearing: mirroring about the edge sample
//! preserves index parity, so when upsampling blurs a zero-stuffed grid,
//! every output pixel draws either from the even (sample) taps `{2, 12, 2}/16`
//! or the odd taps `{8, 8}/16` — both summing to one. That keeps upsampling
//! constant-preserving at every size, which in turn keeps a normalized
//! weight pyramid a partition of unity at every level.

use crate::error::{FusionError, Result};
use crate::filter::{convolve_cols, convolve_rows};
use crate::parallel;
use crate::raster::Plane;

const KERNEL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
/// Upsampling kernel: the binomial taps doubled per axis, compensating the
/// energy lost to the stuffed zeros.
const UP_KERNEL: [f64; 5] = [2.0 / 16.0, 8.0 / 16.0, 12.0 / 16.0, 8.0 / 16.0, 2.0 / 16.0];

/// Which decomposition a [`Pyramid`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidKind {
    /// Successively blurred and decimated copies.
    Gaussian,
    /// Band-pass detail levels plus the coarsest Gaussian as residual.
    Laplacian,
}

/// An image pyramid, finest level first.
#[derive(Debug, Clone)]
pub struct Pyramid {
    levels: Vec<Plane>,
    kind: PyramidKind,
}

impl Pyramid {
    pub fn levels(&self) -> &[Plane] {
        &self.levels
    }

    pub fn kind(&self) -> PyramidKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn into_levels(self) -> Vec<Plane> {
        self.levels
    }

    /// Reassemble levels produced by pyramid arithmetic (e.g. fused detail
    /// levels) into a pyramid of the given kind. Sizes must chain by
    /// `ceil(d / 2)` from one level to the next.
    pub fn from_levels(levels: Vec<Plane>, kind: PyramidKind) -> Result<Self> {
        if levels.is_empty() {
            return Err(FusionError::SizeMismatch("pyramid has no levels".into()));
        }
        for k in 0..levels.len() - 1 {
            let ok = levels[k].width().div_ceil(2) == levels[k + 1].width()
                && levels[k].height().div_ceil(2) == levels[k + 1].height();
            if !ok {
                return Err(FusionError::SizeMismatch(format!(
                    "level {} is {}x{}, expected {}x{}",
                    k + 1,
                    levels[k + 1].width(),
                    levels[k + 1].height(),
                    levels[k].width().div_ceil(2),
                    levels[k].height().div_ceil(2)
                )));
            }
        }
        Ok(Self { levels, kind })
    }
}

/// Largest valid level count for a `width x height` image:
/// `floor(log2(min(width, height)))`.
pub fn max_levels(width: usize, height: usize) -> usize {
    let m = width.min(height);
    if m == 0 {
        0
    } else {
        m.ilog2() as usize
    }
}

/// Default level count: one less than the maximum, at least 1.
pub fn auto_levels(width: usize, height: usize) -> usize {
    max_levels(width, height).saturating_sub(1).max(1)
}

fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    let max = max_levels(width, height);
    if levels == 0 || levels > max {
        return Err(FusionError::InvalidLevels {
            requested: levels,
            max,
        });
    }
    Ok(())
}

fn blur(src: &Plane) -> Plane {
    convolve_cols(&convolve_rows(src, &KERNEL), &KERNEL)
}

/// Keep even-index rows and columns; output size is `ceil(d / 2)` per axis.
fn decimate(src: &Plane) -> Plane {
    let (w, h) = (src.width(), src.height());
    let (dw, dh) = (w.div_ceil(2), h.div_ceil(2));
    let data = src.data();
    let mut out = Plane::new(dw, dh);
    parallel::for_each_chunk(out.data_mut(), dw, |y, row| {
        let srow = &data[(2 * y) * w..(2 * y) * w + w];
        for (x, slot) in row.iter_mut().enumerate() {
            *slot = srow[2 * x];
        }
    });
    out
}

/// One reduction step: blur, then keep even samples.
pub(crate) fn downsample(src: &Plane) -> Plane {
    decimate(&blur(src))
}

/// Zero-stuff `src` onto the `target_w x target_h` grid (samples at even
/// indices) and blur with the doubled kernel. The target must be the finer
/// size the source was decimated from: `ceil(target / 2) == source` per axis.
pub(crate) fn upsample(src: &Plane, target_w: usize, target_h: usize) -> Plane {
    assert_eq!(target_w.div_ceil(2), src.width(), "upsample width pairing");
    assert_eq!(
        target_h.div_ceil(2),
        src.height(),
        "upsample height pairing"
    );
    let sw = src.width();
    let data = src.data();
    let mut stuffed = Plane::new(target_w, target_h);
    parallel::for_each_chunk(stuffed.data_mut(), target_w, |y, row| {
        if y % 2 == 0 {
            let srow = &data[(y / 2) * sw..(y / 2) * sw + sw];
            for (sx, &v) in srow.iter().enumerate() {
                row[2 * sx] = v;
            }
        }
    });
    convolve_cols(&convolve_rows(&stuffed, &UP_KERNEL), &UP_KERNEL)
}

/// Gaussian pyramid: level 0 is the input, each coarser level is
/// `decimate(blur(previous))`.
pub fn gaussian_pyramid(base: &Plane, levels: usize) -> Result<Pyramid> {
    check_levels(base.width(), base.height(), levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push(base.clone());
    for _ in 1..levels {
        let next = downsample(out.last().expect("nonempty"));
        out.push(next);
    }
    Ok(Pyramid {
        levels: out,
        kind: PyramidKind::Gaussian,
    })
}

/// Laplacian pyramid: `L_k = G_k - upsample(G_{k+1})` for all but the last
/// level, which stores the coarsest Gaussian as the residual.
pub fn laplacian_pyramid(base: &Plane, levels: usize) -> Result<Pyramid> {
    let gauss = gaussian_pyramid(base, levels)?.into_levels();
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels - 1 {
        let up = upsample(&gauss[k + 1], gauss[k].width(), gauss[k].height());
        out.push(gauss[k].zip_map(&up, |g, u| g - u));
    }
    out.push(gauss[levels - 1].clone());
    Ok(Pyramid {
        levels: out,
        kind: PyramidKind::Laplacian,
    })
}

/// Invert [`laplacian_pyramid`]: starting from the residual, repeatedly
/// upsample and add the next finer detail level.
pub fn collapse(pyramid: &Pyramid) -> Result<Plane> {
    if pyramid.kind != PyramidKind::Laplacian {
        return Err(FusionError::InvalidConfig(
            "collapse expects a Laplacian pyramid".into(),
        ));
    }
    let levels = pyramid.levels();
    let mut acc = levels[levels.len() - 1].clone();
    for detail in levels[..levels.len() - 1].iter().rev() {
        let up = upsample(&acc, detail.width(), detail.height());
        acc = detail.zip_map(&up, |d, u| d + u);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |x, y| {
            0.1 + 0.8 * ((x * 13 + y * 7) % 29) as f64 / 29.0
        })
    }

    #[test]
    fn level_size_caps() {
        assert_eq!(max_levels(512, 768), 9);
        assert_eq!(max_levels(768, 512), 9);
        assert_eq!(max_levels(2, 2), 1);
        assert_eq!(max_levels(33, 47), 5);
        assert_eq!(auto_levels(512, 768), 8);
        assert_eq!(auto_levels(2, 2), 1);
        assert_eq!(auto_levels(3, 1000), 1);
    }

    #[test]
    fn invalid_level_counts_are_rejected() {
        let p = ramp(16, 16);
        for levels in [0, 5, 100] {
            match gaussian_pyramid(&p, levels) {
                Err(FusionError::InvalidLevels { requested, max }) => {
                    assert_eq!(requested, levels);
                    assert_eq!(max, 4);
                }
                other => panic!("levels={levels}: expected InvalidLevels, got {other:?}"),
            }
        }
        assert!(gaussian_pyramid(&p, 4).is_ok());
    }

    #[test]
    fn single_level_pyramids_are_the_input() {
        let p = ramp(5, 9);
        let g = gaussian_pyramid(&p, 1).unwrap();
        assert_eq!(g.levels().len(), 1);
        assert_eq!(g.levels()[0], p);
        let l = laplacian_pyramid(&p, 1).unwrap();
        assert_eq!(l.levels()[0], p);
        let r = collapse(&l).unwrap();
        assert_eq!(r, p);
    }

    #[test]
    fn gaussian_levels_shrink_by_ceil_halving() {
        let p = ramp(37, 22);
        let g = gaussian_pyramid(&p, 4).unwrap();
        let dims: Vec<(usize, usize)> =
            g.levels().iter().map(|l| (l.width(), l.height())).collect();
        assert_eq!(dims, vec![(37, 22), (19, 11), (10, 6), (5, 3)]);
    }

    #[test]
    fn constant_input_gives_zero_details_and_constant_residual() {
        let p = Plane::filled(24, 17, 0.7);
        let l = laplacian_pyramid(&p, 4).unwrap();
        for (k, level) in l.levels().iter().enumerate() {
            if k + 1 == l.len() {
                for &v in level.data() {
                    assert!((v - 0.7).abs() <= 1e-12, "residual {v}");
                }
            } else {
                for &v in level.data() {
                    assert!(v.abs() <= 1e-12, "detail level {k}: {v}");
                }
            }
        }
    }

    #[test]
    fn upsample_preserves_constants_at_odd_and_even_sizes() {
        for (w, h) in [(8usize, 8usize), (7, 9), (5, 4), (2, 3)] {
            let coarse = Plane::filled(w.div_ceil(2), h.div_ceil(2), 0.3);
            let up = upsample(&coarse, w, h);
            for &v in up.data() {
                assert!((v - 0.3).abs() <= 1e-12, "{w}x{h}: {v}");
            }
        }
    }

    #[test]
    fn collapse_reconstructs_the_input() {
        for (w, h) in [(64, 64), (64, 48), (37, 22), (33, 47)] {
            let p = ramp(w, h);
            let levels = auto_levels(w, h);
            let l = laplacian_pyramid(&p, levels).unwrap();
            let r = collapse(&l).unwrap();
            for (a, b) in p.data().iter().zip(r.data()) {
                assert!((a - b).abs() <= 1e-6, "{w}x{h}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn collapse_rejects_gaussian_pyramids() {
        let g = gaussian_pyramid(&ramp(16, 16), 3).unwrap();
        assert!(collapse(&g).is_err());
    }

    #[test]
    fn from_levels_validates_the_size_chain() {
        let good = vec![Plane::new(9, 6), Plane::new(5, 3), Plane::new(3, 2)];
        assert!(Pyramid::from_levels(good, PyramidKind::Laplacian).is_ok());
        let bad = vec![Plane::new(9, 6), Plane::new(4, 3)];
        assert!(Pyramid::from_levels(bad, PyramidKind::Laplacian).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn plane_strategy() -> impl Strategy<Value = Plane> {
            (4usize..=33, 4usize..=33).prop_flat_map(|(w, h)| {
                proptest::collection::vec(0.0..=1.0f64, w * h)
                    .prop_map(move |data| Plane::from_vec(w, h, data))
            })
        }

        proptest! {
            #[test]
            fn laplacian_round_trips(p in plane_strategy()) {
                let levels = auto_levels(p.width(), p.height());
                let l = laplacian_pyramid(&p, levels).unwrap();
                let r = collapse(&l).unwrap();
                for (a, b) in p.data().iter().zip(r.data()) {
                    prop_assert!((a - b).abs() <= 1e-6);
                }
            }

            #[test]
            fn blur_then_decimate_stays_in_range(p in plane_strategy()) {
                let (mn, mx) = p.min_max();
                let d = downsample(&p);
                prop_assert_eq!(d.width(), p.width().div_ceil(2));
                prop_assert_eq!(d.height(), p.height().div_ceil(2));
                for &v in d.data() {
                    prop_assert!(v >= mn - 1e-12 && v <= mx + 1e-12);
                }
            }
        }
    }
}
