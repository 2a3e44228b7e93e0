//! Weight combination, refinement, and pyramidal blending.

use crate::config::{FusionConfig, LevelCount};
use crate::error::{FusionError, Result};
use crate::exposedness::exposedness_maps;
use crate::guided::{guided_filter, GuidedFilterParams};
use crate::parallel;
use crate::pca::pca_weight_maps;
use crate::pyramid::{
    auto_levels, gaussian_pyramid, laplacian_pyramid, max_levels, Pyramid, PyramidKind,
};
use crate::raster::{to_luminance, Image, Plane};
use crate::saliency::saliency_maps;
use crate::stack::{normalize_sum_to_one, sorted_sum, ExposureStack, WeightStack};

/// Every intermediate the pipeline produces for one stack, for inspection
/// and weight dumping.
#[derive(Debug, Clone)]
pub struct FusionArtifacts {
    /// Component-score branch maps (normalized across the stack).
    pub pca: WeightStack,
    /// Well-exposedness branch maps (raw branch outputs).
    pub exposedness: WeightStack,
    /// Saliency branch maps (raw branch outputs).
    pub saliency: WeightStack,
    /// Final refined, normalized fusion weights.
    pub fusion_weights: WeightStack,
    /// The fused image, clamped to [0, 1].
    pub fused: Image,
}

fn check_stack_alignment(ws: &WeightStack, stack: &ExposureStack, what: &str) -> Result<()> {
    if ws.len() != stack.len() {
        return Err(FusionError::SizeMismatch(format!(
            "{what}: {} maps for {} exposures",
            ws.len(),
            stack.len()
        )));
    }
    if ws.width() != stack.width() || ws.height() != stack.height() {
        return Err(FusionError::SizeMismatch(format!(
            "{what}: maps are {}x{}, images are {}x{}",
            ws.width(),
            ws.height(),
            stack.width(),
            stack.height()
        )));
    }
    Ok(())
}

/// Multiply the three branch maps per pixel, refine each product with a
/// guided filter steered by its exposure's luminance, clamp negative filter
/// output to zero, and normalize to a per-pixel partition of unity.
///
/// The per-pixel product multiplies its three factors in value-sorted
/// order, so the branches can be supplied in any argument order with
/// bit-identical results.
pub fn combine_weights(
    pca: &WeightStack,
    exposedness: &WeightStack,
    saliency: &WeightStack,
    stack: &ExposureStack,
    params: &GuidedFilterParams,
) -> Result<WeightStack> {
    check_stack_alignment(pca, stack, "component-score maps")?;
    check_stack_alignment(exposedness, stack, "exposedness maps")?;
    check_stack_alignment(saliency, stack, "saliency maps")?;

    let n = stack.len();
    let (w, h) = (stack.width(), stack.height());
    let refined = parallel::map_indexed(n, |i| -> Result<Plane> {
        let (p, a, s) = (&pca.maps()[i], &exposedness.maps()[i], &saliency.maps()[i]);
        let mut raw = Plane::new(w, h);
        let (pd, ad, sd) = (p.data(), a.data(), s.data());
        parallel::for_each_chunk(raw.data_mut(), w, |y, row| {
            let o = y * w;
            for (x, slot) in row.iter_mut().enumerate() {
                let mut f = [pd[o + x], ad[o + x], sd[o + x]];
                f.sort_unstable_by(f64::total_cmp);
                *slot = f[0] * f[1] * f[2];
            }
        });
        let guide = to_luminance(&stack.images()[i]);
        let filtered = guided_filter(&guide, &raw, params)?;
        Ok(filtered.map(|v| v.max(0.0)))
    });
    let mut maps = Vec::with_capacity(n);
    for r in refined {
        maps.push(r?);
    }
    Ok(normalize_sum_to_one(&WeightStack::new(maps)?))
}

pub(crate) fn resolve_levels(levels: LevelCount, width: usize, height: usize) -> Result<usize> {
    match levels {
        LevelCount::Auto => Ok(auto_levels(width, height)),
        LevelCount::Fixed(n) => {
            let max = max_levels(width, height);
            if n == 0 || n > max {
                Err(FusionError::InvalidLevels { requested: n, max })
            } else {
                Ok(n)
            }
        }
    }
}

/// Pyramid blending without the final clamp; `fuse` wraps this. Exposed to
/// the crate so linearity can be tested on the raw reconstruction.
pub(crate) fn fuse_unclamped(
    stack: &ExposureStack,
    weights: &WeightStack,
    config: &FusionConfig,
) -> Result<Image> {
    if !weights.is_normalized() {
        return Err(FusionError::NotNormalized);
    }
    check_stack_alignment(weights, stack, "fusion weights")?;
    let n = stack.len();
    let (w, h) = (stack.width(), stack.height());
    let levels = resolve_levels(config.pyramid_levels, w, h)?;

    let weight_pyramids: Vec<Vec<Plane>> = {
        let built = parallel::map_indexed(n, |i| {
            gaussian_pyramid(&weights.maps()[i], levels).map(Pyramid::into_levels)
        });
        let mut out = Vec::with_capacity(n);
        for b in built {
            out.push(b?);
        }
        out
    };

    let mut channels = Vec::with_capacity(3);
    for c in 0..3 {
        let laplacians: Vec<Vec<Plane>> = {
            let built = parallel::map_indexed(n, |i| {
                laplacian_pyramid(stack.images()[i].plane(c), levels).map(Pyramid::into_levels)
            });
            let mut out = Vec::with_capacity(n);
            for b in built {
                out.push(b?);
            }
            out
        };

        // Blend each level: per pixel, the weighted detail terms are summed
        // in value-sorted order so stack permutations commute bit-for-bit.
        let blended: Vec<Plane> = (0..levels)
            .map(|l| {
                let (lw, lh) = (laplacians[0][l].width(), laplacians[0][l].height());
                let mut out = Plane::new(lw, lh);
                let weight_rows: Vec<&[f64]> =
                    (0..n).map(|i| weight_pyramids[i][l].data()).collect();
                let detail_rows: Vec<&[f64]> = (0..n).map(|i| laplacians[i][l].data()).collect();
                let weight_rows = &weight_rows;
                let detail_rows = &detail_rows;
                parallel::for_each_chunk(out.data_mut(), lw, |y, row| {
                    let o = y * lw;
                    let mut terms = vec![0.0; n];
                    for (x, slot) in row.iter_mut().enumerate() {
                        for i in 0..n {
                            terms[i] = weight_rows[i][o + x] * detail_rows[i][o + x];
                        }
                        *slot = sorted_sum(&mut terms);
                    }
                });
                out
            })
            .collect();

        let fused_pyramid = Pyramid::from_levels(blended, PyramidKind::Laplacian)?;
        channels.push(crate::pyramid::collapse(&fused_pyramid)?);
    }
    Image::rgb(channels.remove(0), channels.remove(0), channels.remove(0))
}

/// Blend the stack with the given normalized weights through Laplacian
/// (image) and Gaussian (weight) pyramids, clamping the result to [0, 1].
pub fn fuse(stack: &ExposureStack, weights: &WeightStack, config: &FusionConfig) -> Result<Image> {
    let unclamped = fuse_unclamped(stack, weights, config)?;
    let planes = unclamped
        .into_planes()
        .into_iter()
        .map(|p| p.map(|v| v.clamp(0.0, 1.0)))
        .collect();
    Image::from_planes(planes)
}

/// Run the full pipeline, returning every intermediate weight stack
/// alongside the fused image.
pub fn fuse_stack_with_weights(
    stack: &ExposureStack,
    config: &FusionConfig,
) -> Result<FusionArtifacts> {
    config.validate()?;
    let pca = pca_weight_maps(stack, config)?;
    let exposedness = exposedness_maps(stack, config)?;
    let saliency = saliency_maps(stack, config)?;
    let fusion_weights = combine_weights(
        &pca,
        &exposedness,
        &saliency,
        stack,
        &config.guided_params(),
    )?;
    let fused = fuse(stack, &fusion_weights, config)?;
    Ok(FusionArtifacts {
        pca,
        exposedness,
        saliency,
        fusion_weights,
        fused,
    })
}

/// Run the full pipeline and return only the fused image.
pub fn fuse_stack(stack: &ExposureStack, config: &FusionConfig) -> Result<Image> {
    Ok(fuse_stack_with_weights(stack, config)?.fused)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_stack(planes: Vec<Plane>) -> ExposureStack {
        let images = planes
            .into_iter()
            .map(|p| Image::rgb(p.clone(), p.clone(), p).unwrap())
            .collect();
        ExposureStack::new(images).unwrap()
    }

    fn ramp(w: usize, h: usize, k: usize) -> Plane {
        Plane::from_fn(w, h, |x, y| {
            0.05 + 0.9 * (((x * (k + 2) + y * (2 * k + 1)) % 23) as f64 / 23.0)
        })
    }

    fn normalized_weights(stack: &ExposureStack) -> WeightStack {
        let n = stack.len();
        let maps = (0..n)
            .map(|i| {
                Plane::from_fn(stack.width(), stack.height(), |x, y| {
                    0.2 + ((x + 2 * y + 3 * i) % 5) as f64 / 5.0
                })
            })
            .collect();
        normalize_sum_to_one(&WeightStack::new(maps).unwrap())
    }

    #[test]
    fn combine_of_unit_branches_is_uniform() {
        let stack = gray_stack(vec![ramp(12, 10, 0), ramp(12, 10, 1), ramp(12, 10, 2)]);
        let ones = || {
            WeightStack::new(vec![
                Plane::filled(12, 10, 1.0),
                Plane::filled(12, 10, 1.0),
                Plane::filled(12, 10, 1.0),
            ])
            .unwrap()
        };
        let w = combine_weights(
            &ones(),
            &ones(),
            &ones(),
            &stack,
            &GuidedFilterParams::default(),
        )
        .unwrap();
        for m in w.maps() {
            for &v in m.data() {
                assert!((v - 1.0 / 3.0).abs() <= 1e-9, "got {v}");
            }
        }
    }

    #[test]
    fn zero_branch_forces_uniform_fallback() {
        let stack = gray_stack(vec![ramp(8, 8, 0), ramp(8, 8, 1)]);
        let ones =
            || WeightStack::new(vec![Plane::filled(8, 8, 1.0), Plane::filled(8, 8, 1.0)]).unwrap();
        let zeros = WeightStack::new(vec![Plane::new(8, 8), Plane::new(8, 8)]).unwrap();
        let w = combine_weights(
            &ones(),
            &ones(),
            &zeros,
            &stack,
            &GuidedFilterParams::default(),
        )
        .unwrap();
        for m in w.maps() {
            for &v in m.data() {
                assert!((v - 0.5).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn branch_argument_order_is_irrelevant_bit_for_bit() {
        let stack = gray_stack(vec![ramp(10, 9, 0), ramp(10, 9, 3)]);
        let branch = |seed: usize| {
            WeightStack::new(
                (0..2)
                    .map(|i| {
                        Plane::from_fn(10, 9, |x, y| {
                            0.05 + (((x + 3 * y + i + seed * 7) % 11) as f64) / 11.0
                        })
                    })
                    .collect(),
            )
            .unwrap()
        };
        let (p, a, s) = (branch(0), branch(1), branch(2));
        let params = GuidedFilterParams::default();
        let w1 = combine_weights(&p, &a, &s, &stack, &params).unwrap();
        let w2 = combine_weights(&s, &p, &a, &stack, &params).unwrap();
        let w3 = combine_weights(&a, &s, &p, &stack, &params).unwrap();
        for i in 0..2 {
            assert_eq!(w1.maps()[i], w2.maps()[i]);
            assert_eq!(w1.maps()[i], w3.maps()[i]);
        }
    }

    #[test]
    fn combine_rejects_misaligned_stacks() {
        let stack = gray_stack(vec![ramp(8, 8, 0), ramp(8, 8, 1)]);
        let two = WeightStack::new(vec![Plane::filled(8, 8, 1.0); 2]).unwrap();
        let three = WeightStack::new(vec![Plane::filled(8, 8, 1.0); 3]).unwrap();
        assert!(matches!(
            combine_weights(&three, &two, &two, &stack, &GuidedFilterParams::default()),
            Err(FusionError::SizeMismatch(_))
        ));
        let small = WeightStack::new(vec![Plane::filled(4, 4, 1.0); 2]).unwrap();
        assert!(matches!(
            combine_weights(&two, &small, &two, &stack, &GuidedFilterParams::default()),
            Err(FusionError::SizeMismatch(_))
        ));
    }

    #[test]
    fn fuse_rejects_unnormalized_weights() {
        let stack = gray_stack(vec![ramp(8, 8, 0), ramp(8, 8, 1)]);
        let raw = WeightStack::new(vec![Plane::filled(8, 8, 0.5); 2]).unwrap();
        assert!(matches!(
            fuse(&stack, &raw, &FusionConfig::default()),
            Err(FusionError::NotNormalized)
        ));
    }

    #[test]
    fn fuse_rejects_wrong_map_count() {
        let stack = gray_stack(vec![ramp(8, 8, 0), ramp(8, 8, 1)]);
        let three =
            normalize_sum_to_one(&WeightStack::new(vec![Plane::filled(8, 8, 1.0); 3]).unwrap());
        assert!(matches!(
            fuse(&stack, &three, &FusionConfig::default()),
            Err(FusionError::SizeMismatch(_))
        ));
    }

    #[test]
    fn fuse_rejects_invalid_level_count() {
        let stack = gray_stack(vec![ramp(16, 16, 0), ramp(16, 16, 1)]);
        let w = normalized_weights(&stack);
        let config = FusionConfig {
            pyramid_levels: LevelCount::Fixed(9),
            ..FusionConfig::default()
        };
        match fuse(&stack, &w, &config) {
            Err(FusionError::InvalidLevels {
                requested: 9,
                max: 4,
            }) => {}
            other => panic!("expected InvalidLevels, got {other:?}"),
        }
    }

    #[test]
    fn single_exposure_with_unit_weights_reconstructs_the_input() {
        let p = ramp(33, 21, 4);
        let stack = gray_stack(vec![p.clone()]);
        let w = normalize_sum_to_one(&WeightStack::new(vec![Plane::filled(33, 21, 0.7)]).unwrap());
        let fused = fuse(&stack, &w, &FusionConfig::default()).unwrap();
        for c in 0..3 {
            for (a, b) in fused.plane(c).data().iter().zip(p.data()) {
                assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn identical_exposures_fuse_to_themselves() {
        let p = ramp(24, 18, 2);
        let stack = gray_stack(vec![p.clone(), p.clone(), p.clone()]);
        let w = normalized_weights(&stack);
        let fused = fuse(&stack, &w, &FusionConfig::default()).unwrap();
        for c in 0..3 {
            for (a, b) in fused.plane(c).data().iter().zip(p.data()) {
                assert!((a - b).abs() <= 1e-3, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn one_level_fusion_is_the_weighted_average() {
        let stack = gray_stack(vec![ramp(9, 7, 0), ramp(9, 7, 1), ramp(9, 7, 5)]);
        let w = normalized_weights(&stack);
        let config = FusionConfig {
            pyramid_levels: LevelCount::Fixed(1),
            ..FusionConfig::default()
        };
        let fused = fuse(&stack, &w, &config).unwrap();
        for c in 0..3 {
            for y in 0..7 {
                for x in 0..9 {
                    let want: f64 = (0..3)
                        .map(|i| w.maps()[i].get(x, y) * stack.images()[i].plane(c).get(x, y))
                        .sum();
                    let got = fused.plane(c).get(x, y);
                    assert!(
                        (got - want.clamp(0.0, 1.0)).abs() <= 1e-9,
                        "({x},{y}) {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn fusion_is_linear_before_clamping() {
        let (w, h) = (20, 16);
        let a = gray_stack(vec![ramp(w, h, 0), ramp(w, h, 1)]);
        let b = gray_stack(vec![ramp(w, h, 6), ramp(w, h, 7)]);
        let (alpha, beta) = (0.6, 0.4);
        let mixed = {
            let imgs = a
                .images()
                .iter()
                .zip(b.images())
                .map(|(ia, ib)| {
                    let planes = ia
                        .planes()
                        .iter()
                        .zip(ib.planes())
                        .map(|(pa, pb)| pa.zip_map(pb, |u, v| alpha * u + beta * v))
                        .collect();
                    Image::from_planes(planes).unwrap()
                })
                .collect();
            ExposureStack::new(imgs).unwrap()
        };
        let weights = normalized_weights(&a);
        let config = FusionConfig::default();
        let fa = fuse_unclamped(&a, &weights, &config).unwrap();
        let fb = fuse_unclamped(&b, &weights, &config).unwrap();
        let fm = fuse_unclamped(&mixed, &weights, &config).unwrap();
        for c in 0..3 {
            for i in 0..w * h {
                let want = alpha * fa.plane(c).data()[i] + beta * fb.plane(c).data()[i];
                let got = fm.plane(c).data()[i];
                assert!((got - want).abs() <= 1e-9, "channel {c}, pixel {i}");
            }
        }
    }

    #[test]
    fn stack_permutation_commutes_bit_for_bit() {
        let planes = vec![ramp(18, 14, 0), ramp(18, 14, 1), ramp(18, 14, 2)];
        let stack = gray_stack(planes.clone());
        let weights = normalized_weights(&stack);
        let config = FusionConfig::default();
        let fused = fuse(&stack, &weights, &config).unwrap();

        let perm = [2usize, 0, 1];
        let pstack = gray_stack(perm.iter().map(|&i| planes[i].clone()).collect());
        // Permute the exact normalized maps (re-normalizing would re-round
        // the divisions and defeat the bitwise comparison).
        let pweights =
            WeightStack::new_normalized(perm.iter().map(|&i| weights.maps()[i].clone()).collect());
        let pfused = fuse(&pstack, &pweights, &config).unwrap();
        assert_eq!(fused, pfused);
    }

    #[test]
    fn fused_output_is_clamped_to_unit_range() {
        // Laplacian blending can overshoot; the public entry point clamps.
        let stack = gray_stack(vec![
            Plane::from_fn(16, 16, |x, _| if x % 2 == 0 { 0.0 } else { 1.0 }),
            Plane::from_fn(16, 16, |_, y| if y % 2 == 0 { 1.0 } else { 0.0 }),
        ]);
        let w = normalized_weights(&stack);
        let fused = fuse(&stack, &w, &FusionConfig::default()).unwrap();
        for c in 0..3 {
            let (mn, mx) = fused.plane(c).min_max();
            assert!(mn >= 0.0 && mx <= 1.0);
        }
    }

    #[test]
    fn full_pipeline_produces_consistent_artifacts() {
        use crate::synth::synthetic_stack;
        let stack = synthetic_stack(48, 32, 3);
        let artifacts = fuse_stack_with_weights(&stack, &FusionConfig::default()).unwrap();
        assert_eq!(artifacts.pca.len(), 3);
        assert_eq!(artifacts.exposedness.len(), 3);
        assert_eq!(artifacts.saliency.len(), 3);
        assert_eq!(artifacts.fusion_weights.len(), 3);
        assert!(artifacts.fusion_weights.is_normalized());
        for y in 0..32 {
            for x in 0..48 {
                let s: f64 = artifacts
                    .fusion_weights
                    .maps()
                    .iter()
                    .map(|m| m.get(x, y))
                    .sum();
                assert!((s - 1.0).abs() <= 1e-12, "weight sum {s} at ({x},{y})");
            }
        }
        let direct = fuse_stack(&stack, &FusionConfig::default()).unwrap();
        assert_eq!(direct, artifacts.fused);
    }
}
