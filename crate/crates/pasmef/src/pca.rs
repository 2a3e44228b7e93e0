//! Component-score weight maps.
//!
//! Each exposure contributes one column of a `(pixels x N)` luminance data
//! matrix. The principal components of its `N x N` sample covariance define
//! score maps: the k-th component's scores, reshaped to the image grid,
//! become the raw weight map of the k-th exposure. High-variance pixels
//! (where exposures disagree) separate strongly in score space, so the maps
//! track which exposure carries usable detail at each pixel.

use crate::config::FusionConfig;
use crate::error::Result;
use crate::filter::{gaussian_blur, rescale_unit};
use crate::parallel;
use crate::raster::Plane;
use crate::stack::{normalize_sum_to_one, ExposureStack, WeightStack};

/// Principal-component decomposition of a stack's luminance covariance.
#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Per-exposure mean luminance (column means of the data matrix).
    pub mean: Vec<f64>,
    /// Eigenvalues in descending order, clamped to be nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors as columns: `eigenvectors[i][k]` is component k's
    /// loading on exposure i. Signs follow the largest-magnitude convention.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Score planes, one per component, image-shaped.
    pub scores: Vec<Plane>,
}

/// Off-diagonal convergence threshold for the Jacobi sweep.
const JACOBI_TOL: f64 = 1e-12;
/// Sweep cap; N <= ~10 symmetric matrices converge in a handful of sweeps.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major,
/// `n x n`). Returns `(eigenvalues, eigenvector_columns)`, unordered.
fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    // v starts as the identity and accumulates the rotations; column k ends
    // up as the eigenvector for eigenvalue a[k][k].
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].abs();
            }
        }
        if off <= JACOBI_TOL {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= JACOBI_TOL * 1e-3 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotation angle zeroing a[p][q]: the stable tangent formula.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}

/// Fix an eigenvector's sign: the entry of largest magnitude (first such
/// index on ties) is made nonnegative.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Decompose the stack's luminance covariance and project every pixel onto
/// the principal components.
pub fn compute_pca_scores(stack: &ExposureStack) -> Result<PcaResult> {
    let n = stack.len();
    let (w, h) = (stack.width(), stack.height());
    let pixels = w * h;
    let lumas = stack.luminances();

    // Column means.
    let mean: Vec<f64> = lumas
        .iter()
        .map(|l| {
            let rows = parallel::map_indexed(h, |y| l.row(y).iter().sum::<f64>());
            rows.iter().sum::<f64>() / pixels as f64
        })
        .collect();

    // Upper triangle of the sample covariance (divisor rc - 1), accumulated
    // as ordered per-row partials.
    let row_partials = parallel::map_indexed(h, |y| {
        let mut acc = vec![0.0; n * n];
        for x in 0..w {
            for i in 0..n {
                let di = lumas[i].get(x, y) - mean[i];
                for j in i..n {
                    let dj = lumas[j].get(x, y) - mean[j];
                    acc[i * n + j] += di * dj;
                }
            }
        }
        acc
    });
    let mut cov = vec![0.0; n * n];
    for partial in &row_partials {
        for (c, p) in cov.iter_mut().zip(partial) {
            *c += p;
        }
    }
    let denom = (pixels - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let v = cov[i * n + j] / denom;
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }

    let (raw_values, mut raw_vectors) = jacobi_eigen(cov, n);

    // Order components by descending eigenvalue (ascending original index on
    // ties), clamp tiny negative eigenvalues from round-off to zero, and fix
    // signs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        raw_values[b]
            .partial_cmp(&raw_values[a])
            .expect("eigenvalues are finite")
            .then(a.cmp(&b))
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &k in &order {
        debug_assert!(
            raw_values[k] >= -1e-9,
            "covariance eigenvalue {}",
            raw_values[k]
        );
        eigenvalues.push(raw_values[k].max(0.0));
        let mut vec_k = std::mem::take(&mut raw_vectors[k]);
        fix_sign(&mut vec_k);
        eigenvectors.push(vec_k);
    }
    // Store as eigenvectors[i][k] = loading of exposure i on component k.
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|k| eigenvectors[k][i]).collect())
        .collect();

    // Scores: centered data rows projected onto each component.
    let scores: Vec<Plane> = (0..n)
        .map(|k| {
            let vk: Vec<f64> = (0..n).map(|i| columns[i][k]).collect();
            let mut out = Plane::new(w, h);
            let lum_refs: Vec<&[f64]> = lumas.iter().map(|l| l.data()).collect();
            let mean = &mean;
            let vk = &vk;
            let lum_refs = &lum_refs;
            parallel::for_each_chunk(out.data_mut(), w, |y, row| {
                let o = y * w;
                for (x, slot) in row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..lum_refs.len() {
                        acc += (lum_refs[i][o + x] - mean[i]) * vk[i];
                    }
                    *slot = acc;
                }
            });
            out
        })
        .collect();

    Ok(PcaResult {
        mean,
        eigenvalues,
        eigenvectors: columns,
        scores,
    })
}

/// Component-score weight maps `P_n`: per-component scores rescaled to
/// [0, 1] (constant scores become 0.5), Gaussian-smoothed, then normalized
/// to a per-pixel partition of unity across the stack.
pub fn pca_weight_maps(stack: &ExposureStack, config: &FusionConfig) -> Result<WeightStack> {
    let result = compute_pca_scores(stack)?;
    let maps = parallel::map_indexed(result.scores.len(), |k| {
        gaussian_blur(&rescale_unit(&result.scores[k]), config.pca_smooth_sigma)
    });
    Ok(normalize_sum_to_one(&WeightStack::new(maps)?))
}
