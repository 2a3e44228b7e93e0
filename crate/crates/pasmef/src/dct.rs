//! Orthonormal 2D DCT-II and its inverse, computed with precomputed basis
//! matrices. Sizes here are the saliency working size (~64 wide), where the
//! O(n) matrix products are cheap and keep the transform exactly orthonormal.

use crate::parallel;
use crate::raster::Plane;

/// Frequency-domain coefficients of a plane, same dimensions as the input.
#[derive(Debug, Clone, PartialEq)]
pub struct DctPlane {
    coefficients: Plane,
}

impl DctPlane {
    pub fn coefficients(&self) -> &Plane {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Plane {
        self.coefficients
    }

    /// Wrap coefficients produced elsewhere (tests, synthetic spectra).
    pub fn from_coefficients(coefficients: Plane) -> Self {
        Self { coefficients }
    }
}

/// Row-major n x n orthonormal DCT-II basis:
/// `B[k][j] = s_k * cos(pi * (2j + 1) * k / (2n))`,
/// `s_0 = sqrt(1/n)`, `s_k = sqrt(2/n)` otherwise.
fn basis(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n * n];
    let norm0 = (1.0 / n as f64).sqrt();
    let norm = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let s = if k == 0 { norm0 } else { norm };
        for j in 0..n {
            let angle = std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64;
            b[k * n + j] = s * angle.cos();
        }
    }
    b
}

/// `out = X * Bᵀ` applied row-wise: each output row `y` holds
/// `out[y][k] = sum_j B[k][j] * x[y][j]`.
fn rows_times_basis_t(src: &Plane, b: &[f64]) -> Plane {
    let (w, h) = (src.width(), src.height());
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |y, row| {
        let srow = &data[y * w..(y + 1) * w];
        for (k, slot) in row.iter_mut().enumerate() {
            let bk = &b[k * w..(k + 1) * w];
            let mut acc = 0.0;
            for j in 0..w {
                acc += bk[j] * srow[j];
            }
            *slot = acc;
        }
    });
    out
}

/// `out = B * X`: each output row `k` holds `out[k][x] = sum_i B[k][i] * x[i][x]`.
fn basis_times_cols(src: &Plane, b: &[f64]) -> Plane {
    let (w, h) = (src.width(), src.height());
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |k, row| {
        let bk = &b[k * h..(k + 1) * h];
        for (i, &bv) in bk.iter().enumerate() {
            let srow = &data[i * w..(i + 1) * w];
            for x in 0..w {
                row[x] += bv * srow[x];
            }
        }
    });
    out
}

/// Transpose-variants of the two products above, used by the inverse.
fn rows_times_basis(src: &Plane, b: &[f64]) -> Plane {
    let (w, h) = (src.width(), src.height());
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |y, row| {
        let srow = &data[y * w..(y + 1) * w];
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..w {
                acc += b[k * w + j] * srow[k];
            }
            *slot = acc;
        }
    });
    out
}

fn basis_t_times_cols(src: &Plane, b: &[f64]) -> Plane {
    let (w, h) = (src.width(), src.height());
    let data = src.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |i, row| {
        for k in 0..h {
            let bv = b[k * h + i];
            let srow = &data[k * w..(k + 1) * w];
            for x in 0..w {
                row[x] += bv * srow[x];
            }
        }
    });
    out
}

/// Forward orthonormal 2D DCT-II: `Y = B_h · X · B_wᵀ`.
pub fn dct2(src: &Plane) -> DctPlane {
    let bw = basis(src.width());
    let bh = basis(src.height());
    let coefficients = basis_times_cols(&rows_times_basis_t(src, &bw), &bh);
    DctPlane { coefficients }
}

/// Inverse of [`dct2`]: `X = B_hᵀ · Y · B_w`. Exact inverse up to rounding
/// because the basis is orthonormal.
pub fn idct2(freq: &DctPlane) -> Plane {
    let src = &freq.coefficients;
    let bw = basis(src.width());
    let bh = basis(src.height());
    basis_t_times_cols(&rows_times_basis(src, &bw), &bh)
}
