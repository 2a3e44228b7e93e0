//! Box filtering and the guided image filter used for weight refinement.

use crate::error::{FusionError, Result};
use crate::parallel;
use crate::raster::Plane;

/// Guided-filter window half-width and regularizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedFilterParams {
    /// Window half-width in pixels; the window is `(2r + 1) x (2r + 1)`.
    pub radius: usize,
    /// Variance regularizer, on [0, 1]-scaled intensities.
    pub eps: f64,
}

impl Default for GuidedFilterParams {
    fn default() -> Self {
        Self {
            radius: 8,
            eps: 0.01,
        }
    }
}

/// Windowed mean with truncated borders: each output pixel averages exactly
/// the in-bounds samples of its `(2r + 1) x (2r + 1)` window, dividing by
/// the true in-bounds count.
pub fn box_filter(src: &Plane, radius: usize) -> Plane {
    let (w, h) = (src.width(), src.height());
    let r = radius;

    // Horizontal pass: windowed row sums via a running window. The
    // enter/leave updates run left to right within a row, so results do not
    // depend on how rows are scheduled across threads.
    let data = src.data();
    let mut row_sums = Plane::new(w, h);
    parallel::for_each_chunk(row_sums.data_mut(), w, |y, out| {
        let row = &data[y * w..(y + 1) * w];
        let mut acc = 0.0;
        for &v in &row[..w.min(r + 1)] {
            acc += v;
        }
        out[0] = acc;
        for x in 1..w {
            if x + r < w {
                acc += row[x + r];
            }
            if x > r {
                acc -= row[x - r - 1];
            }
            out[x] = acc;
        }
    });

    // Per-axis in-bounds counts; the window intersection is a rectangle, so
    // the divisor is the exact product of the axis counts.
    let count_x: Vec<f64> = (0..w)
        .map(|x| (x.min(r) + (w - 1 - x).min(r) + 1) as f64)
        .collect();

    // Vertical pass: for each output row, sum the covered row-sum rows top
    // to bottom (fixed order), then divide by the true counts.
    let sums = row_sums.data();
    let mut out = Plane::new(w, h);
    parallel::for_each_chunk(out.data_mut(), w, |y, dst| {
        let y0 = y.saturating_sub(r);
        let y1 = (y + r).min(h - 1);
        let count_y = (y1 - y0 + 1) as f64;
        let mut acc = vec![0.0; w];
        for yy in y0..=y1 {
            let srow = &sums[yy * w..(yy + 1) * w];
            for x in 0..w {
                acc[x] += srow[x];
            }
        }
        for x in 0..w {
            dst[x] = acc[x] / (count_x[x] * count_y);
        }
    });
    out
}

/// Edge-preserving smoothing of `input` steered by `guide`:
/// per window `a = cov(g, p) / (var(g) + eps)`, `b = mean(p) - a * mean(g)`,
/// output `q = mean(a) * g + mean(b)` with the coefficient means taken over
/// each pixel's own window. All means are truncated-border box filters.
pub fn guided_filter(guide: &Plane, input: &Plane, params: &GuidedFilterParams) -> Result<Plane> {
    if !guide.same_size(input) {
        return Err(FusionError::SizeMismatch(format!(
            "guide is {}x{}, input is {}x{}",
            guide.width(),
            guide.height(),
            input.width(),
            input.height()
        )));
    }
    let r = params.radius;
    let eps = params.eps;

    let mean_g = box_filter(guide, r);
    let mean_p = box_filter(input, r);
    let corr_gg = box_filter(&guide.zip_map(guide, |a, b| a * b), r);
    let corr_gp = box_filter(&guide.zip_map(input, |a, b| a * b), r);

    let var_g = corr_gg.zip_map(&mean_g, |c, m| c - m * m);
    let cov_gp = {
        let mg_mp = mean_g.zip_map(&mean_p, |a, b| a * b);
        corr_gp.zip_map(&mg_mp, |c, m| c - m)
    };

    let a = cov_gp.zip_map(&var_g, |cov, var| cov / (var + eps));
    let b = {
        let a_mg = a.zip_map(&mean_g, |av, mv| av * mv);
        mean_p.zip_map(&a_mg, |mp, am| mp - am)
    };

    let mean_a = box_filter(&a, r);
    let mean_b = box_filter(&b, r);
    let q = mean_a
        .zip_map(guide, |av, gv| av * gv)
        .zip_map(&mean_b, |ag, bv| ag + bv);
    Ok(q)
}
