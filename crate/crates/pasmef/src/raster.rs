//! Planar rasters of `f64` samples and the luminance conversion shared by
//! every weight branch.

use crate::error::{FusionError, Result};
use crate::parallel;

/// Single-channel raster, row-major samples. Pixel data is nominally in
/// [0, 1] but intermediate maps (scores, Laplacian levels) may leave it.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Zero-filled plane.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be nonzero");
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    /// Constant-filled plane.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be nonzero");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Wrap row-major samples; `data.len()` must equal `width * height`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert!(width > 0 && height > 0, "plane dimensions must be nonzero");
        assert_eq!(data.len(), width * height, "plane data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    /// Build from a generator called as `f(x, y)` in row-major order.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::from_vec(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Total sample count.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn same_size(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Elementwise map into a new plane.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Plane {
        let mut out = Plane::new(self.width, self.height);
        let src = &self.data;
        let w = self.width;
        parallel::for_each_chunk(out.data_mut(), w, |y, row| {
            let srow = &src[y * w..(y + 1) * w];
            for (d, &s) in row.iter_mut().zip(srow) {
                *d = f(s);
            }
        });
        out
    }

    /// Elementwise combination of two equally sized planes.
    pub fn zip_map(&self, other: &Plane, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Plane {
        assert!(self.same_size(other), "zip_map operands differ in size");
        let mut out = Plane::new(self.width, self.height);
        let a = &self.data;
        let b = &other.data;
        let w = self.width;
        parallel::for_each_chunk(out.data_mut(), w, |y, row| {
            let ra = &a[y * w..(y + 1) * w];
            let rb = &b[y * w..(y + 1) * w];
            for x in 0..w {
                row[x] = f(ra[x], rb[x]);
            }
        });
        out
    }

    /// Minimum and maximum sample, reduced in fixed row order.
    pub fn min_max(&self) -> (f64, f64) {
        let w = self.width;
        let data = &self.data;
        let partials = parallel::map_indexed(self.height, |y| {
            let row = &data[y * w..(y + 1) * w];
            let mut mn = row[0];
            let mut mx = row[0];
            for &v in row {
                if v < mn {
                    mn = v;
                }
                if v > mx {
                    mx = v;
                }
            }
            (mn, mx)
        });
        partials
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), (a, b)| {
                (mn.min(a), mx.max(b))
            })
    }
}

/// A 1- or 3-channel image stored as separate planes of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    planes: Vec<Plane>,
}

impl Image {
    /// Wrap planes as an image; must be exactly 1 or 3 planes of equal size.
    pub fn from_planes(planes: Vec<Plane>) -> Result<Self> {
        if planes.len() != 1 && planes.len() != 3 {
            return Err(FusionError::ChannelMismatch(planes.len()));
        }
        if !planes.iter().all(|p| p.same_size(&planes[0])) {
            return Err(FusionError::SizeMismatch(
                "image planes differ in size".into(),
            ));
        }
        Ok(Self { planes })
    }

    /// Single-channel image.
    pub fn gray(plane: Plane) -> Self {
        Self {
            planes: vec![plane],
        }
    }

    /// Three-channel image from red, green, blue planes.
    pub fn rgb(r: Plane, g: Plane, b: Plane) -> Result<Self> {
        Self::from_planes(vec![r, g, b])
    }

    pub fn width(&self) -> usize {
        self.planes[0].width()
    }

    pub fn height(&self) -> usize {
        self.planes[0].height()
    }

    pub fn channels(&self) -> usize {
        self.planes.len()
    }

    pub fn plane(&self, c: usize) -> &Plane {
        &self.planes[c]
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn into_planes(self) -> Vec<Plane> {
        self.planes
    }
}

/// BT.601 luminance `0.299 R + 0.587 G + 0.114 B`, clamped to [0, 1].
/// Single-channel images pass through (clamped).
pub fn to_luminance(image: &Image) -> Plane {
    match image.channels() {
        1 => image.plane(0).map(|v| v.clamp(0.0, 1.0)),
        3 => {
            let r = image.plane(0);
            let g = image.plane(1);
            let b = image.plane(2);
            let mut out = Plane::new(image.width(), image.height());
            let w = image.width();
            let (rd, gd, bd) = (r.data(), g.data(), b.data());
            parallel::for_each_chunk(out.data_mut(), w, |y, row| {
                let o = y * w;
                for x in 0..w {
                    let v = 0.299 * rd[o + x] + 0.587 * gd[o + x] + 0.114 * bd[o + x];
                    row[x] = v.clamp(0.0, 1.0);
                }
            });
            out
        }
        n => unreachable!("image with {n} channels cannot be constructed"),
    }
}
