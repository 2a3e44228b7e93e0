//! Decoding stack images to [0, 1] planes and encoding results as 8-bit PNG.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{FusionError, Result};
use crate::raster::{Image as Raster, Plane};

/// File extensions considered part of an exposure stack.
pub(crate) const STACK_EXTENSIONS: [&str; 5] = ["png", "jpg", "jpeg", "tif", "tiff"];

/// Decode a PNG/JPEG/TIFF file into an RGB raster scaled to [0, 1]:
/// 8-bit samples divide by 255, 16-bit by 65535. Grayscale sources are
/// replicated across the three channels.
pub fn read_image(path: &Path) -> Result<Raster> {
    let decoded = image::open(path).map_err(|source| FusionError::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(dynamic_to_raster(decoded))
}

fn dynamic_to_raster(decoded: DynamicImage) -> Raster {
    use DynamicImage::*;
    let wide = matches!(
        decoded,
        ImageLuma16(_) | ImageLumaA16(_) | ImageRgb16(_) | ImageRgba16(_)
    );
    if wide {
        let rgb = decoded.to_rgb16();
        let (w, h) = (rgb.width() as usize, rgb.height() as usize);
        deinterleave(w, h, rgb.as_raw(), 65535.0)
    } else {
        let rgb = decoded.to_rgb8();
        let (w, h) = (rgb.width() as usize, rgb.height() as usize);
        deinterleave(w, h, rgb.as_raw(), 255.0)
    }
}

fn deinterleave<T: Copy + Into<f64>>(w: usize, h: usize, raw: &[T], scale: f64) -> Raster {
    let mut planes = vec![
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
        Vec::with_capacity(w * h),
    ];
    for px in raw.chunks_exact(3) {
        for (c, plane) in planes.iter_mut().enumerate() {
            plane.push(px[c].into() / scale);
        }
    }
    let mut it = planes.into_iter().map(|d| Plane::from_vec(w, h, d));
    Raster::rgb(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        .expect("three equally sized planes")
}

/// Quantize a [0, 1] sample to 8 bits: `floor(v * 255 + 0.5)`, clamped.
#[inline]
pub(crate) fn quantize_u8(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Write a raster as an 8-bit PNG (RGB for 3-channel input, grayscale for
/// 1-channel input).
pub fn write_png(path: &Path, raster: &Raster) -> Result<()> {
    let (w, h) = (raster.width() as u32, raster.height() as u32);
    let wrap = |source| FusionError::Encode {
        path: path.to_path_buf(),
        source,
    };
    match raster.channels() {
        1 => {
            let data: Vec<u8> = raster
                .plane(0)
                .data()
                .iter()
                .map(|&v| quantize_u8(v))
                .collect();
            let buf: ImageBuffer<Luma<u8>, _> =
                ImageBuffer::from_raw(w, h, data).expect("buffer sized to plane");
            buf.save(path).map_err(wrap)
        }
        3 => {
            let (r, g, b) = (raster.plane(0), raster.plane(1), raster.plane(2));
            let mut data = Vec::with_capacity(3 * r.len());
            for i in 0..r.len() {
                data.push(quantize_u8(r.data()[i]));
                data.push(quantize_u8(g.data()[i]));
                data.push(quantize_u8(b.data()[i]));
            }
            let buf: ImageBuffer<Rgb<u8>, _> =
                ImageBuffer::from_raw(w, h, data).expect("buffer sized to planes");
            buf.save(path).map_err(wrap)
        }
        n => Err(FusionError::ChannelMismatch(n)),
    }
}

/// Write a single plane as an 8-bit grayscale PNG.
pub fn write_png_gray(path: &Path, plane: &Plane) -> Result<()> {
    write_png(path, &Raster::gray(plane.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize_u8(0.0), 0);
        assert_eq!(quantize_u8(1.0), 255);
        assert_eq!(quantize_u8(0.5), 128); // 127.5 + 0.5 -> 128
        assert_eq!(quantize_u8(1.0 / 255.0), 1);
        assert_eq!(quantize_u8(-0.2), 0);
        assert_eq!(quantize_u8(1.7), 255);
    }

    #[test]
    fn png_round_trip_is_exact_at_8_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        let r = Plane::from_fn(16, 8, |x, y| ((x * 16 + y) % 256) as f64 / 255.0);
        let g = Plane::from_fn(16, 8, |x, y| ((x + y * 16) % 256) as f64 / 255.0);
        let b = Plane::from_fn(16, 8, |x, y| ((x * y) % 256) as f64 / 255.0);
        let img = Raster::rgb(r, g, b).unwrap();
        write_png(&path, &img).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.channels(), 3);
        for c in 0..3 {
            for (a, b) in img.plane(c).data().iter().zip(back.plane(c).data()) {
                assert_eq!(quantize_u8(*a), quantize_u8(*b));
                assert!((a - b).abs() <= 0.5 / 255.0);
            }
        }
    }

    #[test]
    fn sixteen_bit_png_scales_by_65535() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wide.png");
        let mut buf: ImageBuffer<Rgb<u16>, Vec<u16>> = ImageBuffer::new(4, 2);
        for (i, px) in buf.pixels_mut().enumerate() {
            let v = (i as u16) * 8191;
            *px = Rgb([v, 65535 - v, 32768]);
        }
        buf.save(&path).unwrap();
        let img = read_image(&path).unwrap();
        for i in 0..8 {
            let x = i % 4;
            let y = i / 4;
            let v = (i as f64) * 8191.0 / 65535.0;
            assert!((img.plane(0).get(x, y) - v).abs() <= 1e-9);
            assert!((img.plane(1).get(x, y) - (1.0 - v)).abs() <= 1e-9);
            assert!((img.plane(2).get(x, y) - 32768.0 / 65535.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn grayscale_source_replicates_channels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.png");
        let mut buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::new(3, 3);
        for (i, px) in buf.pixels_mut().enumerate() {
            *px = Luma([(i * 28) as u8]);
        }
        buf.save(&path).unwrap();
        let img = read_image(&path).unwrap();
        assert_eq!(img.channels(), 3);
        for i in 0..9 {
            let (x, y) = (i % 3, i / 3);
            let v = (i * 28) as f64 / 255.0;
            for c in 0..3 {
                assert!((img.plane(c).get(x, y) - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unreadable_file_is_a_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.png");
        std::fs::write(&path, b"not a png at all").unwrap();
        match read_image(&path) {
            Err(FusionError::Decode { path: p, .. }) => assert_eq!(p, path),
            other => panic!("expected Decode error, got {other:?}"),
        }
    }
}
