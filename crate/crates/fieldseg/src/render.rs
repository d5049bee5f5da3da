//! PNG previews: a greyscale band with boundary or label overlays.

use std::fs;
use std::path::Path;

use fieldseg_core::{LabelImage, Mask, Raster, UNLABELED};

use crate::error::{Error, Result};

pub const HIGHLIGHT: [u8; 3] = [255, 0, 0];
/// Grey used when the base has no contrast to stretch.
pub const FLAT_GREY: u8 = 128;

#[derive(Debug, Clone, Copy, Default)]
pub struct Overlay<'a> {
    /// Tinted over the base, one deterministic colour per label.
    pub labels: Option<&'a LabelImage>,
    /// Drawn on top in [`HIGHLIGHT`].
    pub boundaries: Option<&'a Mask>,
}

/// Stable colour for a label id (SplitMix64 finalizer on the id).
pub fn label_color(label: i32) -> [u8; 3] {
    let mut z = (label as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    // Keep colours away from black so they stay visible on dark ground.
    [64 | (z as u8), 64 | ((z >> 8) as u8), 64 | ((z >> 16) as u8)]
}

/// Nearest-rank 2nd and 98th percentiles of the valid samples.
fn stretch_bounds(values: &[f32], nodata: &[bool]) -> Option<(f32, f32)> {
    let mut v: Vec<f32> = values.iter().zip(nodata).filter(|(_, &m)| !m).map(|(&x, _)| x).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f32::total_cmp);
    let rank = |p: f64| {
        let r = (p / 100.0 * v.len() as f64).ceil() as usize;
        v[r.clamp(1, v.len()) - 1]
    };
    Some((rank(2.0), rank(98.0)))
}

/// RGB bytes (row-major, 3 per pixel) of `band` of `base` with overlays.
/// Nodata pixels are black.
pub fn render_rgb(base: &Raster, band: usize, overlay: Overlay<'_>) -> Result<Vec<u8>> {
    let values = base.band(band)?;
    let nodata = base.nodata_mask();
    if let Some(l) = overlay.labels {
        check_dims(base, l.dims())?;
    }
    if let Some(m) = overlay.boundaries {
        check_dims(base, m.dims())?;
    }
    let bounds = stretch_bounds(values, nodata);
    let mut rgb = Vec::with_capacity(values.len() * 3);
    for (i, &v) in values.iter().enumerate() {
        let grey = match bounds {
            _ if nodata[i] => 0,
            Some((lo, hi)) if hi > lo => (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8,
            _ => FLAT_GREY,
        };
        let mut px = [grey; 3];
        if let Some(labels) = overlay.labels {
            let l = labels.labels()[i];
            if l != UNLABELED {
                let c = label_color(l);
                for k in 0..3 {
                    px[k] = ((u16::from(px[k]) + u16::from(c[k])) / 2) as u8;
                }
            }
        }
        if overlay.boundaries.is_some_and(|m| m.bits()[i]) {
            px = HIGHLIGHT;
        }
        rgb.extend_from_slice(&px);
    }
    Ok(rgb)
}

fn check_dims(base: &Raster, dims: (usize, usize)) -> Result<()> {
    if base.dims() != dims {
        return Err(fieldseg_core::Error::DimensionMismatch {
            expected_width: base.width(),
            expected_height: base.height(),
            found_width: dims.0,
            found_height: dims.1,
        }
        .into());
    }
    Ok(())
}

pub fn encode_png(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("writing to memory");
        writer.write_image_data(rgb).expect("buffer matches header");
    }
    out
}

pub fn render_png(base: &Raster, band: usize, overlay: Overlay<'_>) -> Result<Vec<u8>> {
    let rgb = render_rgb(base, band, overlay)?;
    Ok(encode_png(base.width(), base.height(), &rgb))
}

pub fn render_overlay(base: &Raster, band: usize, overlay: Overlay<'_>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = render_png(base, band, overlay)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_base_is_flat_grey() {
        let base = Raster::filled(5, 4, 0.3).unwrap();
        let rgb = render_rgb(&base, 0, Overlay::default()).unwrap();
        assert!(rgb.iter().all(|&b| b == FLAT_GREY));
    }

    #[test]
    fn full_mask_is_all_highlight() {
        let base = Raster::single_band(3, 3, (0..9).map(|v| v as f32).collect()).unwrap();
        let m = Mask::full(3, 3);
        let rgb = render_rgb(&base, 0, Overlay { boundaries: Some(&m), ..Overlay::default() }).unwrap();
        assert!(rgb.chunks(3).all(|p| p == HIGHLIGHT));
    }

    #[test]
    fn stretch_spans_full_range() {
        let base = Raster::single_band(100, 1, (0..100).map(|v| v as f32).collect()).unwrap();
        let rgb = render_rgb(&base, 0, Overlay::default()).unwrap();
        assert_eq!(rgb[0], 0);
        assert_eq!(rgb[99 * 3], 255);
    }

    #[test]
    fn label_colors_are_stable_and_distinct() {
        assert_eq!(label_color(3), label_color(3));
        let c: Vec<_> = (0..4).map(label_color).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(c[i], c[j]);
            }
        }
    }

    #[test]
    fn mismatched_overlay_is_an_error() {
        let base = Raster::filled(3, 3, 0.0).unwrap();
        let m = Mask::empty(3, 2);
        assert!(render_rgb(&base, 0, Overlay { boundaries: Some(&m), ..Overlay::default() }).is_err());
    }
}
