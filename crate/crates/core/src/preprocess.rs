//! Cloud masking from a QA bitmask band and NDVI computation.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Sentinel-2 QA60 bits: 10 = opaque clouds, 11 = cirrus.
pub const DEFAULT_CLOUD_BITS: [u32; 2] = [10, 11];

/// Returns a copy of `image` with every pixel whose QA value has any of
/// `cloud_bits` set marked as nodata.
///
/// QA samples are integer flags stored as floats. A QA pixel that is itself
/// nodata, negative or fractional cannot be trusted and masks the pixel too.
pub fn apply_qa_mask(image: &Raster, qa: &Raster, cloud_bits: &[u32]) -> Result<Raster> {
    image.check_same_dims(qa)?;
    if qa.bands() != 1 {
        return Err(Error::NotSingleBand(qa.bands()));
    }
    let mut bit_mask = 0u64;
    for &bit in cloud_bits {
        if bit >= 64 {
            return Err(Error::InvalidParameter(format!("cloud bit {bit} out of range 0..64")));
        }
        bit_mask |= 1 << bit;
    }
    let qa_values = qa.band(0)?;
    let masked: Vec<bool> = qa_values
        .iter()
        .enumerate()
        .map(|(idx, &v)| match qa_flags(v) {
            Some(flags) if !qa.is_nodata(idx) => flags & bit_mask != 0,
            _ => true,
        })
        .collect();
    image.clone().mask_pixels(&masked)
}

fn qa_flags(v: f32) -> Option<u64> {
    if v.is_finite() && v >= 0.0 && libm::truncf(v) == v {
        Some(v as u64)
    } else {
        None
    }
}

/// NDVI of a single pixel; `None` for invalid input or a zero denominator.
///
/// Negative surface reflectances can push the raw ratio outside `[-1, 1]`,
/// so the result is clamped.
pub fn ndvi_value(red: f32, nir: f32) -> Option<f32> {
    if !red.is_finite() || !nir.is_finite() {
        return None;
    }
    let (red, nir) = (f64::from(red), f64::from(nir));
    let sum = nir + red;
    if sum == 0.0 {
        return None;
    }
    Some(((nir - red) / sum).clamp(-1.0, 1.0) as f32)
}

/// Per-pixel `(nir - red) / (nir + red)` from two bands of `image`.
///
/// Nodata pixels and pixels with `red + nir == 0` come out as NaN-valued
/// nodata.
pub fn compute_ndvi(image: &Raster, red_band: usize, nir_band: usize) -> Result<Raster> {
    let red = image.band(red_band)?;
    let nir = image.band(nir_band)?;
    let mut data = Vec::with_capacity(image.pixel_count());
    let mut nodata = Vec::with_capacity(image.pixel_count());
    for (idx, (&r, &n)) in red.iter().zip(nir).enumerate() {
        let v = if image.is_nodata(idx) { None } else { ndvi_value(r, n) };
        data.push(v.unwrap_or(f32::NAN));
        nodata.push(v.is_none());
    }
    Ok(Raster::derived(
        image.width(),
        image.height(),
        data,
        nodata,
        *image.geotransform(),
    ))
}

/// NDVI from two separate single-band rasters.
pub fn compute_ndvi_from_bands(red: &Raster, nir: &Raster) -> Result<Raster> {
    red.check_same_dims(nir)?;
    let mut data = Vec::with_capacity(red.pixel_count());
    let mut nodata = Vec::with_capacity(red.pixel_count());
    for (idx, (&r, &n)) in red.band(0)?.iter().zip(nir.band(0)?).enumerate() {
        let v = if red.is_nodata(idx) || nir.is_nodata(idx) {
            None
        } else {
            ndvi_value(r, n)
        };
        data.push(v.unwrap_or(f32::NAN));
        nodata.push(v.is_none());
    }
    Ok(Raster::derived(
        red.width(),
        red.height(),
        data,
        nodata,
        *red.geotransform(),
    ))
}

/// Default `(red, nir)` band indices for a stack of `bands` bands.
///
/// * 2 bands: `[red, nir]`
/// * 4 bands: the Sentinel-2 10 m stack `[B2, B3, B4, B8]`
/// * 8 or more: Sentinel-2 band order starting at B1 (B4 = 3, B8 = 7)
pub fn default_band_roles(bands: usize) -> Option<(usize, usize)> {
    match bands {
        2 => Some((0, 1)),
        4 => Some((2, 3)),
        b if b >= 8 => Some((3, 7)),
        _ => None,
    }
}
