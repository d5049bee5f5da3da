//! Format dispatch and conversions between stage products and rasters.

use std::path::Path;

use fieldseg_core::{Error as CoreError, LabelImage, Mask, Raster};

use crate::error::{Error, Result};
use crate::{bsq, geotiff};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RasterFormat {
    Geotiff,
    Bsq,
}

impl RasterFormat {
    /// `.tif`/`.tiff` is GeoTIFF, anything else BSQ.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(e) if e == "tif" || e == "tiff" => RasterFormat::Geotiff,
            _ => RasterFormat::Bsq,
        }
    }
}

/// Reads a raster; the format is guessed from the extension unless given.
/// `scale` divides integer GeoTIFF samples.
pub fn read_raster(path: impl AsRef<Path>, format: Option<RasterFormat>, scale: f64) -> Result<Raster> {
    let path = path.as_ref();
    match format.unwrap_or_else(|| RasterFormat::from_path(path)) {
        RasterFormat::Geotiff => geotiff::read_geotiff(path, scale),
        RasterFormat::Bsq => bsq::read_bsq(path),
    }
}

/// Concatenates the bands of several rasters of identical size. The
/// geotransform of the first raster is kept; a pixel is nodata if it is
/// nodata in any input.
pub fn stack_bands(rasters: &[Raster]) -> Result<Raster> {
    let first = rasters
        .first()
        .ok_or_else(|| CoreError::InvalidRaster("no rasters to stack".into()))?;
    let (w, h) = first.dims();
    let mut data = Vec::new();
    let mut mask = vec![false; w * h];
    let mut bands = 0;
    for r in rasters {
        if r.dims() != (w, h) {
            return Err(CoreError::DimensionMismatch {
                expected_width: w,
                expected_height: h,
                found_width: r.width(),
                found_height: r.height(),
            }
            .into());
        }
        data.extend_from_slice(r.data());
        for (m, &nd) in mask.iter_mut().zip(r.nodata_mask()) {
            *m |= nd;
        }
        bands += r.bands();
    }
    if rasters.len() == 1 {
        return Ok(first.clone());
    }
    Ok(Raster::new(w, h, bands, data)?
        .mask_pixels(&mask)?
        .with_geotransform(*first.geotransform()))
}

pub fn labels_to_raster(labels: &LabelImage, like: &Raster) -> Raster {
    let data = labels.labels().iter().map(|&l| l as f32).collect();
    Raster::single_band(labels.width(), labels.height(), data)
        .expect("label image has valid dimensions")
        .with_geotransform(*like.geotransform())
}

/// Inverse of [`labels_to_raster`]: integral samples `≥ -1`.
pub fn raster_to_labels(raster: &Raster, path: &Path) -> Result<LabelImage> {
    let band = single_band(raster, path)?;
    let mut labels = Vec::with_capacity(band.len());
    for &v in band {
        if !(v.is_finite() && v.fract() == 0.0 && v >= -1.0 && v < i32::MAX as f32) {
            return Err(Error::format(path, format!("not a label raster: sample {v}")));
        }
        labels.push(v as i32);
    }
    Ok(LabelImage::from_labels(raster.width(), raster.height(), labels)?)
}

pub fn mask_to_raster(mask: &Mask, like: &Raster) -> Raster {
    let data = mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Raster::single_band(mask.width(), mask.height(), data)
        .expect("mask has valid dimensions")
        .with_geotransform(*like.geotransform())
}

/// Nonzero finite samples are set.
pub fn raster_to_mask(raster: &Raster, path: &Path) -> Result<Mask> {
    let bits = single_band(raster, path)?.iter().map(|&v| v.is_finite() && v != 0.0).collect();
    Ok(Mask::from_bits(raster.width(), raster.height(), bits)?)
}

fn single_band<'a>(raster: &'a Raster, path: &Path) -> Result<&'a [f32]> {
    if raster.bands() != 1 {
        return Err(Error::format(path, format!("expected one band, found {}", raster.bands())));
    }
    Ok(raster.band(0)?)
}
