//! Multiband float raster with a per-pixel nodata mask and an affine
//! north-up geotransform.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Affine map from pixel indices to geographic coordinates (no rotation).
///
/// `geo(col, row) = (origin_x + col * pixel_size_x, origin_y + row * pixel_size_y)`.
/// North-up rasters carry a negative `pixel_size_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size_x: f64,
    pub pixel_size_y: f64,
}

impl GeoTransform {
    /// Pixel space: geo coordinates equal pixel coordinates.
    pub const IDENTITY: GeoTransform = GeoTransform {
        origin_x: 0.0,
        origin_y: 0.0,
        pixel_size_x: 1.0,
        pixel_size_y: 1.0,
    };

    pub fn new(origin_x: f64, origin_y: f64, pixel_size_x: f64, pixel_size_y: f64) -> Result<Self> {
        let finite = [origin_x, origin_y, pixel_size_x, pixel_size_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || pixel_size_x <= 0.0 || pixel_size_y == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "invalid geotransform: origin ({origin_x}, {origin_y}), pixel size ({pixel_size_x}, {pixel_size_y})"
            )));
        }
        Ok(Self {
            origin_x,
            origin_y,
            pixel_size_x,
            pixel_size_y,
        })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn to_geo(&self, col: f64, row: f64) -> (f64, f64) {
        (
            self.origin_x + col * self.pixel_size_x,
            self.origin_y + row * self.pixel_size_y,
        )
    }

    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x) / self.pixel_size_x,
            (y - self.origin_y) / self.pixel_size_y,
        )
    }

    /// Area of one pixel in geo units squared.
    pub fn pixel_area(&self) -> f64 {
        libm::fabs(self.pixel_size_x * self.pixel_size_y)
    }
}

impl Default for GeoTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Band-sequential float32 raster.
///
/// A pixel is nodata when any band holds a non-finite value, when any band
/// equals the optional explicit `nodata_value`, or when it was masked
/// explicitly (e.g. by cloud masking). The stored sample values of nodata
/// pixels are kept untouched so that files round-trip bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f32>,
    nodata: Vec<bool>,
    nodata_value: Option<f32>,
    geotransform: GeoTransform,
}

impl Raster {
    /// Builds a raster from band-sequential samples; nodata is derived from
    /// non-finite samples.
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f32>) -> Result<Self> {
        Self::with_nodata_value(width, height, bands, data, None)
    }

    pub fn with_nodata_value(
        width: usize,
        height: usize,
        bands: usize,
        data: Vec<f32>,
        nodata_value: Option<f32>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::InvalidRaster(format!(
                "dimensions must be at least 1x1x1, got {width}x{height}x{bands}"
            )));
        }
        let n = width * height;
        if data.len() != n * bands {
            return Err(Error::InvalidRaster(format!(
                "expected {} samples for {width}x{height}x{bands}, got {}",
                n * bands,
                data.len()
            )));
        }
        let mut nodata = alloc::vec![false; n];
        for band in data.chunks_exact(n) {
            for (flag, &v) in nodata.iter_mut().zip(band) {
                if !v.is_finite() || nodata_value.is_some_and(|nd| v == nd) {
                    *flag = true;
                }
            }
        }
        Ok(Self {
            width,
            height,
            bands,
            data,
            nodata,
            nodata_value,
            geotransform: GeoTransform::IDENTITY,
        })
    }

    pub fn single_band(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        Self::new(width, height, 1, data)
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, 1, alloc::vec![value; width * height])
    }

    pub fn with_geotransform(mut self, geotransform: GeoTransform) -> Self {
        self.geotransform = geotransform;
        self
    }

    /// Marks additional pixels as nodata (logical OR with the current mask).
    pub fn mask_pixels(mut self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.nodata.len() {
            return Err(Error::InvalidRaster(format!(
                "mask has {} pixels, raster has {}",
                mask.len(),
                self.nodata.len()
            )));
        }
        for (flag, &m) in self.nodata.iter_mut().zip(mask) {
            *flag |= m;
        }
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn geotransform(&self) -> &GeoTransform {
        &self.geotransform
    }

    pub fn nodata_value(&self) -> Option<f32> {
        self.nodata_value
    }

    /// All samples, band-sequential.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn band(&self, band: usize) -> Result<&[f32]> {
        if band >= self.bands {
            return Err(Error::BandOutOfRange {
                band,
                bands: self.bands,
            });
        }
        let n = self.pixel_count();
        Ok(&self.data[band * n..(band + 1) * n])
    }

    /// Sample of `band` at pixel index `idx`; panics on out-of-range input.
    #[inline]
    pub fn sample(&self, band: usize, idx: usize) -> f32 {
        self.data[band * self.pixel_count() + idx]
    }

    pub fn nodata_mask(&self) -> &[bool] {
        &self.nodata
    }

    #[inline]
    pub fn is_nodata(&self, idx: usize) -> bool {
        self.nodata[idx]
    }

    pub fn valid_count(&self) -> usize {
        self.nodata.iter().filter(|&&m| !m).count()
    }

    /// Extracts one band as a single-band raster sharing mask and geotransform.
    pub fn extract_band(&self, band: usize) -> Result<Raster> {
        let data = self.band(band)?.to_vec();
        Ok(Raster {
            width: self.width,
            height: self.height,
            bands: 1,
            data,
            nodata: self.nodata.clone(),
            nodata_value: self.nodata_value,
            geotransform: self.geotransform,
        })
    }

    pub(crate) fn check_same_dims(&self, other: &Raster) -> Result<()> {
        check_dims(self.dims(), other.dims())
    }

    /// Builds a derived single-band raster with an explicit mask; used by
    /// stages whose nodata does not come from the samples themselves.
    pub(crate) fn derived(
        width: usize,
        height: usize,
        data: Vec<f32>,
        nodata: Vec<bool>,
        geotransform: GeoTransform,
    ) -> Raster {
        debug_assert_eq!(data.len(), width * height);
        debug_assert_eq!(nodata.len(), width * height);
        Raster {
            width,
            height,
            bands: 1,
            data,
            nodata,
            nodata_value: None,
            geotransform,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_wrong_sample_count() {
        assert!(matches!(
            Raster::new(2, 2, 1, vec![1.0; 3]),
            Err(Error::InvalidRaster(_))
        ));
        assert!(Raster::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn non_finite_and_explicit_nodata() {
        let r = Raster::with_nodata_value(3, 1, 2, vec![1.0, f32::NAN, 3.0, 4.0, 5.0, -9999.0], Some(-9999.0))
            .unwrap();
        assert_eq!(r.nodata_mask(), &[false, true, true]);
        assert_eq!(r.valid_count(), 1);
        assert_eq!(r.band(1).unwrap(), &[4.0, 5.0, -9999.0]);
    }

    #[test]
    fn band_out_of_range() {
        let r = Raster::filled(2, 2, 0.0).unwrap();
        assert_eq!(r.band(1), Err(Error::BandOutOfRange { band: 1, bands: 1 }));
    }

    #[test]
    fn geotransform_maps_corners() {
        let gt = GeoTransform::new(500000.0, 4470000.0, 10.0, -10.0).unwrap();
        assert_eq!(gt.to_geo(1.0, 1.0), (500010.0, 4469990.0));
        assert_eq!(gt.to_pixel(500010.0, 4469990.0), (1.0, 1.0));
        assert_eq!(gt.pixel_area(), 100.0);
        assert!(!gt.is_identity());
        assert!(GeoTransform::new(0.0, 0.0, -1.0, 1.0).is_err());
    }
}
