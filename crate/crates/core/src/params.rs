//! Tunable parameters of the whole pipeline.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::canny::CannyParams;
use crate::error::{Error, Result};
use crate::preprocess::DEFAULT_CLOUD_BITS;
use crate::snic::{Connectivity, SnicParams};

/// Flat parameter record; serializes with the delineation parameters first
/// (`size`, `compactness`, `sigma`, `low`, `high`, `close_kernel`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub size: usize,
    pub compactness: f64,
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
    pub close_kernel: usize,
    pub min_area_px: usize,
    /// 4 or 8.
    pub connectivity: u8,
    /// Minimum mean difference for a superpixel border to count as a boundary.
    pub snic_contrast: f64,
    /// When set, `low`/`high` are replaced by these percentiles (0–100) of the
    /// smoothed NDVI gradient magnitude.
    pub low_percentile: Option<f64>,
    pub high_percentile: Option<f64>,
    pub cloud_bits: Vec<u32>,
    pub red_band: Option<usize>,
    pub nir_band: Option<usize>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        let snic = SnicParams::default();
        let canny = CannyParams::default();
        Self {
            size: snic.size,
            compactness: snic.compactness,
            sigma: canny.sigma,
            low: canny.low_threshold,
            high: canny.high_threshold,
            close_kernel: 3,
            min_area_px: 50,
            connectivity: 4,
            snic_contrast: 0.1,
            low_percentile: None,
            high_percentile: None,
            cloud_bits: DEFAULT_CLOUD_BITS.to_vec(),
            red_band: None,
            nir_band: None,
        }
    }
}

impl PipelineParams {
    pub fn snic(&self) -> Result<SnicParams> {
        let p = SnicParams {
            size: self.size,
            compactness: self.compactness,
            connectivity: Connectivity::from_count(self.connectivity)?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Canny parameters with the fixed thresholds.
    pub fn canny(&self) -> Result<CannyParams> {
        let p = CannyParams {
            sigma: self.sigma,
            low_threshold: self.low,
            high_threshold: self.high,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.snic()?;
        self.canny()?;
        if self.close_kernel == 0 || self.close_kernel.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "close kernel must be odd and ≥ 1, got {}",
                self.close_kernel
            )));
        }
        if !(self.snic_contrast >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "snic contrast must be ≥ 0, got {}",
                self.snic_contrast
            )));
        }
        for p in [self.low_percentile, self.high_percentile].into_iter().flatten() {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("percentile {p} outside 0..=100")));
            }
        }
        if let (Some(lo), Some(hi)) = (self.low_percentile, self.high_percentile) {
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "low percentile {lo} exceeds high percentile {hi}"
                )));
            }
        }
        Ok(())
    }
}
