//! End-to-end delineation: mask, NDVI, superpixels, edges, fusion, closing,
//! field extraction.

use alloc::format;

use crate::boundary::{cluster_boundaries, extract_fields, fuse, morph_close};
use crate::canny::{gaussian_smooth, gradient, hysteresis, non_max_suppression};
use crate::error::{Error, Result};
use crate::fields::FieldSet;
use crate::labels::LabelImage;
use crate::mask::Mask;
use crate::params::PipelineParams;
use crate::preprocess::{apply_qa_mask, compute_ndvi, default_band_roles};
use crate::raster::Raster;
use crate::snic::snic_segment;

/// Every intermediate product of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub ndvi: Raster,
    pub snic_labels: LabelImage,
    pub snic_boundaries: Mask,
    pub edges: Mask,
    pub fused: Mask,
    /// Fused boundaries after morphological closing.
    pub boundaries: Mask,
    pub regions: LabelImage,
    pub fields: FieldSet,
    /// Hysteresis thresholds actually applied.
    pub thresholds: (f64, f64),
}

/// NDVI of a multiband reflectance image after optional QA masking.
pub fn ndvi_stage(image: &Raster, qa: Option<&Raster>, params: &PipelineParams) -> Result<Raster> {
    let (red, nir) = match (params.red_band, params.nir_band) {
        (Some(r), Some(n)) => (r, n),
        (r, n) => {
            let (dr, dn) = default_band_roles(image.bands()).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no default red/NIR bands for a {}-band image; set both band indices",
                    image.bands()
                ))
            })?;
            (r.unwrap_or(dr), n.unwrap_or(dn))
        }
    };
    let masked;
    let image = match qa {
        Some(qa) => {
            masked = apply_qa_mask(image, qa, &params.cloud_bits)?;
            &masked
        }
        None => image,
    };
    compute_ndvi(image, red, nir)
}

/// Canny edges of `ndvi`, resolving percentile thresholds if requested.
pub fn edge_stage(ndvi: &Raster, params: &PipelineParams) -> Result<(Mask, (f64, f64))> {
    let canny = params.canny()?;
    let smoothed = gaussian_smooth(ndvi, canny.sigma)?;
    let g = gradient(&smoothed)?;
    let pick = |pct: Option<f64>, fixed: f64| -> Result<f64> {
        match pct {
            None => Ok(fixed),
            Some(p) => g.magnitude_percentile(p).ok_or_else(|| {
                Error::InvalidParameter("percentile thresholds need at least one valid gradient pixel".into())
            }),
        }
    };
    let low = pick(params.low_percentile, params.low)?;
    let high = pick(params.high_percentile, params.high)?;
    if low > high {
        return Err(Error::InvalidParameter(format!(
            "resolved thresholds out of order: low {low} > high {high}"
        )));
    }
    let ridges = non_max_suppression(&g);
    Ok((hysteresis(&g, &ridges, low, high), (low, high)))
}

pub fn snic_stage(ndvi: &Raster, params: &PipelineParams) -> Result<LabelImage> {
    snic_segment(ndvi, &params.snic()?)
}

/// Fusion, closing and field extraction from precomputed stage outputs.
pub fn finish(
    ndvi: &Raster,
    snic_labels: LabelImage,
    edges: Mask,
    thresholds: (f64, f64),
    params: &PipelineParams,
) -> Result<PipelineOutput> {
    params.validate()?;
    let snic_b = cluster_boundaries(&snic_labels, ndvi, params.snic_contrast)?;
    let fused = fuse(&snic_b, &edges)?;
    let boundaries = morph_close(&fused, params.close_kernel)?;
    let (regions, fields) = extract_fields(
        &boundaries,
        Some(ndvi.nodata_mask()),
        params.min_area_px,
        *ndvi.geotransform(),
    )?;
    Ok(PipelineOutput {
        ndvi: ndvi.clone(),
        snic_labels,
        snic_boundaries: snic_b,
        edges,
        fused,
        boundaries,
        regions,
        fields,
        thresholds,
    })
}

/// Runs every stage starting from an NDVI raster.
pub fn run_from_ndvi(ndvi: &Raster, params: &PipelineParams) -> Result<PipelineOutput> {
    params.validate()?;
    if ndvi.bands() != 1 {
        return Err(Error::NotSingleBand(ndvi.bands()));
    }
    let labels = snic_stage(ndvi, params)?;
    let (edges, thresholds) = edge_stage(ndvi, params)?;
    finish(ndvi, labels, edges, thresholds, params)
}

/// Runs every stage starting from a reflectance image and optional QA band.
pub fn run(image: &Raster, qa: Option<&Raster>, params: &PipelineParams) -> Result<PipelineOutput> {
    params.validate()?;
    let ndvi = ndvi_stage(image, qa, params)?;
    run_from_ndvi(&ndvi, params)
}
