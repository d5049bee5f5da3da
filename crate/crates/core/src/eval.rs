//! Comparison of predicted fields against reference polygons.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::boundary::{dilate, label_boundaries};
use crate::error::{check_dims, Error, Result};
use crate::fields::{FieldPolygon, FieldSet, Point};
use crate::labels::{LabelImage, UNLABELED};
use crate::mask::{BoundaryMask, Mask};

#[derive(Debug, Clone, PartialEq)]
pub enum RasterizeWarning {
    /// The polygon does not cover any pixel center of the raster.
    OutsideExtent { field_id: usize },
    /// Part of the polygon lies outside the raster and was clipped.
    Clipped { field_id: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rasterized {
    pub labels: LabelImage,
    pub warnings: Vec<RasterizeWarning>,
}

fn ring_contains(ring: &[Point], x: f64, y: f64) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let ([x0, y0], [x1, y1]) = (w[0], w[1]);
        if (y0 > y) != (y1 > y) {
            let xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0);
            if x < xc {
                inside = !inside;
            }
        }
    }
    inside
}

/// Even-odd point-in-polygon over all rings of `polygon`.
pub fn polygon_contains(polygon: &FieldPolygon, x: f64, y: f64) -> bool {
    polygon.rings().filter(|r| ring_contains(r, x, y)).count() % 2 == 1
}

/// Burns polygons (pixel-corner coordinates) into a `width × height` label
/// image; polygon `i` gets label `i`. A pixel is covered when its center is
/// inside the polygon. Two polygons covering the same pixel center is an
/// error.
pub fn rasterize(fields: &FieldSet, width: usize, height: usize) -> Result<Rasterized> {
    let mut labels = vec![UNLABELED; width * height];
    let mut warnings = Vec::new();
    for (i, poly) in fields.polygons.iter().enumerate() {
        poly.validate()?;
        let (x0, y0, x1, y1) = poly.bounds();
        if x0 < 0.0 || y0 < 0.0 || x1 > width as f64 || y1 > height as f64 {
            warnings.push(RasterizeWarning::Clipped {
                field_id: poly.field_id,
            });
        }
        // Pixel centers c + 0.5 within [x0, x1].
        let c0 = libm::ceil(x0 - 0.5).max(0.0) as usize;
        let r0 = libm::ceil(y0 - 0.5).max(0.0) as usize;
        let c1 = (libm::floor(x1 - 0.5) + 1.0).clamp(0.0, width as f64) as usize;
        let r1 = (libm::floor(y1 - 0.5) + 1.0).clamp(0.0, height as f64) as usize;
        let mut covered = 0usize;
        for row in r0..r1 {
            for col in c0..c1 {
                if !polygon_contains(poly, col as f64 + 0.5, row as f64 + 0.5) {
                    continue;
                }
                let idx = row * width + col;
                if labels[idx] != UNLABELED {
                    return Err(Error::OverlappingPolygons {
                        first: labels[idx] as usize,
                        second: i,
                        col,
                        row,
                    });
                }
                labels[idx] = i as i32;
                covered += 1;
            }
        }
        if covered == 0 {
            warnings.retain(|w| *w != RasterizeWarning::Clipped { field_id: poly.field_id });
            warnings.push(RasterizeWarning::OutsideExtent {
                field_id: poly.field_id,
            });
        }
    }
    // One label slot per polygon, even for polygons that cover no pixel.
    let counted = LabelImage::from_labels(width, height, labels)?;
    let mut sizes = counted.cluster_sizes().to_vec();
    sizes.resize(fields.len(), 0);
    let labels = LabelImage::from_parts(width, height, counted.labels().to_vec(), 0, Vec::new(), sizes);
    Ok(Rasterized { labels, warnings })
}

/// `|a ∩ b| / |a ∪ b|`, 0 when both are empty.
pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMatch {
    pub pred_id: usize,
    pub truth_id: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMatching {
    pub matches: Vec<FieldMatch>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_matched_iou: f64,
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// IoU of every overlapping `(pred, truth)` label pair, keyed by the pair.
pub fn pairwise_iou(pred: &LabelImage, truth: &LabelImage) -> Result<BTreeMap<(usize, usize), f64>> {
    check_dims(pred.dims(), truth.dims())?;
    let mut inter: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        if p >= 0 && t >= 0 {
            *inter.entry((p as usize, t as usize)).or_default() += 1;
        }
    }
    let (ps, ts) = (pred.cluster_sizes(), truth.cluster_sizes());
    Ok(inter
        .into_iter()
        .map(|((p, t), n)| ((p, t), n as f64 / (ps[p] + ts[t] - n) as f64))
        .collect())
}

/// Greedy one-to-one matching by descending IoU among pairs with
/// `IoU ≥ iou_threshold`; ties are broken by `(pred_id, truth_id)`.
///
/// Precision is matches over predicted fields and recall matches over
/// reference fields; either is 0 when its denominator is 0.
pub fn match_fields(pred: &LabelImage, truth: &LabelImage, iou_threshold: f64) -> Result<FieldMatching> {
    let mut candidates: Vec<FieldMatch> = pairwise_iou(pred, truth)?
        .into_iter()
        .filter(|&(_, v)| v >= iou_threshold)
        .map(|((pred_id, truth_id), iou)| FieldMatch { pred_id, truth_id, iou })
        .collect();
    candidates.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(a.pred_id.cmp(&b.pred_id))
            .then(a.truth_id.cmp(&b.truth_id))
    });
    let mut pred_used = vec![false; pred.cluster_count()];
    let mut truth_used = vec![false; truth.cluster_count()];
    let mut matches = Vec::new();
    for c in candidates {
        if !pred_used[c.pred_id] && !truth_used[c.truth_id] {
            pred_used[c.pred_id] = true;
            truth_used[c.truth_id] = true;
            matches.push(c);
        }
    }
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let precision = ratio(matches.len(), pred.cluster_count());
    let recall = ratio(matches.len(), truth.cluster_count());
    let mean_matched_iou = if matches.is_empty() {
        0.0
    } else {
        matches.iter().map(|m| m.iou).sum::<f64>() / matches.len() as f64
    };
    Ok(FieldMatching {
        matches,
        precision,
        recall,
        f1: f1_score(precision, recall),
        mean_matched_iou,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn hits_within(a: &Mask, b_dilated: &Mask) -> (usize, usize) {
    let total = a.count();
    let hit = a
        .bits()
        .iter()
        .zip(b_dilated.bits())
        .filter(|(&x, &y)| x && y)
        .count();
    (hit, total)
}

/// Boundary precision/recall with a Chebyshev distance tolerance.
///
/// A pixel counts as matched when a pixel of the other mask lies within
/// Chebyshev distance `tolerance_px`; this is membership in the other mask
/// dilated by a `(2·tol + 1)`-square.
pub fn boundary_metrics(pred: &BoundaryMask, truth: &BoundaryMask, tolerance_px: usize) -> Result<BoundaryScores> {
    pred.check_same_dims(truth)?;
    let kernel = 2 * tolerance_px + 1;
    let (p_hit, p_total) = hits_within(pred, &dilate(truth, kernel)?);
    let (t_hit, t_total) = hits_within(truth, &dilate(pred, kernel)?);
    let precision = if p_total == 0 { 0.0 } else { p_hit as f64 / p_total as f64 };
    let recall = if t_total == 0 { 0.0 } else { t_hit as f64 / t_total as f64 };
    Ok(BoundaryScores {
        precision,
        recall,
        f1: f1_score(precision, recall),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalParams {
    pub iou_threshold: f64,
    pub tolerance_px: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            tolerance_px: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean_matched_iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub boundary_precision: f64,
    pub boundary_recall: f64,
    pub boundary_f1: f64,
    pub matches: Vec<FieldMatch>,
    pub params: EvalParams,
}

/// Field matching plus boundary scores, with boundaries derived from both
/// label images by [`label_boundaries`].
pub fn evaluate(pred: &LabelImage, truth: &LabelImage, params: EvalParams) -> Result<EvalReport> {
    let m = match_fields(pred, truth, params.iou_threshold)?;
    let b = boundary_metrics(&label_boundaries(pred), &label_boundaries(truth), params.tolerance_px)?;
    Ok(EvalReport {
        mean_matched_iou: m.mean_matched_iou,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        boundary_precision: b.precision,
        boundary_recall: b.recall,
        boundary_f1: b.f1,
        matches: m.matches,
        params,
    })
}
