//! Boundary fusion and field extraction.
//!
//! Cluster boundaries and edges are OR-ed, closed morphologically, and the
//! connected regions of what remains become fields. Boundary pixels belong
//! to no field.

mod morph;
mod trace;

pub use morph::{dilate, erode, morph_close};
pub use trace::{trace_all, trace_component, Ring};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fields::{FieldPolygon, FieldSet};
use crate::labels::{LabelImage, UNLABELED};
use crate::mask::{BoundaryMask, EdgeMask, Mask};
use crate::raster::{GeoTransform, Raster};

const FOUR_NEIGHBOURS: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

fn for_each_neighbour4(w: usize, h: usize, col: usize, row: usize, mut f: impl FnMut(usize)) {
    for (dc, dr) in FOUR_NEIGHBOURS {
        let (c, r) = (col as isize + dc, row as isize + dr);
        if c >= 0 && r >= 0 && c < w as isize && r < h as isize {
            f(r as usize * w + c as usize);
        }
    }
}

/// Labelled pixels with a 4-neighbour carrying a different label (including
/// unlabelled/nodata neighbours). The image border is not a boundary and
/// unlabelled pixels are never marked.
pub fn label_boundaries(labels: &LabelImage) -> BoundaryMask {
    let (w, h) = labels.dims();
    let l = labels.labels();
    let mut mask = Mask::empty(w, h);
    for row in 0..h {
        for col in 0..w {
            let own = l[row * w + col];
            if own == UNLABELED {
                continue;
            }
            let mut differs = false;
            for_each_neighbour4(w, h, col, row, |j| differs |= l[j] != own);
            if differs {
                mask.set(col, row, true);
            }
        }
    }
    mask
}

/// Like [`label_boundaries`], but a boundary between two clusters is only
/// reported when their mean values (recomputed from `image`, Euclidean over
/// bands) differ by at least `min_contrast`. Boundaries against unlabelled
/// pixels are always kept. `min_contrast = 0` reproduces
/// [`label_boundaries`] exactly.
pub fn cluster_boundaries(labels: &LabelImage, image: &Raster, min_contrast: f64) -> Result<BoundaryMask> {
    if !(min_contrast >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "min_contrast must be ≥ 0, got {min_contrast}"
        )));
    }
    let stats = labels.clone().with_means_from(image)?;
    let (w, h) = labels.dims();
    let l = labels.labels();
    let contrast = |a: i32, b: i32| -> f64 {
        let (ma, mb) = (stats.cluster_mean(a as usize), stats.cluster_mean(b as usize));
        libm::sqrt(ma.iter().zip(mb).map(|(x, y)| (x - y) * (x - y)).sum())
    };
    let mut mask = Mask::empty(w, h);
    for row in 0..h {
        for col in 0..w {
            let own = l[row * w + col];
            if own == UNLABELED {
                continue;
            }
            let mut boundary = false;
            for_each_neighbour4(w, h, col, row, |j| {
                let other = l[j];
                boundary |= other == UNLABELED || (other != own && contrast(own, other) >= min_contrast);
            });
            if boundary {
                mask.set(col, row, true);
            }
        }
    }
    Ok(mask)
}

/// Per-pixel union.
pub fn fuse(cluster_boundaries: &BoundaryMask, edges: &EdgeMask) -> Result<BoundaryMask> {
    cluster_boundaries.check_same_dims(edges)?;
    let bits = cluster_boundaries
        .bits()
        .iter()
        .zip(edges.bits())
        .map(|(&a, &b)| a || b)
        .collect();
    Mask::from_bits(cluster_boundaries.width(), cluster_boundaries.height(), bits)
}

/// 4-connected components of `foreground`, numbered in row-major order of
/// their first pixel. Returns the label per pixel and the pixel count per
/// component.
pub fn connected_components(width: usize, height: usize, foreground: &[bool]) -> (Vec<i32>, Vec<usize>) {
    let mut labels = vec![UNLABELED; width * height];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..width * height {
        if !foreground[start] || labels[start] != UNLABELED {
            continue;
        }
        let id = sizes.len() as i32;
        let mut size = 0;
        labels[start] = id;
        stack.push(start);
        while let Some(p) = stack.pop() {
            size += 1;
            for_each_neighbour4(width, height, p % width, p / width, |q| {
                if foreground[q] && labels[q] == UNLABELED {
                    labels[q] = id;
                    stack.push(q);
                }
            });
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Turns the regions enclosed by `boundaries` into fields.
///
/// Components (4-connected) of non-boundary, non-nodata pixels smaller than
/// `min_area_px` are dropped and their pixels left unlabelled. Survivors are
/// renumbered densely in row-major order and traced into polygons.
pub fn extract_fields(
    boundaries: &BoundaryMask,
    nodata: Option<&[bool]>,
    min_area_px: usize,
    geotransform: GeoTransform,
) -> Result<(LabelImage, FieldSet)> {
    let (w, h) = boundaries.dims();
    if let Some(nd) = nodata {
        if nd.len() != w * h {
            return Err(Error::InvalidRaster(alloc::format!(
                "nodata mask has {} pixels, boundary mask {}",
                nd.len(),
                w * h
            )));
        }
    }
    let foreground: Vec<bool> = boundaries
        .bits()
        .iter()
        .enumerate()
        .map(|(i, &b)| !b && !nodata.is_some_and(|nd| nd[i]))
        .collect();
    let (mut labels, sizes) = connected_components(w, h, &foreground);

    let mut remap = vec![UNLABELED; sizes.len()];
    let mut kept = 0;
    for (old, &size) in sizes.iter().enumerate() {
        if size >= min_area_px {
            remap[old] = kept;
            kept += 1;
        }
    }
    for l in labels.iter_mut() {
        if *l != UNLABELED {
            *l = remap[*l as usize];
        }
    }
    let regions = LabelImage::from_labels(w, h, labels)?;

    let mut fields = FieldSet::new(w, h, geotransform);
    for (id, rings) in trace_all(&regions).into_iter().enumerate() {
        let (exterior, holes) = trace::split_exterior(rings);
        let area_px = regions.cluster_sizes()[id];
        fields.polygons.push(FieldPolygon {
            field_id: id,
            exterior,
            holes,
            area_px,
            area_geo: area_px as f64 * geotransform.pixel_area(),
        });
    }
    Ok((regions, fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::signed_area;

    fn split_labels(w: usize, h: usize, split: usize) -> LabelImage {
        let l = (0..w * h).map(|i| if i % w < split { 0 } else { 1 }).collect();
        LabelImage::from_labels(w, h, l).unwrap()
    }

    #[test]
    fn single_cluster_has_no_boundary() {
        let l = LabelImage::from_labels(4, 3, vec![0; 12]).unwrap();
        assert!(label_boundaries(&l).is_empty());
        let l = LabelImage::from_labels(4, 3, vec![UNLABELED; 12]).unwrap();
        assert!(label_boundaries(&l).is_empty());
    }

    #[test]
    fn split_boundary_is_two_columns() {
        let (w, h, c) = (8, 5, 3);
        let m = label_boundaries(&split_labels(w, h, c));
        for row in 0..h {
            for col in 0..w {
                assert_eq!(m.get(col, row), col == c - 1 || col == c, "({col},{row})");
            }
        }
    }

    #[test]
    fn unlabelled_neighbour_marks_boundary() {
        let l = LabelImage::from_labels(3, 1, vec![0, UNLABELED, 0]).unwrap();
        assert_eq!(label_boundaries(&l).bits(), &[true, false, true]);
    }

    #[test]
    fn contrast_gating() {
        let labels = LabelImage::from_labels(4, 1, vec![0, 0, 1, 1]).unwrap();
        let img = Raster::single_band(4, 1, vec![0.5, 0.5, 0.52, 0.52]).unwrap();
        assert!(cluster_boundaries(&labels, &img, 0.1).unwrap().is_empty());
        assert_eq!(
            cluster_boundaries(&labels, &img, 0.0).unwrap(),
            label_boundaries(&labels)
        );
        let img = Raster::single_band(4, 1, vec![0.1, 0.1, 0.6, 0.6]).unwrap();
        assert_eq!(
            cluster_boundaries(&labels, &img, 0.1).unwrap().bits(),
            &[false, true, true, false]
        );
    }

    #[test]
    fn fuse_examples() {
        let mut a = Mask::empty(3, 3);
        a.set(0, 0, true);
        let mut b = Mask::empty(3, 3);
        b.set(2, 2, true);
        let e = Mask::empty(3, 3);
        assert_eq!(fuse(&a, &e).unwrap(), a);
        assert_eq!(fuse(&e, &b).unwrap(), b);
        assert_eq!(fuse(&a, &b).unwrap().count(), 2);
        assert!(matches!(
            fuse(&a, &Mask::empty(3, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_boundaries_yield_one_field() {
        let (regions, fields) = extract_fields(&Mask::empty(10, 10), None, 1, GeoTransform::IDENTITY).unwrap();
        assert_eq!(regions.cluster_count(), 1);
        assert_eq!(fields.len(), 1);
        let f = &fields.polygons[0];
        assert_eq!(f.area_px, 100);
        assert_eq!(
            f.exterior,
            vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0], [0.0, 0.0]]
        );
        assert!(f.holes.is_empty());
    }

    fn rectangle_boundary() -> Mask {
        // 11x11 image; boundary ring on rows/cols 2..=8 encloses 3..=7 (5x5).
        let mut m = Mask::empty(11, 11);
        for i in 2..=8 {
            m.set(i, 2, true);
            m.set(i, 8, true);
            m.set(2, i, true);
            m.set(8, i, true);
        }
        m
    }

    #[test]
    fn enclosed_rectangle() {
        let (regions, fields) = extract_fields(&rectangle_boundary(), None, 1, GeoTransform::IDENTITY).unwrap();
        assert_eq!(fields.len(), 2);
        let outside = &fields.polygons[0];
        let inside = &fields.polygons[1];
        assert_eq!(inside.area_px, 25);
        assert_eq!(outside.area_px, 121 - 49);
        assert_eq!(
            inside.exterior,
            vec![[3.0, 3.0], [8.0, 3.0], [8.0, 8.0], [3.0, 8.0], [3.0, 3.0]]
        );
        assert_eq!(outside.holes.len(), 1);
        assert_eq!(signed_area(&outside.holes[0]), -49.0);
        assert_eq!(outside.polygon_area(), 72.0);
        assert_eq!(regions.label(5, 5), 1);
        assert_eq!(regions.label(2, 2), UNLABELED);
    }

    #[test]
    fn enclosed_rectangle_min_area() {
        let (regions, fields) = extract_fields(&rectangle_boundary(), None, 30, GeoTransform::IDENTITY).unwrap();
        assert_eq!(fields.len(), 1);
        assert_eq!(fields.polygons[0].area_px, 72);
        assert_eq!(regions.label(5, 5), UNLABELED);
    }

    #[test]
    fn nodata_pixels_are_not_fields() {
        let mut nd = vec![false; 16];
        nd[5] = true;
        let (regions, fields) = extract_fields(&Mask::empty(4, 4), Some(&nd), 1, GeoTransform::IDENTITY).unwrap();
        assert_eq!(fields.polygons[0].area_px, 15);
        assert_eq!(regions.labels()[5], UNLABELED);
        assert_eq!(fields.polygons[0].holes.len(), 1);
    }

    #[test]
    fn geo_area_uses_pixel_size() {
        let gt = GeoTransform::new(0.0, 0.0, 10.0, -10.0).unwrap();
        let (_, fields) = extract_fields(&Mask::empty(3, 2), None, 1, gt).unwrap();
        assert_eq!(fields.polygons[0].area_geo, 600.0);
    }
}
