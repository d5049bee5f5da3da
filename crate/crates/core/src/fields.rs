//! Vectorized field polygons.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::GeoTransform;

/// A point in pixel-corner coordinates: `[x, y]` with `x` along columns and
/// `y` along rows, `(0, 0)` being the top-left corner of the raster.
pub type Point = [f64; 2];

/// One field: an exterior ring with optional holes, all closed
/// (first point repeated last) and in pixel-corner coordinates.
///
/// Exterior rings have positive signed (shoelace) area in pixel coordinates,
/// holes negative.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPolygon {
    pub field_id: usize,
    pub exterior: Vec<Point>,
    pub holes: Vec<Vec<Point>>,
    pub area_px: usize,
    pub area_geo: f64,
}

impl FieldPolygon {
    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point>> {
        core::iter::once(&self.exterior).chain(self.holes.iter())
    }

    /// Checks that every ring is closed and has at least 4 points.
    pub fn validate(&self) -> Result<()> {
        for ring in self.rings() {
            if ring.len() < 4 || ring.first() != ring.last() {
                return Err(Error::UnclosedRing {
                    field_id: self.field_id,
                });
            }
        }
        Ok(())
    }

    /// Exterior area minus hole areas, in square pixels.
    pub fn polygon_area(&self) -> f64 {
        libm::fabs(signed_area(&self.exterior))
            - self.holes.iter().map(|h| libm::fabs(signed_area(h))).sum::<f64>()
    }

    /// Axis-aligned bounds `(min_x, min_y, max_x, max_y)` of the exterior.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.exterior.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p[0]), y0.min(p[1]), x1.max(p[0]), y1.max(p[1])),
        )
    }
}

/// Shoelace signed area of a closed ring.
pub fn signed_area(ring: &[Point]) -> f64 {
    ring.windows(2)
        .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
        .sum::<f64>()
        / 2.0
}

/// Polygons extracted from (or rasterized onto) one raster frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub width: usize,
    pub height: usize,
    pub geotransform: GeoTransform,
    pub polygons: Vec<FieldPolygon>,
}

impl FieldSet {
    pub fn new(width: usize, height: usize, geotransform: GeoTransform) -> Self {
        Self {
            width,
            height,
            geotransform,
            polygons: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Validates rings and that ids are exactly `0..len` in order.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.polygons.iter().enumerate() {
            p.validate()?;
            if p.field_id != i {
                return Err(Error::InvalidParameter(alloc::format!(
                    "field ids must be dense from 0: position {i} has id {}",
                    p.field_id
                )));
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle polygon covering pixels `[x0, x1) × [y0, y1)`.
pub fn rectangle(field_id: usize, x0: usize, y0: usize, x1: usize, y1: usize, geotransform: &GeoTransform) -> FieldPolygon {
    let (a, b, c, d) = (x0 as f64, y0 as f64, x1 as f64, y1 as f64);
    let area_px = (x1 - x0) * (y1 - y0);
    FieldPolygon {
        field_id,
        exterior: alloc::vec![[a, b], [c, b], [c, d], [a, d], [a, b]],
        holes: Vec::new(),
        area_px,
        area_geo: area_px as f64 * geotransform.pixel_area(),
    }
}
