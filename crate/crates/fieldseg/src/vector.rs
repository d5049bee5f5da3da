//! GeoJSON input and output of field polygons.
//!
//! Coordinates are geographic through the field set's geotransform, or pixel
//! corners when the geotransform is the identity. Each feature carries
//! `field_id`, `area_px` and `area_geo` properties.

use std::fs;
use std::path::Path;

use fieldseg_core::fields::Point;
use fieldseg_core::{FieldPolygon, FieldSet, GeoTransform};
use geojson::{Feature, FeatureCollection, GeoJson, Geometry, GeometryValue, JsonObject, Position};
use serde_json::json;

use crate::error::{Error, Result};

pub fn to_feature_collection(fields: &FieldSet) -> Result<FeatureCollection> {
    let gt = fields.geotransform;
    let mut features = Vec::with_capacity(fields.len());
    for poly in &fields.polygons {
        poly.validate()?;
        let rings: Vec<Vec<Position>> = poly
            .rings()
            .map(|ring| ring.iter().map(|&[x, y]| Position::from(gt.to_geo(x, y))).collect())
            .collect();
        let mut props = JsonObject::new();
        props.insert("field_id".into(), json!(poly.field_id));
        props.insert("area_px".into(), json!(poly.area_px));
        props.insert("area_geo".into(), json!(poly.area_geo));
        features.push(Feature {
            geometry: Some(Geometry::new(GeometryValue::Polygon { coordinates: rings })),
            properties: Some(props),
            ..Feature::default()
        });
    }
    Ok(FeatureCollection::new(features))
}

pub fn geojson_string(fields: &FieldSet) -> Result<String> {
    let fc = to_feature_collection(fields)?;
    Ok(serde_json::to_string_pretty(&fc).expect("feature collection serializes") + "\n")
}

pub fn write_geojson(fields: &FieldSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = geojson_string(fields)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads polygons into the pixel frame of a `width × height` raster with the
/// given geotransform.
///
/// Polygon and MultiPolygon geometries are accepted; each polygon of a
/// MultiPolygon becomes its own field. Fields are numbered in file order.
pub fn read_geojson(path: impl AsRef<Path>, width: usize, height: usize, geotransform: GeoTransform) -> Result<FieldSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let gj: GeoJson = text.parse().map_err(|e: geojson::Error| Error::format(path, e.to_string()))?;
    let geometries: Vec<Geometry> = match gj {
        GeoJson::FeatureCollection(fc) => fc.features.into_iter().filter_map(|f| f.geometry).collect(),
        GeoJson::Feature(f) => f.geometry.into_iter().collect(),
        GeoJson::Geometry(g) => vec![g],
    };
    let mut fields = FieldSet::new(width, height, geotransform);
    for g in geometries {
        let parts = match g.value {
            GeometryValue::Polygon { coordinates } => vec![coordinates],
            GeometryValue::MultiPolygon { coordinates } => coordinates,
            other => {
                return Err(Error::format(path, format!("unsupported geometry {}", other.type_name())));
            }
        };
        for rings in parts {
            let id = fields.len();
            fields.polygons.push(polygon_from_rings(id, &rings, &geotransform, path)?);
        }
    }
    Ok(fields)
}

fn polygon_from_rings(id: usize, rings: &[Vec<Position>], gt: &GeoTransform, path: &Path) -> Result<FieldPolygon> {
    let mut converted: Vec<Vec<Point>> = Vec::with_capacity(rings.len());
    for ring in rings {
        let mut pts = Vec::with_capacity(ring.len());
        for p in ring {
            let s = p.as_slice();
            if s.len() < 2 {
                return Err(Error::format(path, "position with fewer than two coordinates"));
            }
            let (x, y) = gt.to_pixel(s[0], s[1]);
            pts.push([x, y]);
        }
        converted.push(pts);
    }
    if converted.is_empty() {
        return Err(Error::format(path, format!("polygon {id} has no rings")));
    }
    let exterior = converted.remove(0);
    let mut poly = FieldPolygon {
        field_id: id,
        exterior,
        holes: converted,
        area_px: 0,
        area_geo: 0.0,
    };
    poly.validate()?;
    let area = poly.polygon_area();
    poly.area_px = area.round().max(0.0) as usize;
    poly.area_geo = area * gt.pixel_area();
    Ok(poly)
}
