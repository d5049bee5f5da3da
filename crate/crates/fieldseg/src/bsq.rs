//! Minimal band-sequential raster format.
//!
//! `<path>` holds `width × height × bands` little-endian `f32` samples, band
//! after band, each band row-major. `<path>.json` holds the metadata:
//!
//! ```json
//! {"width": 2, "height": 2, "bands": 1, "nodata_value": null,
//!  "geotransform": {"origin_x": 0.0, "origin_y": 0.0, "pixel_size_x": 1.0, "pixel_size_y": 1.0}}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use fieldseg_core::{GeoTransform, Raster};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    #[serde(default)]
    pub nodata_value: Option<f32>,
    #[serde(default)]
    pub geotransform: GeoTransform,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn read_bsq(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let meta_path = sidecar_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Sidecar =
        serde_json::from_str(&meta_text).map_err(|e| Error::format(&meta_path, e.to_string()))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = meta.width * meta.height * meta.bands * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "expected {expected} bytes for {}x{}x{} f32 samples, found {}",
                meta.width,
                meta.height,
                meta.bands,
                bytes.len()
            ),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let gt = GeoTransform::new(
        meta.geotransform.origin_x,
        meta.geotransform.origin_y,
        meta.geotransform.pixel_size_x,
        meta.geotransform.pixel_size_y,
    )?;
    Ok(Raster::with_nodata_value(meta.width, meta.height, meta.bands, data, meta.nodata_value)?.with_geotransform(gt))
}

/// Writes `raster` and its sidecar.
///
/// Samples are written verbatim, except that pixels masked as nodata whose
/// samples would read back as valid are written as `nodata_value` (or NaN
/// when the raster has none), so the mask survives the round trip.
pub fn write_bsq(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = raster.pixel_count();
    let fill = raster.nodata_value().unwrap_or(f32::NAN);
    let mut bytes = Vec::with_capacity(raster.data().len() * 4);
    for (i, &v) in raster.data().iter().enumerate() {
        let idx = i % n;
        let marks_nodata = !v.is_finite() || raster.nodata_value() == Some(v);
        let v = if raster.is_nodata(idx) && !marks_nodata && !pixel_marked(raster, idx) {
            fill
        } else {
            v
        };
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let meta = Sidecar {
        width: raster.width(),
        height: raster.height(),
        bands: raster.bands(),
        nodata_value: raster.nodata_value(),
        geotransform: *raster.geotransform(),
    };
    let meta_path = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    fs::write(&meta_path, text + "\n").map_err(|e| Error::io(&meta_path, e))
}

/// True when some band of pixel `idx` already encodes nodata in its sample.
fn pixel_marked(raster: &Raster, idx: usize) -> bool {
    (0..raster.bands()).any(|b| {
        let v = raster.sample(b, idx);
        !v.is_finite() || raster.nodata_value() == Some(v)
    })
}
