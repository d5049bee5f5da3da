//! GeoTIFF reader for `u16` and `f32` rasters.
//!
//! Only uncompressed and deflate images are accepted. Georeferencing comes
//! from the ModelPixelScale and ModelTiepoint tags; without them the raster
//! is in pixel space. A GDAL nodata tag, when present, masks matching
//! samples.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use fieldseg_core::{GeoTransform, Raster};
use tiff::decoder::{Decoder, DecodingResult, Limits};
use tiff::tags::Tag;
use tiff::ColorType;

use crate::error::{Error, Result};

/// Sentinel-2 L2A reflectances are stored as `u16` scaled by 10000.
pub const DEFAULT_REFLECTANCE_SCALE: f64 = 10000.0;

const MODEL_PIXEL_SCALE: u16 = 33550;
const MODEL_TIEPOINT: u16 = 33922;
const GDAL_NODATA: u16 = 42113;

/// Reads a GeoTIFF; `u16` samples are divided by `scale`.
pub fn read_geotiff(path: impl AsRef<Path>, scale: f64) -> Result<Raster> {
    let path = path.as_ref();
    let fail = |m: String| Error::format(path, m);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(fail(format!("reflectance scale must be positive, got {scale}")));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let tiff_err = |e: tiff::TiffError| Error::format(path, e.to_string());
    let mut dec = Decoder::new(BufReader::new(file))
        .map_err(tiff_err)?
        .with_limits(Limits::unlimited());

    let compression = dec.find_tag_unsigned::<u16>(Tag::Compression).map_err(tiff_err)?.unwrap_or(1);
    // 1 = none, 8 and 32946 = deflate.
    if ![1, 8, 32946].contains(&compression) {
        return Err(fail(format!("unsupported compression {compression}; only none and deflate are read")));
    }
    let (w, h) = dec.dimensions().map_err(tiff_err)?;
    let (w, h) = (w as usize, h as usize);
    let samples = match dec.colortype().map_err(tiff_err)? {
        ColorType::Gray(_) => 1,
        ColorType::GrayA(_) => 2,
        ColorType::RGB(_) => 3,
        ColorType::RGBA(_) => 4,
        ColorType::Multiband { num_samples, .. } => num_samples as usize,
        other => return Err(fail(format!("unsupported color type {other:?}"))),
    };
    let planar = dec.find_tag_unsigned::<u16>(Tag::PlanarConfiguration).map_err(tiff_err)?.unwrap_or(1);

    let nodata_raw = dec
        .find_tag(Tag::Unknown(GDAL_NODATA))
        .map_err(tiff_err)?
        .and_then(|v| v.into_string().ok())
        .and_then(|s| s.trim_end_matches('\0').trim().parse::<f64>().ok());
    let geotransform = read_geotransform(&mut dec, path)?;

    let mut buf = DecodingResult::U8(Vec::new());
    let layout = dec.read_image_to_buffer(&mut buf).map_err(tiff_err)?;
    if buf.as_buffer(0).as_bytes().len() < layout.complete_len {
        return Err(fail("image planes do not fit in one buffer".into()));
    }
    let (raw, nodata_flags): (Vec<f32>, Vec<bool>) = match &buf {
        DecodingResult::U16(v) => v
            .iter()
            .map(|&s| ((f64::from(s) / scale) as f32, nodata_raw == Some(f64::from(s))))
            .unzip(),
        DecodingResult::F32(v) => v
            .iter()
            .map(|&s| (s, nodata_raw.is_some_and(|nd| f64::from(s) == nd)))
            .unzip(),
        _ => return Err(fail("unsupported sample type; only u16 and f32 are read".into())),
    };
    let n = w * h;
    if raw.len() < n * samples {
        return Err(fail(format!("expected {} samples, decoded {}", n * samples, raw.len())));
    }
    // Chunky images interleave samples per pixel; planar ones are already
    // band-sequential.
    let (data, flags) = if planar == 2 || samples == 1 {
        (raw[..n * samples].to_vec(), nodata_flags[..n * samples].to_vec())
    } else {
        let mut data = vec![0.0f32; n * samples];
        let mut flags = vec![false; n * samples];
        for p in 0..n {
            for b in 0..samples {
                data[b * n + p] = raw[p * samples + b];
                flags[b * n + p] = nodata_flags[p * samples + b];
            }
        }
        (data, flags)
    };
    let mut mask = vec![false; n];
    for band in flags.chunks_exact(n) {
        for (m, &f) in mask.iter_mut().zip(band) {
            *m |= f;
        }
    }
    Ok(Raster::new(w, h, samples, data)?.mask_pixels(&mask)?.with_geotransform(geotransform))
}

fn read_geotransform<R: std::io::Read + std::io::Seek>(dec: &mut Decoder<R>, path: &Path) -> Result<GeoTransform> {
    let tiff_err = |e: tiff::TiffError| Error::format(path, e.to_string());
    let scale = match dec.find_tag(Tag::Unknown(MODEL_PIXEL_SCALE)).map_err(tiff_err)? {
        Some(v) => Some(v.into_f64_vec().map_err(tiff_err)?),
        None => None,
    };
    let tie = match dec.find_tag(Tag::Unknown(MODEL_TIEPOINT)).map_err(tiff_err)? {
        Some(v) => Some(v.into_f64_vec().map_err(tiff_err)?),
        None => None,
    };
    match (scale, tie) {
        (None, None) => Ok(GeoTransform::IDENTITY),
        (Some(s), Some(t)) if s.len() >= 2 && t.len() >= 6 => {
            // Tiepoint maps raster (i, j) to model (x, y).
            let (sx, sy) = (s[0], s[1]);
            Ok(GeoTransform::new(t[3] - t[0] * sx, t[4] + t[1] * sy, sx, -sy)?)
        }
        _ => Err(Error::format(path, "incomplete georeferencing: need both pixel scale and tiepoint")),
    }
}
