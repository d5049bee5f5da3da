//! File formats, PNG rendering and the `fieldseg` command line for
//! [`fieldseg_core`].
//!
//! Supported formats:
//!
//! * BSQ: raw little-endian `f32` samples, band-sequential, with a JSON
//!   sidecar at `<path>.json`. Read and written bit-exactly.
//! * GeoTIFF: read only; `u16` or `f32` samples, uncompressed or deflate.
//! * GeoJSON: field polygons, read and written.
//! * PNG: greyscale renderings with boundary or label overlays.

pub mod bsq;
pub mod cli;
pub mod error;
pub mod geotiff;
pub mod io;
pub mod render;
pub mod vector;

pub use error::{Error, Result};
pub use fieldseg_core as core;
