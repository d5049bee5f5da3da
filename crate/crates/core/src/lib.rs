//! Agricultural field boundary delineation on NDVI rasters.
//!
//! The pipeline groups pixels into SNIC superpixels, detects Canny edges on
//! the same NDVI layer, fuses both boundary sources, bridges small gaps with a
//! morphological closing and finally turns the enclosed regions into
//! polygons:
//!
//! ```text
//! qa mask -> ndvi -> snic -> cluster boundaries --+
//!                 \-> canny edges ----------------+-> fuse -> close -> fields
//! ```
//!
//! Everything in this crate is pure computation over in-memory buffers and
//! builds without `std`. File formats, rendering and the command line live in
//! the `fieldseg` crate.

#![no_std]
// `!(x >= 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod boundary;
pub mod canny;
pub mod error;
pub mod eval;
pub mod fields;
pub mod labels;
pub mod mask;
pub mod params;
pub mod pipeline;
pub mod preprocess;
pub mod raster;
pub mod snic;
pub mod synthgen;

pub use error::{Error, Result};
pub use fields::{FieldPolygon, FieldSet};
pub use labels::{LabelImage, UNLABELED};
pub use mask::{BoundaryMask, EdgeMask, Mask};
pub use params::PipelineParams;
pub use raster::{GeoTransform, Raster};
