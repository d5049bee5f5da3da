use alloc::string::String;

/// Errors raised by the processing stages.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, found {found_width}x{found_height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        found_width: usize,
        found_height: usize,
    },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("band {band} out of range for a raster with {bands} band(s)")]
    BandOutOfRange { band: usize, bands: usize },
    #[error("expected a single-band raster, found {0} bands")]
    NotSingleBand(usize),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("ring of field {field_id} is not closed or has fewer than 4 points")]
    UnclosedRing { field_id: usize },
    #[error("polygons {first} and {second} overlap at pixel ({col}, {row})")]
    OverlappingPolygons {
        first: usize,
        second: usize,
        col: usize,
        row: usize,
    },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dims(
    expected: (usize, usize),
    found: (usize, usize),
) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            found_width: found.0,
            found_height: found.1,
        })
    }
}
