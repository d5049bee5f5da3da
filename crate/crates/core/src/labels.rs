//! Per-pixel region labels with per-region statistics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dims, Error, Result};
use crate::raster::Raster;

/// Label of nodata or unassigned pixels.
pub const UNLABELED: i32 = -1;

/// A partition of the valid pixels into `cluster_count` labelled regions.
///
/// Pixels labelled [`UNLABELED`] belong to no region. `cluster_means` is
/// stored flat, `bands` values per cluster, and is empty when the labels
/// were not derived from an image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    labels: Vec<i32>,
    cluster_count: usize,
    bands: usize,
    cluster_means: Vec<f64>,
    cluster_sizes: Vec<usize>,
}

impl LabelImage {
    /// Builds a label image from raw labels; `cluster_count` is one past the
    /// largest label and sizes are counted from the data.
    pub fn from_labels(width: usize, height: usize, labels: Vec<i32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "label image of {width}x{height} needs {} pixels, got {}",
                width * height,
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l < UNLABELED) {
            return Err(Error::InvalidRaster(format!("invalid label {bad}")));
        }
        let cluster_count = labels.iter().map(|&l| (l + 1) as usize).max().unwrap_or(0);
        let mut cluster_sizes = vec![0usize; cluster_count];
        for &l in &labels {
            if l >= 0 {
                cluster_sizes[l as usize] += 1;
            }
        }
        Ok(Self {
            width,
            height,
            labels,
            cluster_count,
            bands: 0,
            cluster_means: Vec::new(),
            cluster_sizes,
        })
    }

    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        labels: Vec<i32>,
        bands: usize,
        cluster_means: Vec<f64>,
        cluster_sizes: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(cluster_means.len(), bands * cluster_sizes.len());
        Self {
            width,
            height,
            labels,
            cluster_count: cluster_sizes.len(),
            bands,
            cluster_means,
            cluster_sizes,
        }
    }

    /// Recomputes per-cluster means from `image` in row-major pixel order.
    pub fn with_means_from(mut self, image: &Raster) -> Result<Self> {
        check_dims(self.dims(), image.dims())?;
        let bands = image.bands();
        let n = self.labels.len();
        let mut sums = vec![0.0f64; self.cluster_count * bands];
        for (idx, &l) in self.labels.iter().enumerate() {
            if l < 0 {
                continue;
            }
            let base = l as usize * bands;
            for b in 0..bands {
                sums[base + b] += f64::from(image.data()[b * n + idx]);
            }
        }
        for (k, &size) in self.cluster_sizes.iter().enumerate() {
            if size > 0 {
                for b in 0..bands {
                    sums[k * bands + b] /= size as f64;
                }
            }
        }
        self.bands = bands;
        self.cluster_means = sums;
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, col: usize, row: usize) -> i32 {
        self.labels[row * self.width + col]
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    /// Number of spectral values per cluster mean (0 when means are absent).
    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn cluster_mean(&self, cluster: usize) -> &[f64] {
        &self.cluster_means[cluster * self.bands..(cluster + 1) * self.bands]
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l >= 0).count()
    }

    /// Pixel membership of one cluster.
    pub fn cluster_mask(&self, cluster: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == cluster as i32).collect()
    }
}
