//! Simple Non-Iterative Clustering (SNIC) superpixels.
//!
//! Seeds are laid on a regular grid. A single min-priority queue holds
//! `(pixel, cluster)` candidates keyed by a joint spatial/spectral distance
//! to the cluster's current centroid and mean. Each pixel is labelled the
//! first time it is popped; the owning cluster's running sums are updated
//! and its unlabelled neighbours are pushed. There are no iterations.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{LabelImage, UNLABELED};
use crate::raster::Raster;

/// Pixel neighbourhood used for region growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

impl Connectivity {
    pub fn from_count(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Self::Four),
            8 => Ok(Self::Eight),
            _ => Err(Error::InvalidParameter(format!(
                "connectivity must be 4 or 8, got {n}"
            ))),
        }
    }

    pub fn count(self) -> usize {
        match self {
            Self::Four => 4,
            Self::Eight => 8,
        }
    }

    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Self::Four => &FOUR,
            Self::Eight => &EIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnicParams {
    /// Seed spacing in pixels.
    pub size: usize,
    /// Spatial regularity; larger values give more compact superpixels.
    pub compactness: f64,
    pub connectivity: Connectivity,
}

impl Default for SnicParams {
    fn default() -> Self {
        Self {
            size: 15,
            compactness: 0.5,
            connectivity: Connectivity::Four,
        }
    }
}

impl SnicParams {
    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::InvalidParameter("size must be ≥ 2".into()));
        }
        if !(self.compactness >= 0.0 && self.compactness.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "compactness must be a finite value ≥ 0, got {}",
                self.compactness
            )));
        }
        Ok(())
    }
}

/// Queue ordering key for a pixel offered to a cluster.
///
/// Squared distance scaled by `compactness²`:
/// `‖Δcolor‖² + (compactness / size)² · ‖Δpos‖²`. This orders candidates
/// exactly like `‖Δpos‖²/size² + ‖Δcolor‖²/compactness²` for compactness > 0
/// and degrades to pure spectral distance at compactness 0.
#[inline]
fn distance_key(spatial_sq: f64, spectral_sq: f64, spatial_weight: f64) -> f64 {
    spectral_sq + spatial_weight * spatial_sq
}

/// Regular seed grid at `(⌊s/2⌋ + i·s, ⌊s/2⌋ + j·s)`, row-major.
///
/// Seeds landing on nodata move to the nearest valid pixel within Euclidean
/// radius `⌊s/2⌋` (ties broken row-major) or are dropped. A relocation onto
/// an already seeded pixel is dropped as well.
pub fn seed_grid(width: usize, height: usize, size: usize, nodata: &[bool]) -> Vec<(usize, usize)> {
    debug_assert_eq!(nodata.len(), width * height);
    if size == 0 {
        return Vec::new();
    }
    let half = size / 2;
    let radius_sq = (half * half) as isize;
    let mut taken = vec![false; width * height];
    let mut seeds = Vec::new();
    for row in (half..height).step_by(size) {
        for col in (half..width).step_by(size) {
            let pos = if !nodata[row * width + col] {
                Some((col, row))
            } else {
                relocate(width, height, col, row, half as isize, radius_sq, nodata)
            };
            if let Some((c, r)) = pos {
                let idx = r * width + c;
                if !taken[idx] {
                    taken[idx] = true;
                    seeds.push((c, r));
                }
            }
        }
    }
    seeds
}

fn relocate(
    width: usize,
    height: usize,
    col: usize,
    row: usize,
    half: isize,
    radius_sq: isize,
    nodata: &[bool],
) -> Option<(usize, usize)> {
    let mut best: Option<(isize, usize, usize)> = None;
    for dr in -half..=half {
        for dc in -half..=half {
            let d = dr * dr + dc * dc;
            if d > radius_sq {
                continue;
            }
            let (r, c) = (row as isize + dr, col as isize + dc);
            if r < 0 || c < 0 || r >= height as isize || c >= width as isize {
                continue;
            }
            let (r, c) = (r as usize, c as usize);
            if nodata[r * width + c] {
                continue;
            }
            // Scan order is row-major, so strict < keeps the row-major tie-break.
            if best.is_none_or(|(bd, _, _)| d < bd) {
                best = Some((d, c, r));
            }
        }
    }
    best.map(|(_, c, r)| (c, r))
}

/// Work counters from one segmentation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SnicStats {
    pub seeds: usize,
    /// Clusters started on valid pixels that no seed could reach.
    pub orphan_clusters: usize,
    pub pushes: usize,
    pub pops: usize,
    pub labeled_pops: usize,
    pub max_pushes_per_pixel: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    key: f64,
    seq: u64,
    pixel: usize,
    cluster: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so that BinaryHeap pops the smallest (key, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Cluster {
    sum_x: f64,
    sum_y: f64,
    sum_color: Vec<f64>,
    count: usize,
}

struct Grower<'a> {
    image: &'a Raster,
    width: usize,
    height: usize,
    bands: usize,
    spatial_weight: f64,
    offsets: &'static [(isize, isize)],
    labels: Vec<i32>,
    pushes_per_pixel: Vec<u32>,
    clusters: Vec<Cluster>,
    heap: BinaryHeap<Candidate>,
    seq: u64,
    stats: SnicStats,
}

impl Grower<'_> {
    fn push(&mut self, pixel: usize, cluster: usize, key: f64) {
        self.heap.push(Candidate {
            key,
            seq: self.seq,
            pixel,
            cluster,
        });
        self.seq += 1;
        self.stats.pushes += 1;
        self.pushes_per_pixel[pixel] += 1;
    }

    fn start_cluster(&mut self, pixel: usize) {
        let cluster = self.clusters.len();
        self.clusters.push(Cluster {
            sum_x: 0.0,
            sum_y: 0.0,
            sum_color: vec![0.0; self.bands],
            count: 0,
        });
        self.push(pixel, cluster, 0.0);
    }

    fn key_for(&self, pixel: usize, cluster: usize) -> f64 {
        let c = &self.clusters[cluster];
        let n = c.count as f64;
        let x = (pixel % self.width) as f64;
        let y = (pixel / self.width) as f64;
        let dx = x - c.sum_x / n;
        let dy = y - c.sum_y / n;
        let npx = self.width * self.height;
        let data = self.image.data();
        let spectral_sq: f64 = c
            .sum_color
            .iter()
            .enumerate()
            .map(|(b, &s)| {
                let d = f64::from(data[b * npx + pixel]) - s / n;
                d * d
            })
            .sum();
        distance_key(dx * dx + dy * dy, spectral_sq, self.spatial_weight)
    }

    fn drain(&mut self) {
        let npx = self.width * self.height;
        while let Some(cand) = self.heap.pop() {
            self.stats.pops += 1;
            if self.labels[cand.pixel] != UNLABELED {
                continue;
            }
            self.stats.labeled_pops += 1;
            let pixel = cand.pixel;
            self.labels[pixel] = cand.cluster as i32;
            let (x, y) = (pixel % self.width, pixel / self.width);
            {
                let data = self.image.data();
                let c = &mut self.clusters[cand.cluster];
                c.sum_x += x as f64;
                c.sum_y += y as f64;
                for (b, s) in c.sum_color.iter_mut().enumerate() {
                    *s += f64::from(data[b * npx + pixel]);
                }
                c.count += 1;
            }
            for &(dx, dy) in self.offsets {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= self.width as isize || ny >= self.height as isize {
                    continue;
                }
                let nb = ny as usize * self.width + nx as usize;
                if self.labels[nb] != UNLABELED || self.image.is_nodata(nb) {
                    continue;
                }
                let key = self.key_for(nb, cand.cluster);
                self.push(nb, cand.cluster, key);
            }
        }
    }
}

/// Segments `image` into superpixels.
///
/// Nodata pixels are walls: never labelled, never crossed. Valid pixels that
/// no grid seed can reach (isolated by nodata, or an image smaller than half
/// the seed spacing) start their own cluster in row-major order once the
/// queue runs dry, so every valid pixel ends up labelled.
pub fn snic_segment(image: &Raster, params: &SnicParams) -> Result<LabelImage> {
    snic_segment_with_stats(image, params).map(|(labels, _)| labels)
}

pub fn snic_segment_with_stats(image: &Raster, params: &SnicParams) -> Result<(LabelImage, SnicStats)> {
    params.validate()?;
    let (width, height) = image.dims();
    let npx = width * height;
    let seeds = seed_grid(width, height, params.size, image.nodata_mask());
    let ratio = params.compactness / params.size as f64;
    let mut grower = Grower {
        image,
        width,
        height,
        bands: image.bands(),
        spatial_weight: ratio * ratio,
        offsets: params.connectivity.offsets(),
        labels: vec![UNLABELED; npx],
        pushes_per_pixel: vec![0; npx],
        clusters: Vec::with_capacity(seeds.len()),
        heap: BinaryHeap::with_capacity(npx),
        seq: 0,
        stats: SnicStats {
            seeds: seeds.len(),
            ..SnicStats::default()
        },
    };
    for &(col, row) in &seeds {
        grower.start_cluster(row * width + col);
    }
    grower.drain();

    let mut cursor = 0;
    loop {
        while cursor < npx && (grower.labels[cursor] != UNLABELED || image.is_nodata(cursor)) {
            cursor += 1;
        }
        if cursor == npx {
            break;
        }
        grower.stats.orphan_clusters += 1;
        grower.start_cluster(cursor);
        grower.drain();
    }

    let bands = grower.bands;
    let mut means = Vec::with_capacity(grower.clusters.len() * bands);
    let mut sizes = Vec::with_capacity(grower.clusters.len());
    for c in &grower.clusters {
        let n = c.count as f64;
        means.extend(c.sum_color.iter().map(|s| s / n));
        sizes.push(c.count);
    }
    let mut stats = grower.stats;
    stats.max_pushes_per_pixel = grower.pushes_per_pixel.iter().copied().max().unwrap_or(0) as usize;
    let labels = LabelImage::from_parts(width, height, grower.labels, bands, means, sizes);
    Ok((labels, stats))
}
