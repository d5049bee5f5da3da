//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression along quantized directions and dual-threshold hysteresis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{EdgeMask, Mask};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    /// Gaussian standard deviation in pixels.
    pub sigma: f64,
    /// Hysteresis thresholds in raw (unnormalized) Sobel magnitude units.
    pub low_threshold: f64,
    pub high_threshold: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            low_threshold: 1.5,
            high_threshold: 3.0,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.low_threshold >= 0.0 && self.low_threshold <= self.high_threshold) {
            return Err(Error::InvalidParameter(format!(
                "thresholds must satisfy 0 ≤ low ≤ high, got low {} high {}",
                self.low_threshold, self.high_threshold
            )));
        }
        Ok(())
    }
}

/// Normalized 1-D Gaussian weights with radius `⌈3σ⌉`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut weights: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / denom))
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Separable Gaussian blur that ignores nodata.
///
/// Numerator and weight sums are carried through both passes, so each output
/// is the kernel-weighted mean over the valid pixels of its window: nodata
/// pixels contribute nothing and borders are renormalized instead of padded.
/// Nodata pixels stay nodata.
pub fn gaussian_smooth(image: &Raster, sigma: f64) -> Result<Raster> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    if image.bands() != 1 {
        return Err(Error::NotSingleBand(image.bands()));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = image.dims();
    let values = image.band(0)?;
    let nodata = image.nodata_mask();

    let mut num = vec![0.0f64; w * h];
    let mut den = vec![0.0f64; w * h];
    for row in 0..h {
        for col in 0..w {
            let (mut n, mut d) = (0.0, 0.0);
            for (k, &wt) in kernel.iter().enumerate() {
                let c = col as isize + k as isize - radius;
                if c < 0 || c >= w as isize {
                    continue;
                }
                let idx = row * w + c as usize;
                if !nodata[idx] {
                    n += wt * f64::from(values[idx]);
                    d += wt;
                }
            }
            num[row * w + col] = n;
            den[row * w + col] = d;
        }
    }

    let mut out = vec![f32::NAN; w * h];
    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            if nodata[idx] {
                continue;
            }
            let (mut n, mut d) = (0.0, 0.0);
            for (k, &wt) in kernel.iter().enumerate() {
                let r = row as isize + k as isize - radius;
                if r < 0 || r >= h as isize {
                    continue;
                }
                let j = r as usize * w + col;
                n += wt * num[j];
                d += wt * den[j];
            }
            out[idx] = (n / d) as f32;
        }
    }
    Ok(Raster::derived(w, h, out, nodata.to_vec(), *image.geotransform()))
}

/// Gradient direction folded to `[0°, 180°)` and quantized to four bins.
///
/// Angles are measured with rows increasing downwards, so 45° points to the
/// lower-right neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub fn from_components(gx: f64, gy: f64) -> Self {
        let mut angle = libm::atan2(gy, gx).to_degrees();
        if angle < 0.0 {
            angle += 180.0;
        }
        if !(22.5..157.5).contains(&angle) {
            Self::Deg0
        } else if angle < 67.5 {
            Self::Deg45
        } else if angle < 112.5 {
            Self::Deg90
        } else {
            Self::Deg135
        }
    }

    /// Unit step `(dcol, drow)` along the gradient.
    pub fn step(self) -> (isize, isize) {
        match self {
            Self::Deg0 => (1, 0),
            Self::Deg45 => (1, 1),
            Self::Deg90 => (0, 1),
            Self::Deg135 => (-1, 1),
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Self::Deg0 => 0,
            Self::Deg45 => 45,
            Self::Deg90 => 90,
            Self::Deg135 => 135,
        }
    }
}

/// Sobel gradient field. `valid` is false wherever the 3×3 window touches
/// nodata; magnitude there is NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub direction: Vec<Direction>,
    pub valid: Vec<bool>,
}

impl Gradient {
    pub fn magnitude_raster(&self) -> Raster {
        let data = self.magnitude.iter().map(|&m| m as f32).collect();
        let nodata = self.valid.iter().map(|&v| !v).collect();
        Raster::derived(self.width, self.height, data, nodata, crate::raster::GeoTransform::IDENTITY)
    }

    /// Magnitude at the `p`-th percentile (nearest rank, `p` in `[0, 100]`)
    /// over valid pixels.
    pub fn magnitude_percentile(&self, p: f64) -> Option<f64> {
        let mut values: Vec<f64> = self
            .magnitude
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .map(|(&m, _)| m)
            .collect();
        if values.is_empty() || !(0.0..=100.0).contains(&p) {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let rank = libm::ceil(p / 100.0 * values.len() as f64) as usize;
        Some(values[rank.clamp(1, values.len()) - 1])
    }

    #[inline]
    fn magnitude_or_zero(&self, col: isize, row: isize) -> f64 {
        if col < 0 || row < 0 || col >= self.width as isize || row >= self.height as isize {
            return 0.0;
        }
        let idx = row as usize * self.width + col as usize;
        if self.valid[idx] {
            self.magnitude[idx]
        } else {
            0.0
        }
    }
}

/// Unnormalized 3×3 Sobel gradient with replicated image borders.
pub fn gradient(image: &Raster) -> Result<Gradient> {
    if image.bands() != 1 {
        return Err(Error::NotSingleBand(image.bands()));
    }
    let (w, h) = image.dims();
    let values = image.band(0)?;
    let nodata = image.nodata_mask();
    let n = w * h;
    let mut g = Gradient {
        width: w,
        height: h,
        gx: vec![0.0; n],
        gy: vec![0.0; n],
        magnitude: vec![f64::NAN; n],
        direction: vec![Direction::Deg0; n],
        valid: vec![false; n],
    };
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    for row in 0..h {
        for col in 0..w {
            let mut z = [0.0f64; 9];
            let mut ok = true;
            for (k, z) in z.iter_mut().enumerate() {
                let r = clamp(row as isize + k as isize / 3 - 1, h);
                let c = clamp(col as isize + k as isize % 3 - 1, w);
                let idx = r * w + c;
                if nodata[idx] {
                    ok = false;
                    break;
                }
                *z = f64::from(values[idx]);
            }
            if !ok {
                continue;
            }
            let gx = (z[2] + 2.0 * z[5] + z[8]) - (z[0] + 2.0 * z[3] + z[6]);
            let gy = (z[6] + 2.0 * z[7] + z[8]) - (z[0] + 2.0 * z[1] + z[2]);
            let idx = row * w + col;
            g.gx[idx] = gx;
            g.gy[idx] = gy;
            g.magnitude[idx] = libm::sqrt(gx * gx + gy * gy);
            g.direction[idx] = Direction::from_components(gx, gy);
            g.valid[idx] = true;
        }
    }
    Ok(g)
}

/// Ridge pixels of the gradient magnitude.
///
/// A pixel survives when its magnitude is `≥` the neighbour behind it and
/// `>` the neighbour ahead of it along the quantized direction. The
/// asymmetric comparison keeps exactly one pixel of a two-pixel plateau.
/// Out-of-image and invalid neighbours count as zero.
pub fn non_max_suppression(g: &Gradient) -> Vec<bool> {
    let mut out = vec![false; g.width * g.height];
    for row in 0..g.height {
        for col in 0..g.width {
            let idx = row * g.width + col;
            if !g.valid[idx] {
                continue;
            }
            let m = g.magnitude[idx];
            let (dc, dr) = g.direction[idx].step();
            let (c, r) = (col as isize, row as isize);
            let behind = g.magnitude_or_zero(c - dc, r - dr);
            let ahead = g.magnitude_or_zero(c + dc, r + dr);
            out[idx] = m >= behind && m > ahead;
        }
    }
    out
}

/// Keeps ridge pixels `≥ high`, plus ridge pixels `≥ low` that are
/// 8-connected to them through other such pixels.
pub fn hysteresis(g: &Gradient, ridges: &[bool], low: f64, high: f64) -> EdgeMask {
    let (w, h) = (g.width, g.height);
    let weak: Vec<bool> = ridges
        .iter()
        .zip(&g.magnitude)
        .map(|(&r, &m)| r && m >= low)
        .collect();
    let mut edges = Mask::empty(w, h);
    let mut stack = Vec::new();
    for idx in 0..w * h {
        if weak[idx] && g.magnitude[idx] >= high && !edges.bits()[idx] {
            edges.set(idx % w, idx / w, true);
            stack.push(idx);
            while let Some(p) = stack.pop() {
                let (pc, pr) = ((p % w) as isize, (p / w) as isize);
                for dr in -1..=1isize {
                    for dc in -1..=1isize {
                        let (c, r) = (pc + dc, pr + dr);
                        if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
                            continue;
                        }
                        let (c, r) = (c as usize, r as usize);
                        let q = r * w + c;
                        if weak[q] && !edges.get(c, r) {
                            edges.set(c, r, true);
                            stack.push(q);
                        }
                    }
                }
            }
        }
    }
    edges
}

/// Full detector: smooth, differentiate, thin, threshold.
pub fn canny_edges(image: &Raster, params: &CannyParams) -> Result<EdgeMask> {
    params.validate()?;
    let smoothed = gaussian_smooth(image, params.sigma)?;
    let g = gradient(&smoothed)?;
    let ridges = non_max_suppression(&g);
    Ok(hysteresis(&g, &ridges, params.low_threshold, params.high_threshold))
}
