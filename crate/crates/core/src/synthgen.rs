//! Deterministic synthetic NDVI scenes with known field rectangles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{rectangle, FieldSet};
use crate::raster::{GeoTransform, Raster};

/// Pixel rectangle `[x, x + width) × [y, y + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    fn x1(&self) -> usize {
        self.x + self.width
    }

    fn y1(&self) -> usize {
        self.y + self.height
    }

    /// True when the two rectangles share an edge segment of positive length.
    fn adjacent(&self, other: &Rect) -> bool {
        let overlap = |a0: usize, a1: usize, b0: usize, b1: usize| a0.max(b0) < a1.min(b1);
        ((self.x1() == other.x || other.x1() == self.x) && overlap(self.y, self.y1(), other.y, other.y1()))
            || ((self.y1() == other.y || other.y1() == self.y) && overlap(self.x, self.x1(), other.x, other.x1()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    /// `cols × rows` near-equal cells; cell edges at `⌊i·W/cols⌋`.
    Grid { cols: usize, rows: usize },
    /// Explicit rectangles that must tile the image exactly.
    Rects(Vec<Rect>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub layout: Layout,
    /// Interval base NDVI values are drawn from.
    pub value_range: (f32, f32),
    /// Minimum base-value difference between edge-adjacent fields.
    pub min_gap: f32,
    /// Explicit base values, one per field; drawn at random when absent.
    pub values: Option<Vec<f32>>,
    pub noise_sigma: f32,
    /// Width of the box filter that softens field transitions (0 or 1 = sharp step).
    pub boundary_width: usize,
    pub seed: u64,
}

impl SceneSpec {
    pub fn grid(width: usize, height: usize, cols: usize, rows: usize) -> Self {
        Self {
            width,
            height,
            layout: Layout::Grid { cols, rows },
            value_range: (0.0, 0.9),
            min_gap: 0.3,
            values: None,
            noise_sigma: 0.0,
            boundary_width: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub ndvi: Raster,
    pub truth: FieldSet,
    pub values: Vec<f32>,
}

fn rects_for(spec: &SceneSpec) -> Result<Vec<Rect>> {
    let rects = match &spec.layout {
        Layout::Grid { cols, rows } => {
            if *cols == 0 || *rows == 0 || *cols > spec.width || *rows > spec.height {
                return Err(Error::InvalidScene(format!(
                    "a {cols}x{rows} grid does not fit a {}x{} image",
                    spec.width, spec.height
                )));
            }
            let xs: Vec<usize> = (0..=*cols).map(|i| i * spec.width / cols).collect();
            let ys: Vec<usize> = (0..=*rows).map(|j| j * spec.height / rows).collect();
            let mut out = Vec::with_capacity(cols * rows);
            for j in 0..*rows {
                for i in 0..*cols {
                    out.push(Rect {
                        x: xs[i],
                        y: ys[j],
                        width: xs[i + 1] - xs[i],
                        height: ys[j + 1] - ys[j],
                    });
                }
            }
            out
        }
        Layout::Rects(r) => r.clone(),
    };
    let mut cover = vec![0u8; spec.width * spec.height];
    for r in &rects {
        if r.width == 0 || r.height == 0 || r.x1() > spec.width || r.y1() > spec.height {
            return Err(Error::InvalidScene(format!("rectangle {r:?} is empty or out of bounds")));
        }
        for y in r.y..r.y1() {
            for x in r.x..r.x1() {
                cover[y * spec.width + x] += 1;
            }
        }
    }
    if cover.iter().any(|&c| c != 1) {
        return Err(Error::InvalidScene("rectangles must tile the image exactly".into()));
    }
    Ok(rects)
}

/// Probability that one Gaussian noise sample exceeds half of `gap` in
/// magnitude: `erfc(gap / (2·σ·√2))`.
pub fn exceedance_probability(noise_sigma: f64, gap: f64) -> f64 {
    if noise_sigma == 0.0 {
        return 0.0;
    }
    libm::erfc(gap / 2.0 / (noise_sigma * core::f64::consts::SQRT_2))
}

/// Renders the scene: per-field base value, optional transition blur, i.i.d.
/// Gaussian noise, clamped to `[-1, 1]`. Fully determined by `spec`.
pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::InvalidScene("image must be at least 1x1".into()));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::InvalidScene(format!("noise sigma must be ≥ 0, got {}", spec.noise_sigma)));
    }
    let required_gap = 4.0 * spec.noise_sigma;
    if spec.min_gap < required_gap {
        return Err(Error::InvalidScene(format!(
            "neighbour gap {} is below 4·noise_sigma = {required_gap}",
            spec.min_gap
        )));
    }
    let rects = rects_for(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let values = match &spec.values {
        Some(v) => {
            if v.len() != rects.len() {
                return Err(Error::InvalidScene(format!(
                    "{} values given for {} fields",
                    v.len(),
                    rects.len()
                )));
            }
            for (i, a) in rects.iter().enumerate() {
                for (j, b) in rects.iter().enumerate().skip(i + 1) {
                    if a.adjacent(b) && (v[i] - v[j]).abs() < spec.min_gap.max(required_gap) {
                        return Err(Error::InvalidScene(format!(
                            "adjacent fields {i} and {j} differ by less than {}",
                            spec.min_gap
                        )));
                    }
                }
            }
            v.clone()
        }
        None => draw_values(&rects, spec, &mut rng)?,
    };

    let (w, h) = (spec.width, spec.height);
    let mut base = vec![0.0f32; w * h];
    for (r, &v) in rects.iter().zip(&values) {
        for y in r.y..r.y1() {
            base[y * w + r.x..y * w + r.x1()].fill(v);
        }
    }
    if spec.boundary_width > 1 {
        base = box_blur(&base, w, h, spec.boundary_width);
    }
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0f32, spec.noise_sigma)
            .map_err(|e| Error::InvalidScene(format!("noise: {e}")))?;
        for v in &mut base {
            *v += normal.sample(&mut rng);
        }
    }
    for v in &mut base {
        *v = v.clamp(-1.0, 1.0);
    }

    let gt = GeoTransform::IDENTITY;
    let mut truth = FieldSet::new(w, h, gt);
    truth.polygons = rects
        .iter()
        .enumerate()
        .map(|(i, r)| rectangle(i, r.x, r.y, r.x1(), r.y1(), &gt))
        .collect();
    Ok(Scene {
        ndvi: Raster::single_band(w, h, base)?,
        truth,
        values,
    })
}

fn draw_values(rects: &[Rect], spec: &SceneSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f32>> {
    let (lo, hi) = spec.value_range;
    if !(lo <= hi) || lo < -1.0 || hi > 1.0 {
        return Err(Error::InvalidScene(format!("invalid value range ({lo}, {hi})")));
    }
    let mut values: Vec<f32> = Vec::with_capacity(rects.len());
    for (i, r) in rects.iter().enumerate() {
        let mut chosen = None;
        for _ in 0..1000 {
            let v = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
            let ok = rects[..i]
                .iter()
                .zip(&values)
                .all(|(other, &ov)| !r.adjacent(other) || (v - ov).abs() >= spec.min_gap);
            if ok {
                chosen = Some(v);
                break;
            }
        }
        match chosen {
            Some(v) => values.push(v),
            None => {
                return Err(Error::InvalidScene(format!(
                    "cannot keep a gap of {} between neighbours within ({lo}, {hi})",
                    spec.min_gap
                )))
            }
        }
    }
    Ok(values)
}

fn box_blur(src: &[f32], w: usize, h: usize, size: usize) -> Vec<f32> {
    let before = (size - 1) / 2;
    let after = size - 1 - before;
    let pass = |src: &[f32], horizontal: bool| -> Vec<f32> {
        let mut out = vec![0.0f32; w * h];
        for y in 0..h {
            for x in 0..w {
                let (pos, len) = if horizontal { (x, w) } else { (y, h) };
                let lo = pos.saturating_sub(before);
                let hi = (pos + after).min(len - 1);
                let sum: f32 = (lo..=hi)
                    .map(|p| if horizontal { src[y * w + p] } else { src[p * w + x] })
                    .sum();
                out[y * w + x] = sum / (hi - lo + 1) as f32;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_grid_is_piecewise_constant() {
        let scene = generate(&SceneSpec::grid(100, 100, 2, 2)).unwrap();
        assert_eq!(scene.truth.len(), 4);
        let ndvi = scene.ndvi.band(0).unwrap();
        for (k, p) in scene.truth.polygons.iter().enumerate() {
            assert_eq!(p.area_px, 2500);
            let (x0, y0, x1, y1) = p.bounds();
            for y in y0 as usize..y1 as usize {
                for x in x0 as usize..x1 as usize {
                    assert_eq!(ndvi[y * 100 + x], scene.values[k]);
                }
            }
        }
    }

    #[test]
    fn neighbours_respect_gap() {
        let mut spec = SceneSpec::grid(64, 64, 4, 4);
        spec.seed = 9;
        let scene = generate(&spec).unwrap();
        let v = &scene.values;
        for j in 0..4 {
            for i in 0..4 {
                if i + 1 < 4 {
                    assert!((v[j * 4 + i] - v[j * 4 + i + 1]).abs() >= 0.3);
                }
                if j + 1 < 4 {
                    assert!((v[j * 4 + i] - v[(j + 1) * 4 + i]).abs() >= 0.3);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_scene() {
        let mut spec = SceneSpec::grid(40, 30, 3, 2);
        spec.noise_sigma = 0.02;
        spec.seed = 7;
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 8;
        assert_ne!(generate(&spec).unwrap().ndvi, generate(&other).unwrap().ndvi);
    }

    #[test]
    fn gap_precondition() {
        let mut spec = SceneSpec::grid(20, 20, 2, 2);
        spec.noise_sigma = 0.1;
        spec.min_gap = 0.3;
        assert!(matches!(generate(&spec), Err(Error::InvalidScene(_))));
        spec.noise_sigma = 0.0;
        spec.values = Some(vec![0.1, 0.2, 0.8, 0.1]);
        assert!(generate(&spec).is_err());
        spec.values = Some(vec![0.1, 0.5, 0.8, 0.1]);
        assert!(generate(&spec).is_ok());
    }

    #[test]
    fn rects_must_tile() {
        let mut spec = SceneSpec::grid(4, 4, 1, 1);
        spec.layout = Layout::Rects(vec![Rect { x: 0, y: 0, width: 4, height: 3 }]);
        assert!(generate(&spec).is_err());
        spec.layout = Layout::Rects(vec![
            Rect { x: 0, y: 0, width: 4, height: 3 },
            Rect { x: 0, y: 3, width: 4, height: 1 },
        ]);
        assert_eq!(generate(&spec).unwrap().truth.len(), 2);
    }

    #[test]
    fn uneven_grid_covers_image() {
        let scene = generate(&SceneSpec::grid(10, 7, 3, 2)).unwrap();
        let total: usize = scene.truth.polygons.iter().map(|p| p.area_px).sum();
        assert_eq!(total, 70);
    }

    #[test]
    fn boundary_width_softens_steps() {
        let mut spec = SceneSpec::grid(20, 4, 2, 1);
        spec.values = Some(vec![0.0, 0.8]);
        spec.boundary_width = 3;
        let scene = generate(&spec).unwrap();
        let row = &scene.ndvi.band(0).unwrap()[..20];
        assert_eq!(row[5], 0.0);
        assert!(row[9] > 0.0 && row[9] < 0.8);
        assert!(row[10] > 0.0 && row[10] < 0.8);
        assert_eq!(row[15], 0.8);
    }

    #[test]
    fn tail_bound_is_tiny() {
        let p = exceedance_probability(0.02, 0.3);
        assert!(p < 1e-9, "{p}");
        assert_eq!(exceedance_probability(0.0, 0.3), 0.0);
    }
}
