//! Brute-force reference implementations used by the property and
//! acceptance tests. Nothing here calls into the code paths it checks,
//! except for the inputs each oracle consumes.
#![allow(dead_code)]

use std::collections::VecDeque;

use fieldseg_core::canny::Gradient;
use fieldseg_core::{LabelImage, Mask, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Smooth random field: a few random sinusoids plus optional noise.
pub fn smooth_image(rng: &mut ChaCha8Rng, w: usize, h: usize, noise: f32) -> Raster {
    let waves: Vec<(f32, f32, f32, f32)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.05..0.4),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(0.0..std::f32::consts::TAU),
            )
        })
        .collect();
    let data = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f32, (i / w) as f32);
            let v: f32 = waves.iter().map(|(a, fx, fy, ph)| a * (fx * x + fy * y + ph).sin()).sum();
            v + noise * rng.gen_range(-1.0f32..1.0)
        })
        .collect();
    Raster::single_band(w, h, data).unwrap()
}

/// Random image with random rectangular and speckle nodata holes.
pub fn holey_image(rng: &mut ChaCha8Rng, w: usize, h: usize, bands: usize) -> Raster {
    let mut data: Vec<f32> = (0..w * h * bands).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let mut holes = vec![false; w * h];
    for _ in 0..rng.gen_range(0..4) {
        let (x0, y0) = (rng.gen_range(0..w), rng.gen_range(0..h));
        let (rw, rh) = (rng.gen_range(1..=w / 3 + 1), rng.gen_range(1..=h / 3 + 1));
        for y in y0..(y0 + rh).min(h) {
            for x in x0..(x0 + rw).min(w) {
                holes[y * w + x] = true;
            }
        }
    }
    let speckle = rng.gen_range(0.0..0.05);
    for hole in holes.iter_mut() {
        if rng.gen_bool(speckle) {
            *hole = true;
        }
    }
    for b in 0..bands {
        for (i, &hole) in holes.iter().enumerate() {
            if hole {
                data[b * w * h + i] = f32::NAN;
            }
        }
    }
    Raster::new(w, h, bands, data).unwrap()
}

/// Checks every LabelImage invariant of a segmentation of `image`.
pub fn check_partition(image: &Raster, labels: &LabelImage, eight: bool) -> Result<(), String> {
    let (w, h) = image.dims();
    let l = labels.labels();
    let k = labels.cluster_count();
    for (i, &lab) in l.iter().enumerate() {
        if image.is_nodata(i) {
            if lab != -1 {
                return Err(format!("nodata pixel {i} labelled {lab}"));
            }
        } else if lab < 0 || lab as usize >= k {
            return Err(format!("valid pixel {i} has label {lab} outside 0..{k}"));
        }
    }
    let mut sizes = vec![0usize; k];
    let mut sums = vec![0.0f64; k * image.bands()];
    for (i, &lab) in l.iter().enumerate() {
        if lab >= 0 {
            sizes[lab as usize] += 1;
            for b in 0..image.bands() {
                sums[lab as usize * image.bands() + b] += image.band(b).unwrap()[i] as f64;
            }
        }
    }
    if sizes != labels.cluster_sizes() {
        return Err("cluster sizes disagree with pixel counts".into());
    }
    if sizes.iter().sum::<usize>() != image.valid_count() {
        return Err("sizes do not sum to valid pixel count".into());
    }
    for c in 0..k {
        if sizes[c] == 0 {
            return Err(format!("cluster {c} is empty"));
        }
        for b in 0..image.bands() {
            let expect = sums[c * image.bands() + b] / sizes[c] as f64;
            let got = labels.cluster_mean(c)[b];
            let tol = 1e-5 * expect.abs().max(1.0);
            if (got - expect).abs() > tol {
                return Err(format!("cluster {c} band {b} mean {got} expected {expect}"));
            }
        }
    }
    // Connectivity: BFS from the first pixel of each cluster must reach all of it.
    let offsets: &[(isize, isize)] = if eight {
        &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    let mut seen = vec![false; w * h];
    let mut reached = vec![0usize; k];
    for start in 0..w * h {
        let lab = l[start];
        if lab < 0 || seen[start] {
            continue;
        }
        if reached[lab as usize] != 0 {
            return Err(format!("cluster {lab} is not connected"));
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(p) = queue.pop_front() {
            reached[lab as usize] += 1;
            let (x, y) = ((p % w) as isize, (p / w) as isize);
            for (dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if !seen[q] && l[q] == lab {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(())
}

/// Naive SNIC: the candidate set is a plain vector scanned linearly for the
/// smallest `(key, sequence)` pair.
pub fn naive_snic(image: &Raster, size: usize, compactness: f64, eight: bool) -> Vec<i32> {
    let (w, h) = image.dims();
    let bands = image.bands();
    let valid = |i: usize| !image.is_nodata(i);
    let half = size / 2;
    let mut seeds = Vec::new();
    let mut taken = vec![false; w * h];
    let mut y = half;
    while y < h {
        let mut x = half;
        while x < w {
            let mut pos = None;
            if valid(y * w + x) {
                pos = Some((x, y));
            } else {
                let mut best: Option<(isize, usize, usize)> = None;
                for yy in 0..h {
                    for xx in 0..w {
                        let (dx, dy) = (xx as isize - x as isize, yy as isize - y as isize);
                        let d = dx * dx + dy * dy;
                        if dx.abs() <= half as isize
                            && dy.abs() <= half as isize
                            && d <= (half * half) as isize
                            && valid(yy * w + xx)
                            && best.is_none_or(|b| d < b.0)
                        {
                            best = Some((d, xx, yy));
                        }
                    }
                }
                pos = pos.or(best.map(|b| (b.1, b.2)));
            }
            if let Some((sx, sy)) = pos {
                if !taken[sy * w + sx] {
                    taken[sy * w + sx] = true;
                    seeds.push(sy * w + sx);
                }
            }
            x += size;
        }
        y += size;
    }

    let offsets: &[(isize, isize)] = if eight {
        &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    let weight = (compactness / size as f64) * (compactness / size as f64);
    let value = |b: usize, i: usize| image.band(b).unwrap()[i] as f64;
    let mut labels = vec![-1i32; w * h];
    // (sum_x, sum_y, sums per band, count)
    let mut clusters: Vec<(f64, f64, Vec<f64>, usize)> = Vec::new();
    let mut cands: Vec<(f64, u64, usize, usize)> = Vec::new();
    let mut seq = 0u64;
    for &s in &seeds {
        clusters.push((0.0, 0.0, vec![0.0; bands], 0));
        cands.push((0.0, seq, s, clusters.len() - 1));
        seq += 1;
    }
    let mut cursor = 0;
    loop {
        while !cands.is_empty() {
            let (best, _) = cands
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.cmp(&b.1 .1)))
                .unwrap();
            let (_, _, p, k) = cands.swap_remove(best);
            if labels[p] != -1 {
                continue;
            }
            labels[p] = k as i32;
            let (x, y) = (p % w, p / w);
            let c = &mut clusters[k];
            c.0 += x as f64;
            c.1 += y as f64;
            for b in 0..bands {
                c.2[b] += value(b, p);
            }
            c.3 += 1;
            for (dx, dy) in offsets {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if labels[q] != -1 || !valid(q) {
                    continue;
                }
                let c = &clusters[k];
                let n = c.3 as f64;
                let ddx = nx as f64 - c.0 / n;
                let ddy = ny as f64 - c.1 / n;
                let spectral: f64 = (0..bands)
                    .map(|b| {
                        let d = value(b, q) - c.2[b] / n;
                        d * d
                    })
                    .sum();
                cands.push((spectral + weight * (ddx * ddx + ddy * ddy), seq, q, k));
                seq += 1;
            }
        }
        while cursor < w * h && (labels[cursor] != -1 || !valid(cursor)) {
            cursor += 1;
        }
        if cursor == w * h {
            break;
        }
        clusters.push((0.0, 0.0, vec![0.0; bands], 0));
        cands.push((0.0, seq, cursor, clusters.len() - 1));
        seq += 1;
    }
    labels
}

/// Direction step from raw gradient components, using tangent comparisons
/// instead of an angle.
fn nms_step(gx: f64, gy: f64) -> (isize, isize) {
    let t = (22.5f64).to_radians().tan();
    let (ax, ay) = (gx.abs(), gy.abs());
    if ay < t * ax || (ax == 0.0 && ay == 0.0) {
        (1, 0)
    } else if ax <= t * ay {
        (0, 1)
    } else if (gx > 0.0) == (gy > 0.0) {
        (1, 1)
    } else {
        (-1, 1)
    }
}

/// Reference NMS + hysteresis: direct definition, hysteresis by repeated
/// full sweeps until nothing changes.
pub fn brute_canny(g: &Gradient, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = (g.width, g.height);
    let mag = |c: isize, r: isize| -> f64 {
        if c < 0 || r < 0 || c >= w as isize || r >= h as isize {
            return 0.0;
        }
        let i = r as usize * w + c as usize;
        if g.valid[i] {
            g.magnitude[i]
        } else {
            0.0
        }
    };
    let mut thin = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if !g.valid[i] {
                continue;
            }
            let (dc, dr) = nms_step(g.gx[i], g.gy[i]);
            let m = g.magnitude[i];
            let behind = mag(c as isize - dc, r as isize - dr);
            let ahead = mag(c as isize + dc, r as isize + dr);
            thin[i] = m >= behind && m > ahead;
        }
    }
    let mut edge: Vec<bool> = (0..w * h).map(|i| thin[i] && g.magnitude[i] >= high).collect();
    loop {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                if edge[i] || !thin[i] || g.magnitude[i] < low || g.magnitude[i].is_nan() {
                    continue;
                }
                let mut touches = false;
                for dr in -1..=1isize {
                    for dc in -1..=1isize {
                        let (cc, rr) = (c as isize + dc, r as isize + dr);
                        if cc >= 0 && rr >= 0 && cc < w as isize && rr < h as isize {
                            touches |= edge[rr as usize * w + cc as usize];
                        }
                    }
                }
                if touches {
                    edge[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return edge;
        }
    }
}

/// Closing straight from the definition: pixel p is in the closing iff every
/// in-image square window containing p intersects the input.
pub fn brute_close(mask: &Mask, kernel: usize) -> Mask {
    let (w, h) = mask.dims();
    let r = (kernel / 2) as isize;
    let inside = |c: isize, rr: isize| c >= 0 && rr >= 0 && c < w as isize && rr < h as isize;
    let dil = |c: isize, rr: isize| -> bool {
        for dy in -r..=r {
            for dx in -r..=r {
                if inside(c + dx, rr + dy) && mask.get((c + dx) as usize, (rr + dy) as usize) {
                    return true;
                }
            }
        }
        false
    };
    let mut out = Mask::empty(w, h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut all = true;
            for dy in -r..=r {
                for dx in -r..=r {
                    if inside(x + dx, y + dy) && !dil(x + dx, y + dy) {
                        all = false;
                    }
                }
            }
            out.set(x as usize, y as usize, all);
        }
    }
    out
}

/// Boundary precision/recall by all-pairs Chebyshev distance.
pub fn brute_boundary(pred: &Mask, truth: &Mask, tol: usize) -> (f64, f64) {
    let pts = |m: &Mask| -> Vec<(isize, isize)> {
        (0..m.height())
            .flat_map(|r| (0..m.width()).map(move |c| (c, r)))
            .filter(|&(c, r)| m.get(c, r))
            .map(|(c, r)| (c as isize, r as isize))
            .collect()
    };
    let (p, t) = (pts(pred), pts(truth));
    let frac = |a: &[(isize, isize)], b: &[(isize, isize)]| -> f64 {
        if a.is_empty() {
            return 0.0;
        }
        let hit = a
            .iter()
            .filter(|&&(x, y)| b.iter().any(|&(u, v)| (x - u).abs().max((y - v).abs()) <= tol as isize))
            .count();
        hit as f64 / a.len() as f64
    };
    (frac(&p, &t), frac(&t, &p))
}

pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> Mask {
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    Mask::from_bits(w, h, bits).unwrap()
}
