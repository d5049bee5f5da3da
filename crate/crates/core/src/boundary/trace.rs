//! Pixel-corner boundary tracing of labelled regions.
//!
//! Every pixel side separating the region from the outside becomes a
//! directed unit edge with the region on the walker's right (rows grow
//! downwards), which makes exterior rings positive and holes negative under
//! the shoelace formula. Edges are chained by preferring a right turn, then
//! straight, then left; at a diagonal pinch this keeps the two touching
//! pixels apart, matching 4-connectivity.

use alloc::vec;
use alloc::vec::Vec;

use crate::fields::{signed_area, Point};
use crate::labels::LabelImage;

/// A closed ring (first point repeated last) in pixel-corner coordinates.
pub type Ring = Vec<Point>;

// Direction indices; (d + 1) % 4 is a right turn.
const STEPS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

struct Bbox {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

/// Traces all rings of region `label`: the exterior first, then holes in
/// row-major order of their top-left corner. Collinear points are merged.
pub fn trace_component(regions: &LabelImage, label: i32) -> Vec<Ring> {
    let (w, h) = regions.dims();
    let l = regions.labels();
    let mut bbox: Option<Bbox> = None;
    for row in 0..h {
        for col in 0..w {
            if l[row * w + col] == label {
                let b = bbox.get_or_insert(Bbox { x0: col, y0: row, x1: col, y1: row });
                b.x0 = b.x0.min(col);
                b.x1 = b.x1.max(col);
                b.y1 = row;
            }
        }
    }
    match bbox {
        Some(b) => trace_in_bbox(regions, label, &b),
        None => Vec::new(),
    }
}

/// Traces every region `0..cluster_count` in one pass over the image.
pub fn trace_all(regions: &LabelImage) -> Vec<Vec<Ring>> {
    let w = regions.width();
    let mut boxes: Vec<Option<Bbox>> = (0..regions.cluster_count()).map(|_| None).collect();
    for (idx, &lab) in regions.labels().iter().enumerate() {
        if lab < 0 {
            continue;
        }
        let (col, row) = (idx % w, idx / w);
        let b = boxes[lab as usize].get_or_insert(Bbox { x0: col, y0: row, x1: col, y1: row });
        b.x0 = b.x0.min(col);
        b.x1 = b.x1.max(col);
        b.y1 = row;
    }
    boxes
        .iter()
        .enumerate()
        .map(|(k, b)| match b {
            Some(b) => trace_in_bbox(regions, k as i32, b),
            None => Vec::new(),
        })
        .collect()
}

fn trace_in_bbox(regions: &LabelImage, label: i32, b: &Bbox) -> Vec<Ring> {
    let (w, h) = regions.dims();
    let l = regions.labels();
    let inside = |c: isize, r: isize| -> bool {
        c >= 0 && r >= 0 && c < w as isize && r < h as isize && l[r as usize * w + c as usize] == label
    };
    // Vertex grid over the bbox corners.
    let vw = b.x1 - b.x0 + 2;
    let vh = b.y1 - b.y0 + 2;
    let mut edges = vec![0u8; vw * vh];
    let vid = |x: usize, y: usize| (y - b.y0) * vw + (x - b.x0);
    for row in b.y0..=b.y1 {
        for col in b.x0..=b.x1 {
            let (c, r) = (col as isize, row as isize);
            if !inside(c, r) {
                continue;
            }
            if !inside(c, r - 1) {
                edges[vid(col, row)] |= 1 << 0;
            }
            if !inside(c + 1, r) {
                edges[vid(col + 1, row)] |= 1 << 1;
            }
            if !inside(c, r + 1) {
                edges[vid(col + 1, row + 1)] |= 1 << 2;
            }
            if !inside(c - 1, r) {
                edges[vid(col, row + 1)] |= 1 << 3;
            }
        }
    }

    let mut used = vec![0u8; vw * vh];
    let mut rings = Vec::new();
    for start in 0..vw * vh {
        while edges[start] & !used[start] != 0 {
            let start_dir = (edges[start] & !used[start]).trailing_zeros() as usize;
            let mut v = start;
            let mut d = start_dir;
            let mut verts: Vec<(usize, usize)> = Vec::new();
            loop {
                used[v] |= 1 << d;
                verts.push((v, d));
                let (x, y) = ((v % vw) as isize, (v / vw) as isize);
                let (dx, dy) = STEPS[d];
                let next = (y + dy) as usize * vw + (x + dx) as usize;
                let nd = [(d + 1) % 4, d, (d + 3) % 4]
                    .into_iter()
                    .find(|&c| edges[next] & (1 << c) != 0)
                    .expect("boundary edges form closed cycles");
                if next == start && nd == start_dir {
                    break;
                }
                v = next;
                d = nd;
            }
            rings.push(compress(&verts, vw, b));
        }
    }
    rings
}

fn compress(verts: &[(usize, usize)], vw: usize, b: &Bbox) -> Ring {
    let n = verts.len();
    let mut ring: Ring = Vec::new();
    for i in 0..n {
        let (v, d_out) = verts[i];
        let d_in = verts[(i + n - 1) % n].1;
        if d_in != d_out {
            let x = (v % vw + b.x0) as f64;
            let y = (v / vw + b.y0) as f64;
            ring.push([x, y]);
        }
    }
    if let Some(&first) = ring.first() {
        ring.push(first);
    }
    ring
}

/// Splits traced rings into the exterior (the ring with the largest positive
/// signed area) and holes.
pub(crate) fn split_exterior(mut rings: Vec<Ring>) -> (Ring, Vec<Ring>) {
    let pos = rings
        .iter()
        .enumerate()
        .max_by(|a, b| signed_area(a.1).total_cmp(&signed_area(b.1)))
        .map(|(i, _)| i);
    match pos {
        Some(i) => {
            let ext = rings.remove(i);
            (ext, rings)
        }
        None => (Vec::new(), Vec::new()),
    }
}
