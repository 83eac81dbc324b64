//! Shi-Tomasi corners with per-cell capping for an even spatial spread.

use serde::{Deserialize, Serialize};

use super::frame::GrayFrame;
use crate::geom::{Point, Sym2};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub points: Vec<Point>,
    pub response: Vec<f64>,
}

impl CornerSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    pub grid: (usize, usize),
    pub max_per_cell: usize,
    pub quality: f64,
    /// Minimum distance between accepted corners, in pixels.
    pub min_distance: f64,
}

impl Default for CornerParams {
    fn default() -> Self {
        Self {
            grid: (4, 4),
            max_per_cell: 8,
            quality: 0.01,
            min_distance: 5.0,
        }
    }
}

const BOX_RADIUS: usize = 2;
const MARGIN: usize = BOX_RADIUS + 1;

/// Minimum-eigenvalue response map; zero within `MARGIN` of the border.
pub fn min_eigen_response(frame: &GrayFrame) -> Vec<f64> {
    let (w, h) = (frame.width, frame.height);
    let mut resp = vec![0.0; w * h];
    if w <= 2 * MARGIN || h <= 2 * MARGIN {
        return resp;
    }
    let px = |x: usize, y: usize| frame.get(x, y) as f64;
    let mut ixx = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            let gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            let (gx, gy) = (gx / 8.0, gy / 8.0);
            let i = y * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let r = BOX_RADIUS;
    for y in MARGIN..h - MARGIN {
        for x in MARGIN..w - MARGIN {
            let mut m = Sym2::default();
            for yy in y - r..=y + r {
                for xx in x - r..=x + r {
                    let i = yy * w + xx;
                    m.a += ixx[i];
                    m.b += ixy[i];
                    m.c += iyy[i];
                }
            }
            resp[y * w + x] = m.eigenvalues().0.max(0.0);
        }
    }
    resp
}

fn parabola_offset(l: f64, c: f64, r: f64) -> f64 {
    let denom = l - 2.0 * c + r;
    if denom.abs() < 1e-12 {
        0.0
    } else {
        (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
    }
}

pub fn detect_corners(frame: &GrayFrame, params: &CornerParams) -> CornerSet {
    let (w, h) = (frame.width, frame.height);
    let resp = min_eigen_response(frame);
    let global_max = resp.iter().cloned().fold(0.0, f64::max);
    if global_max <= 1e-9 || params.max_per_cell == 0 {
        return CornerSet::default();
    }
    let threshold = params.quality * global_max;

    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for y in MARGIN..h - MARGIN {
        for x in MARGIN..w - MARGIN {
            let v = resp[y * w + x];
            if v < threshold || v <= 0.0 {
                continue;
            }
            let is_max = (y - 1..=y + 1)
                .flat_map(|yy| (x - 1..=x + 1).map(move |xx| (xx, yy)))
                .all(|(xx, yy)| resp[yy * w + xx] <= v);
            if is_max {
                candidates.push((v, y * w + x));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let (rows, cols) = params.grid;
    let (rows, cols) = (rows.max(1), cols.max(1));
    let mut per_cell = vec![0usize; rows * cols];
    let min_d2 = params.min_distance * params.min_distance;
    let mut accepted: Vec<(usize, usize)> = Vec::new();
    let mut out = CornerSet::default();
    for (v, i) in candidates {
        let (x, y) = (i % w, i / w);
        let cell = (y * rows / h) * cols + x * cols / w;
        if per_cell[cell] >= params.max_per_cell {
            continue;
        }
        let crowded = accepted.iter().any(|&(ax, ay)| {
            let dx = ax as f64 - x as f64;
            let dy = ay as f64 - y as f64;
            dx * dx + dy * dy < min_d2
        });
        if crowded {
            continue;
        }
        per_cell[cell] += 1;
        accepted.push((x, y));
        let dx = parabola_offset(resp[i - 1], v, resp[i + 1]);
        let dy = parabola_offset(resp[i - w], v, resp[i + w]);
        out.points.push(Point::new(x as f64 + dx, y as f64 + dy));
        out.response.push(v);
    }
    out
}
