//! Pyramidal Lucas-Kanade sparse optical flow.

use serde::{Deserialize, Serialize};

use super::corners::CornerSet;
use super::frame::{FloatImage, GrayFrame};
use crate::error::{Error, Result};
use crate::geom::{Point, Sym2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEntry {
    pub p: Point,
    pub v: Point,
    pub tracked: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawFlowField {
    pub entries: Vec<FlowEntry>,
}

impl RawFlowField {
    pub fn tracked(&self) -> impl Iterator<Item = &FlowEntry> {
        self.entries.iter().filter(|e| e.tracked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LkParams {
    /// Side of the square integration window, odd.
    pub window: usize,
    /// Number of coarser pyramid levels above the full-resolution one.
    pub pyramid_levels: usize,
    pub max_iters: usize,
    /// Convergence threshold on the per-iteration update, pixels.
    pub epsilon: f64,
    /// Minimum eigenvalue of the window-averaged structure tensor.
    pub min_eigen: f64,
}

impl Default for LkParams {
    fn default() -> Self {
        Self {
            window: 35,
            pyramid_levels: 1,
            max_iters: 20,
            epsilon: 0.01,
            min_eigen: 1e-2,
        }
    }
}

struct Level {
    prev: FloatImage,
    next: FloatImage,
    gx: FloatImage,
    gy: FloatImage,
}

fn build_levels(prev: &GrayFrame, next: &GrayFrame, extra: usize) -> Vec<Level> {
    let mut p = prev.to_f32();
    let mut n = next.to_f32();
    let mut levels = Vec::with_capacity(extra + 1);
    for l in 0..=extra {
        if l > 0 {
            if p.width < 16 || p.height < 16 {
                break;
            }
            p = p.pyr_down();
            n = n.pyr_down();
        }
        let (gx, gy) = p.scharr();
        levels.push(Level {
            prev: p.clone(),
            next: n.clone(),
            gx,
            gy,
        });
    }
    levels
}

fn track_point(levels: &[Level], p: Point, params: &LkParams) -> Option<Point> {
    let r = (params.window / 2) as i32;
    let n_px = (params.window * params.window) as f64;
    let mut guess = Point::default();
    let mut tmpl = Vec::with_capacity(params.window * params.window);

    for (l, level) in levels.iter().enumerate().rev() {
        let scale = 1.0 / (1u32 << l) as f64;
        let pl = p * scale;
        let (wl, hl) = ((level.prev.width - 1) as f64, (level.prev.height - 1) as f64);
        let inside = |x: f64, y: f64| x >= 0.0 && y >= 0.0 && x <= wl && y <= hl;
        tmpl.clear();
        let mut g = Sym2::default();
        for dy in -r..=r {
            for dx in -r..=r {
                let (x, y) = (pl.x + dx as f64, pl.y + dy as f64);
                if !inside(x, y) {
                    continue;
                }
                let (xf, yf) = (x as f32, y as f32);
                let i = level.prev.sample(xf, yf);
                let ix = level.gx.sample(xf, yf) as f64;
                let iy = level.gy.sample(xf, yf) as f64;
                g.a += ix * ix;
                g.b += ix * iy;
                g.c += iy * iy;
                tmpl.push((dx, dy, i, ix, iy));
            }
        }
        if g.eigenvalues().0 / n_px < params.min_eigen {
            return None;
        }
        let mut nu = Point::default();
        for _ in 0..params.max_iters {
            let q = pl + guess + nu;
            let mut b = Point::default();
            let mut gq = Sym2::default();
            for &(dx, dy, i, ix, iy) in &tmpl {
                let (x, y) = (q.x + dx as f64, q.y + dy as f64);
                // Samples leaving the frame carry no information.
                if !inside(x, y) {
                    continue;
                }
                let diff = (i - level.next.sample(x as f32, y as f32)) as f64;
                b.x += diff * ix;
                b.y += diff * iy;
                gq.a += ix * ix;
                gq.b += ix * iy;
                gq.c += iy * iy;
            }
            if gq.eigenvalues().0 / n_px < params.min_eigen {
                return None;
            }
            let eta = gq.solve(b)?;
            if !eta.is_finite() {
                return None;
            }
            nu = nu + eta;
            if eta.norm() < params.epsilon {
                break;
            }
        }
        guess = guess + nu;
        if l > 0 {
            guess = guess * 2.0;
        }
    }
    Some(guess)
}

/// Track each corner from `prev` into `next`.
pub fn lk_flow(prev: &GrayFrame, next: &GrayFrame, corners: &CornerSet, params: &LkParams) -> Result<RawFlowField> {
    if prev.width != next.width || prev.height != next.height {
        return Err(Error::InvalidInput(format!(
            "frame size mismatch {}x{} vs {}x{}",
            prev.width, prev.height, next.width, next.height
        )));
    }
    if params.window.is_multiple_of(2) || params.window < 3 {
        return Err(Error::InvalidInput(format!("LK window {} must be odd and >= 3", params.window)));
    }
    let levels = build_levels(prev, next, params.pyramid_levels);
    let (w, h) = (prev.width as f64, prev.height as f64);
    let entries = corners
        .points
        .iter()
        .map(|&p| match track_point(&levels, p, params) {
            Some(v) => {
                let q = p + v;
                let inside = q.x >= 0.0 && q.y >= 0.0 && q.x <= w - 1.0 && q.y <= h - 1.0;
                FlowEntry {
                    p,
                    v,
                    tracked: inside && v.is_finite(),
                }
            }
            None => FlowEntry {
                p,
                v: Point::default(),
                tracked: false,
            },
        })
        .collect();
    Ok(RawFlowField { entries })
}
