//! Contrast-limited adaptive histogram equalization.

use super::frame::GrayFrame;
use crate::error::{Error, Result};

const LEVELS: usize = 256;

/// Tile boundaries `[start, end)` splitting `len` into `n` nearly equal
/// pieces; the last pieces absorb the remainder.
fn splits(len: usize, n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i * len / n, (i + 1) * len / n)).collect()
}

fn tile_lut(frame: &GrayFrame, xs: (usize, usize), ys: (usize, usize), clip_limit: f64) -> [u8; LEVELS] {
    let mut hist = [0.0f64; LEVELS];
    for y in ys.0..ys.1 {
        let row = &frame.data[y * frame.width + xs.0..y * frame.width + xs.1];
        for &v in row {
            hist[v as usize] += 1.0;
        }
    }
    let n = ((xs.1 - xs.0) * (ys.1 - ys.0)) as f64;
    let mut lut = [0u8; LEVELS];
    let occupied = hist.iter().filter(|&&h| h > 0.0).count();
    if occupied <= 1 {
        // Nothing to equalize in a single-level tile.
        for (v, out) in lut.iter_mut().enumerate() {
            *out = v as u8;
        }
        return lut;
    }

    let limit = (clip_limit * n).max(1.0);
    let mut excess = 0.0;
    for h in hist.iter_mut() {
        if *h > limit {
            excess += *h - limit;
            *h = limit;
        }
    }
    let share = excess / LEVELS as f64;
    let mut cdf = 0.0;
    for (v, h) in hist.iter().enumerate() {
        cdf += h + share;
        lut[v] = (255.0 * cdf / n).round().clamp(0.0, 255.0) as u8;
    }
    lut
}

/// Per-tile equalization with clipped histograms and bilinear blending of
/// neighbouring tile mappings. Tiles that do not divide the frame evenly
/// are made one pixel larger at the far edges.
pub fn clahe(frame: &GrayFrame, grid: (usize, usize), clip_limit: f64) -> Result<GrayFrame> {
    if frame.is_empty() || frame.data.len() != frame.width * frame.height {
        return Err(Error::InvalidInput("clahe on empty frame".into()));
    }
    if !(clip_limit > 0.0 && clip_limit <= 1.0) {
        return Err(Error::InvalidInput(format!("clip limit {clip_limit} outside (0, 1]")));
    }
    let (rows, cols) = grid;
    if rows == 0 || cols == 0 || rows > frame.height || cols > frame.width {
        return Err(Error::InvalidInput(format!("bad CLAHE grid {rows}x{cols}")));
    }

    let xs = splits(frame.width, cols);
    let ys = splits(frame.height, rows);
    let mut luts = Vec::with_capacity(rows * cols);
    for &yr in &ys {
        for &xr in &xs {
            luts.push(tile_lut(frame, xr, yr, clip_limit));
        }
    }

    let centers = |r: &[(usize, usize)]| -> Vec<f64> {
        r.iter().map(|&(a, b)| (a + b) as f64 / 2.0 - 0.5).collect()
    };
    let cx = centers(&xs);
    let cy = centers(&ys);

    // (lower tile index, weight of the upper tile) along one axis.
    let interp = |c: &[f64], p: f64| -> (usize, f64) {
        if p <= c[0] {
            return (0, 0.0);
        }
        let last = c.len() - 1;
        if p >= c[last] {
            return (last, 0.0);
        }
        let i = c.partition_point(|&v| v <= p) - 1;
        (i, (p - c[i]) / (c[i + 1] - c[i]))
    };

    let xw: Vec<(usize, f64)> = (0..frame.width).map(|x| interp(&cx, x as f64)).collect();
    let mut out = Vec::with_capacity(frame.data.len());
    for y in 0..frame.height {
        let (ty, wy) = interp(&cy, y as f64);
        let ty1 = (ty + 1).min(rows - 1);
        for (x, &(tx, wx)) in xw.iter().enumerate() {
            let tx1 = (tx + 1).min(cols - 1);
            let v = frame.data[y * frame.width + x] as usize;
            let l = |r: usize, c: usize| luts[r * cols + c][v] as f64;
            let top = (1.0 - wx) * l(ty, tx) + wx * l(ty, tx1);
            let bot = (1.0 - wx) * l(ty1, tx) + wx * l(ty1, tx1);
            out.push(((1.0 - wy) * top + wy * bot).round().clamp(0.0, 255.0) as u8);
        }
    }

    Ok(GrayFrame {
        width: frame.width,
        height: frame.height,
        data: out,
        index: frame.index,
        timestamp: frame.timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_frame_is_fixed_point() {
        let f = GrayFrame::filled(96, 80, 128);
        let once = clahe(&f, (4, 4), 0.03).unwrap();
        assert!(once.data.iter().all(|&v| v == once.data[0]));
        let twice = clahe(&once, (4, 4), 0.03).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn two_level_partition_preserved() {
        let f = GrayFrame::from_fn(64, 64, |x, y| if (x / 5 + y / 7) % 2 == 0 { 0 } else { 255 });
        let out = clahe(&f, (4, 4), 1.0).unwrap();
        let max_dark = f.data.iter().zip(&out.data).filter(|(i, _)| **i == 0).map(|(_, o)| *o).max();
        let min_bright = f.data.iter().zip(&out.data).filter(|(i, _)| **i == 255).map(|(_, o)| *o).min();
        assert!(max_dark.unwrap() < min_bright.unwrap());
    }

    #[test]
    fn low_contrast_ramp_is_stretched() {
        let f = GrayFrame::from_fn(128, 96, |x, _| (100 + x * 31 / 128) as u8);
        let out = clahe(&f, (4, 4), 0.03).unwrap();
        let mut hist = [0usize; 256];
        for &v in &out.data {
            hist[v as usize] += 1;
        }
        let lo = hist.iter().position(|&c| c > 0).unwrap();
        let hi = hist.iter().rposition(|&c| c > 0).unwrap();
        assert!(hi - lo > 30, "output range {lo}..{hi}");
    }

    #[test]
    fn uneven_grid_keeps_dimensions() {
        let f = GrayFrame::from_fn(67, 70, |x, y| ((x * y) % 251) as u8);
        let out = clahe(&f, (4, 4), 0.03).unwrap();
        assert_eq!((out.width, out.height), (67, 70));
    }

    #[test]
    fn empty_frame_rejected() {
        let f = GrayFrame::filled(0, 0, 0);
        assert!(matches!(clahe(&f, (4, 4), 0.03), Err(Error::InvalidInput(_))));
        assert!(clahe(&GrayFrame::filled(8, 8, 1), (4, 4), 0.0).is_err());
    }
}
