use crate::error::{Error, Result};

/// 8-bit grayscale frame, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
    pub index: u64,
    pub timestamp: f64,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "frame data has {} bytes, expected {}x{}={}",
                data.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            index: 0,
            timestamp: 0.0,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
            index: 0,
            timestamp: 0.0,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
            index: 0,
            timestamp: 0.0,
        }
    }

    pub fn with_meta(mut self, index: u64, timestamp: f64) -> Self {
        self.index = index;
        self.timestamp = timestamp;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0 || self.height == 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Rotate by 180 degrees.
    pub fn rotated_180(&self) -> GrayFrame {
        let mut data = self.data.clone();
        data.reverse();
        GrayFrame { data, ..self.clone() }
    }

    pub(crate) fn to_f32(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f32).collect(),
        }
    }
}

/// Working float image used by the gradient-based stages.
#[derive(Debug, Clone)]
pub(crate) struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl FloatImage {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    fn at_clamped(&self, x: isize, y: isize) -> f32 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.at(xc, yc)
    }

    /// Bilinear sample with edge clamping.
    pub fn sample(&self, x: f32, y: f32) -> f32 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let a = self.at_clamped(xi, yi);
        let b = self.at_clamped(xi + 1, yi);
        let c = self.at_clamped(xi, yi + 1);
        let d = self.at_clamped(xi + 1, yi + 1);
        (1.0 - fy) * ((1.0 - fx) * a + fx * b) + fy * ((1.0 - fx) * c + fx * d)
    }

    /// 2x downsample with a [1 2 1]/4 separable prefilter.
    pub fn pyr_down(&self) -> FloatImage {
        let w = self.width.div_ceil(2).max(1);
        let h = self.height.div_ceil(2).max(1);
        let k = [0.25f32, 0.5, 0.25];
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let (cx, cy) = ((2 * x) as isize, (2 * y) as isize);
                let mut acc = 0.0;
                for (j, ky) in k.iter().enumerate() {
                    for (i, kx) in k.iter().enumerate() {
                        acc += ky * kx * self.at_clamped(cx + i as isize - 1, cy + j as isize - 1);
                    }
                }
                out[y * w + x] = acc;
            }
        }
        FloatImage {
            width: w,
            height: h,
            data: out,
        }
    }

    /// Central-difference gradients (Scharr weights), border pixels clamped.
    pub fn scharr(&self) -> (FloatImage, FloatImage) {
        let (w, h) = (self.width, self.height);
        let mut gx = vec![0.0; w * h];
        let mut gy = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let p = |dx: isize, dy: isize| self.at_clamped(x + dx, y + dy);
                let dx = 3.0 * (p(1, -1) - p(-1, -1)) + 10.0 * (p(1, 0) - p(-1, 0)) + 3.0 * (p(1, 1) - p(-1, 1));
                let dy = 3.0 * (p(-1, 1) - p(-1, -1)) + 10.0 * (p(0, 1) - p(0, -1)) + 3.0 * (p(1, 1) - p(1, -1));
                let i = y as usize * w + x as usize;
                gx[i] = dx / 32.0;
                gy[i] = dy / 32.0;
            }
        }
        (
            FloatImage { width: w, height: h, data: gx },
            FloatImage { width: w, height: h, data: gy },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_length() {
        assert!(GrayFrame::new(4, 4, vec![0; 15]).is_err());
    }

    #[test]
    fn bilinear_midpoint() {
        let f = GrayFrame::from_fn(2, 1, |x, _| if x == 0 { 0 } else { 100 }).to_f32();
        assert!((f.sample(0.5, 0.0) - 50.0).abs() < 1e-5);
    }

    #[test]
    fn rotation_is_involution() {
        let f = GrayFrame::from_fn(5, 3, |x, y| (x * 7 + y * 3) as u8);
        assert_eq!(f.rotated_180().rotated_180(), f);
        assert_eq!(f.rotated_180().get(0, 0), f.get(4, 2));
    }
}
