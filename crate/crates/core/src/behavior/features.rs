//! Fixed 54-value feature schema over 100-sample windows.
//!
//! Layout:
//! * `0..28`: for each channel `ax ay az gx gy gz speed`, the mean,
//!   standard deviation, root mean square and mean absolute deviation;
//! * `28..42`: for each channel, spectral energy and spectral entropy;
//! * `42..54`: for each acceleration pair `xy xz yz`, the same four
//!   statistics of the product of the two mean-centred axes.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::stream::{GriddedStream, SensorSample};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub const WINDOW: usize = 100;
pub const STRIDE: usize = 50;
pub const N_FEATURES: usize = 54;

pub const CHANNELS: [&str; 7] = ["ax", "ay", "az", "gx", "gy", "gz", "speed"];
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const PAIR_NAMES: [&str; 3] = ["axy", "axz", "ayz"];
const STATS: [&str; 4] = ["mean", "std", "rms", "mad"];

/// Schema names, e.g. `speed_rms`, `gy_entropy`, `axz_std`.
pub fn feature_names() -> Vec<String> {
    let mut out = Vec::with_capacity(N_FEATURES);
    for c in CHANNELS {
        for s in STATS {
            out.push(format!("{c}_{s}"));
        }
    }
    for c in CHANNELS {
        out.push(format!("{c}_energy"));
        out.push(format!("{c}_entropy"));
    }
    for p in PAIR_NAMES {
        for s in STATS {
            out.push(format!("{p}_{s}"));
        }
    }
    out
}

/// Window start indices: `floor((n - 100) / 50) + 1` windows.
pub fn window_starts(n: usize) -> Result<Vec<usize>> {
    if n < WINDOW {
        return Err(Error::InsufficientData(format!("{n} samples, a window needs {WINDOW}")));
    }
    Ok((0..=(n - WINDOW) / STRIDE).map(|i| i * STRIDE).collect())
}

/// Mean, population standard deviation, RMS and mean absolute deviation.
pub fn basic_stats(x: &[f64]) -> [f64; 4] {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let mad = x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    [mean, var.sqrt(), rms, mad]
}

pub struct FeatureExtractor {
    fft: Arc<dyn Fft<f64>>,
}

impl Default for FeatureExtractor {
    fn default() -> Self {
        Self::new()
    }
}

impl FeatureExtractor {
    pub fn new() -> Self {
        Self {
            fft: FftPlanner::new().plan_fft_forward(WINDOW),
        }
    }

    /// Spectral energy `sum |X_f|^2 / N` and entropy (bits) of the
    /// normalized power over bins `1..=N/2`. Both are 0 for a constant signal.
    pub fn spectral(&self, x: &[f64]) -> (f64, f64) {
        let n = x.len();
        let [mean, std, ..] = basic_stats(x);
        if std <= 1e-12 * mean.abs().max(1.0) {
            return (0.0, 0.0);
        }
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
        if n == WINDOW {
            self.fft.process(&mut buf);
        } else {
            FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        }
        let power: Vec<f64> = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = power.iter().sum();
        if total <= 0.0 {
            return (0.0, 0.0);
        }
        let entropy = -power
            .iter()
            .map(|p| p / total)
            .filter(|&q| q > 0.0)
            .map(|q| q * q.log2())
            .sum::<f64>();
        (total / n as f64, entropy.max(0.0))
    }

    pub fn extract(&self, window: &[SensorSample]) -> Result<[f64; N_FEATURES]> {
        if window.len() != WINDOW {
            return Err(Error::InvalidInput(format!("window has {} samples, expected {WINDOW}", window.len())));
        }
        let mut ch = vec![[0.0; WINDOW]; 7];
        for (i, s) in window.iter().enumerate() {
            for (c, v) in s.channels().into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite {} at sample {i}", CHANNELS[c])));
                }
                ch[c][i] = v;
            }
        }
        let mut out = [0.0; N_FEATURES];
        let mut means = [0.0; 7];
        for (c, x) in ch.iter().enumerate() {
            let st = basic_stats(x);
            means[c] = st[0];
            out[4 * c..4 * c + 4].copy_from_slice(&st);
            let (e, h) = self.spectral(x);
            out[28 + 2 * c] = e;
            out[28 + 2 * c + 1] = h;
        }
        for (p, &(a, b)) in PAIRS.iter().enumerate() {
            let prod: Vec<f64> = (0..WINDOW)
                .map(|i| (ch[a][i] - means[a]) * (ch[b][i] - means[b]))
                .collect();
            out[42 + 4 * p..42 + 4 * p + 4].copy_from_slice(&basic_stats(&prod));
        }
        Ok(out)
    }
}

pub fn extract_features(window: &[SensorSample]) -> Result<[f64; N_FEATURES]> {
    FeatureExtractor::new().extract(window)
}

/// One analysis window of a gridded stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub start: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub features: Vec<f64>,
}

impl FeatureWindow {
    pub fn t_center(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }
}

pub fn make_windows(stream: &GriddedStream, exec: Execution) -> Result<Vec<FeatureWindow>> {
    let starts = window_starts(stream.len())?;
    let fx = FeatureExtractor::new();
    exec::map(exec, &starts, |&start| {
        let slice = &stream.samples[start..start + WINDOW];
        Ok(FeatureWindow {
            start,
            t_start: slice[0].t,
            t_end: slice[WINDOW - 1].t,
            features: fx.extract(slice)?.to_vec(),
        })
    })
    .into_iter()
    .collect()
}
