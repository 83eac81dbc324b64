//! Transport-mode classification from smartphone inertial and GPS logs.

mod features;
mod loss;
mod rfe;
mod smooth;
mod stream;
mod svm;

pub use features::{
    basic_stats, extract_features, feature_names, make_windows, window_starts, FeatureExtractor, FeatureWindow,
    CHANNELS, N_FEATURES, STRIDE, WINDOW,
};
pub use loss::{loss, weighted_loss};
pub use rfe::{consensus_select, rfe_rank, RfeTarget};
pub use smooth::{softmax, SmootherConfig, TemporalSmoother};
pub use stream::{
    preprocess, GriddedStream, Mode, PreprocessConfig, SensorSample, SensorStream, GAP_FLAG_SECONDS, NOMINAL_DT,
};
pub use svm::{
    argmax, kernel_matrix, median_pairwise_distance, solve_binary, standardization, train_svm, BinarySolution,
    Kernel, KernelKind, Machine, SmoConfig, SvmModel,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    pub preprocess: PreprocessConfig,
    #[serde(rename = "C")]
    pub c: f64,
    pub kernel: KernelKind,
    /// Keep only this many consensus-RFE features.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rfe_top: Option<usize>,
    pub smo: SmoConfig,
    pub smoother: SmootherConfig,
    pub smooth: bool,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            c: 1.0,
            kernel: KernelKind::Linear,
            rfe_top: None,
            smo: SmoConfig::default(),
            smoother: SmootherConfig::default(),
            smooth: true,
        }
    }
}

/// A labelled stretch of a ride, `[start, end)` in stream seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub mode: Mode,
}

/// Label of the segment containing each window's centre.
pub fn window_labels(windows: &[FeatureWindow], segments: &[Segment]) -> Vec<Option<Mode>> {
    windows
        .iter()
        .map(|w| {
            let t = w.t_center();
            segments.iter().find(|s| t >= s.start && t < s.end).map(|s| s.mode)
        })
        .collect()
}

/// Binary targets ranked by RFE: every pair of classes present.
pub fn rfe_pairs(classes: &[usize]) -> Vec<RfeTarget> {
    let mut out = Vec::new();
    for (i, &a) in classes.iter().enumerate() {
        for &b in &classes[i + 1..] {
            out.push(RfeTarget::Pair(a, b));
        }
    }
    out
}

/// Consensus feature mask of the `m` best features over all class pairs.
pub fn consensus_mask(x: &[Vec<f64>], y: &[usize], m: usize, c: f64, smo: &SmoConfig) -> Result<Vec<usize>> {
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateTraining("RFE needs at least two classes".into()));
    }
    let rankings = rfe_pairs(&classes)
        .into_iter()
        .map(|t| rfe_rank(x, y, t, c, smo))
        .collect::<Result<Vec<_>>>()?;
    consensus_select(&rankings, m)
}

/// Train the OVA model on labelled windows.
pub fn train_behavior(windows: &[FeatureWindow], labels: &[Mode], cfg: &BehaviorConfig) -> Result<SvmModel> {
    if windows.len() != labels.len() {
        return Err(Error::InvalidInput("window and label counts differ".into()));
    }
    let x: Vec<Vec<f64>> = windows.iter().map(|w| w.features.clone()).collect();
    let y: Vec<usize> = labels.iter().map(|m| m.index()).collect();
    let mask = match cfg.rfe_top {
        Some(m) => Some(consensus_mask(&x, &y, m, cfg.c, &cfg.smo)?),
        None => None,
    };
    train_svm(&x, &y, cfg.c, cfg.kernel, mask.as_deref(), &cfg.smo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowLabel {
    pub t_start: f64,
    pub t_end: f64,
    pub raw: Mode,
    pub smoothed: Mode,
}

/// Classify windows in order, with and without temporal smoothing.
pub fn classify_windows(model: &SvmModel, windows: &[FeatureWindow], cfg: &SmootherConfig) -> Result<Vec<WindowLabel>> {
    let sigma = cfg.sigma.unwrap_or(model.median_distance).max(1e-12);
    let mut smoother = TemporalSmoother::new(cfg.window, cfg.lambda, sigma)?;
    let mode_of = |pos: usize| {
        Mode::from_index(model.classes[pos]).ok_or_else(|| Error::InvalidInput("model class is not a mode".into()))
    };
    windows
        .iter()
        .map(|w| {
            let z = model.transform(&w.features);
            let d = model.decision_transformed(&z);
            Ok(WindowLabel {
                t_start: w.t_start,
                t_end: w.t_end,
                raw: mode_of(argmax(&d))?,
                smoothed: mode_of(smoother.push(&d, &z))?,
            })
        })
        .collect()
}

/// Merge consecutive windows with the same label into segments. Window
/// overlaps are split at the midpoint between window centres.
pub fn label_segments(labels: &[(f64, f64, Mode)]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (n, &(t0, t1, mode)) in labels.iter().enumerate() {
        let center = 0.5 * (t0 + t1);
        let start = if n == 0 {
            t0
        } else {
            let (p0, p1, _) = labels[n - 1];
            0.5 * (0.5 * (p0 + p1) + center)
        };
        let end = if n + 1 == labels.len() { t1 } else { f64::NAN };
        match out.last_mut() {
            Some(last) if last.mode == mode => last.end = end,
            Some(last) => {
                last.end = start;
                out.push(Segment { start, end, mode });
            }
            None => out.push(Segment { start, end, mode }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_merge_runs() {
        let labels = [
            (0.0, 9.9, Mode::Walk),
            (5.0, 14.9, Mode::Walk),
            (10.0, 19.9, Mode::Bike),
            (15.0, 24.9, Mode::Bike),
        ];
        let s = label_segments(&labels);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mode, Mode::Walk);
        assert_eq!(s[0].start, 0.0);
        assert!((s[0].end - 12.45).abs() < 1e-9);
        assert_eq!(s[1].start, s[0].end);
        assert_eq!(s[1].end, 24.9);
    }

    #[test]
    fn pairs_cover_classes() {
        assert_eq!(
            rfe_pairs(&[0, 1, 2]),
            vec![RfeTarget::Pair(0, 1), RfeTarget::Pair(0, 2), RfeTarget::Pair(1, 2)]
        );
    }
}
