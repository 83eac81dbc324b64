//! Ride analysis: behavior labels gate which frames get FOE and risk
//! estimation; results are joined to GPS and summarized per segment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::behavior::{
    classify_windows, label_segments, make_windows, preprocess, train_behavior, window_labels, FeatureWindow, Mode,
    Segment, SensorStream, SvmModel, WindowLabel,
};
use crate::config::PipelineConfig;
use crate::emd::{build_distance_matrix, canonical_map, classify_risk, RiskTrainingSet};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::foe::{estimate_frame, observations_from_flow, FlowObservation, FoeSmoother};
use crate::geom::Point;
use crate::io::{
    format_descriptors, format_report, read_detections, read_sensor_csv, DescriptorRecord, ReportSegment,
    RideRecording,
};
use crate::risk::{risk_descriptor, Detection, RegionMap};
use crate::vision::frame_pair_flow;

/// Behavior stage output for one sensor log.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorLabels {
    pub windows: Vec<FeatureWindow>,
    pub labels: Vec<WindowLabel>,
    pub segments: Vec<Segment>,
}

pub fn label_stream(stream: &SensorStream, model: &SvmModel, cfg: &PipelineConfig, exec: Execution) -> Result<BehaviorLabels> {
    let grid = preprocess(stream, &cfg.behavior.preprocess)?;
    let windows = make_windows(&grid, exec)?;
    let labels = classify_windows(model, &windows, &cfg.behavior.smoother)?;
    let spans: Vec<(f64, f64, Mode)> = labels
        .iter()
        .map(|l| (l.t_start, l.t_end, if cfg.behavior.smooth { l.smoothed } else { l.raw }))
        .collect();
    Ok(BehaviorLabels {
        segments: label_segments(&spans),
        windows,
        labels,
    })
}

/// Windows of `stream` with their ground-truth modes; windows whose centre
/// falls outside every segment are dropped.
pub fn labeled_windows(stream: &SensorStream, truth: &[Segment], cfg: &PipelineConfig, exec: Execution) -> Result<(Vec<FeatureWindow>, Vec<Mode>)> {
    let grid = preprocess(stream, &cfg.behavior.preprocess)?;
    let windows = make_windows(&grid, exec)?;
    let labels = window_labels(&windows, truth);
    Ok(windows.into_iter().zip(labels).filter_map(|(w, l)| Some((w, l?))).unzip())
}

/// Train the behavior model on several labelled logs.
pub fn train_behavior_model(rides: &[(SensorStream, Vec<Segment>)], cfg: &PipelineConfig, exec: Execution) -> Result<SvmModel> {
    let mut windows = Vec::new();
    let mut labels = Vec::new();
    for (stream, truth) in rides {
        let (w, l) = labeled_windows(stream, truth, cfg, exec)?;
        windows.extend(w);
        labels.extend(l);
    }
    train_behavior(&windows, &labels, &cfg.behavior)
}

/// Index of the segment holding `t`; the last segment is closed on the right.
pub fn segment_at(segments: &[Segment], t: f64) -> Option<usize> {
    segments
        .iter()
        .position(|s| t >= s.start && t < s.end)
        .or_else(|| segments.last().filter(|s| t == s.end).map(|_| segments.len() - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame: u64,
    pub t: f64,
    pub mode: Option<Mode>,
    /// Per-frame refined estimate, absent when estimation failed.
    pub foe_raw: Option<Point>,
    /// Smoothed FOE used for the lane map.
    pub foe: Option<Point>,
    pub iterations: usize,
    pub active_count: usize,
    pub level: Option<u8>,
    pub position: Option<[f64; 2]>,
    #[serde(skip)]
    pub descriptor: Option<DescriptorRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RideReport {
    pub frames: Vec<FrameResult>,
    pub behavior: BehaviorLabels,
    pub segments: Vec<ReportSegment>,
}

impl RideReport {
    pub fn analyzed_frames(&self) -> usize {
        self.frames.iter().filter(|f| f.level.is_some()).count()
    }

    /// Segment boundaries sit at mode changes and histograms add up to the
    /// analyzed frame count.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.segments.windows(2) {
            if w[0].mode == w[1].mode || w[0].end != w[1].start {
                return Err(Error::InvalidInput("report segments do not split at mode changes".into()));
            }
        }
        let total: usize = self.segments.iter().map(|s| s.analyzed_frames()).sum();
        if total != self.analyzed_frames() {
            return Err(Error::InvalidInput(format!(
                "histograms count {total} frames, {} were analyzed",
                self.analyzed_frames()
            )));
        }
        Ok(())
    }
}

/// Nearest raw sample within `tol` seconds.
fn nearest_position(stream: &SensorStream, t: f64, tol: f64) -> Option<[f64; 2]> {
    let s = &stream.samples;
    let i = s.partition_point(|x| x.t < t);
    let best = [i.checked_sub(1), (i < s.len()).then_some(i)]
        .into_iter()
        .flatten()
        .min_by(|&a, &b| (s[a].t - t).abs().total_cmp(&(s[b].t - t).abs()))?;
    ((s[best].t - t).abs() <= tol).then(|| [s[best].lon, s[best].lat])
}

fn segment_polyline(stream: &SensorStream, seg: &Segment) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = stream
        .samples
        .iter()
        .filter(|x| x.t >= seg.start && x.t <= seg.end)
        .map(|x| [x.lon, x.lat])
        .collect();
    if pts.len() < 2 {
        let ends = [seg.start, seg.end].map(|t| nearest_position(stream, t, f64::INFINITY));
        pts = ends.into_iter().flatten().collect();
        if pts.len() == 1 {
            pts.push(pts[0]);
        }
    }
    pts
}

/// Run every stage on an opened ride.
pub fn analyze(
    ride: &RideRecording,
    model: &SvmModel,
    trainset: &RiskTrainingSet,
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<RideReport> {
    if trainset.criterion != cfg.criterion {
        return Err(Error::Config(format!(
            "training set is for {}, analysis uses {}",
            trainset.criterion, cfg.criterion
        )));
    }
    trainset.validate()?;
    let stream = read_sensor_csv(&ride.path(&ride.manifest.sensors))?;
    let behavior = label_stream(&stream, model, cfg, exec)?;

    let n = ride.frames.len();
    let mut frames: Vec<FrameResult> = (0..n as u64)
        .map(|i| {
            let t = ride.frame_time(i);
            FrameResult {
                frame: i,
                t,
                mode: segment_at(&behavior.segments, t).map(|k| behavior.segments[k].mode),
                foe_raw: None,
                foe: None,
                iterations: 0,
                active_count: 0,
                level: None,
                position: nearest_position(&stream, t, cfg.gps_tolerance),
                descriptor: None,
            }
        })
        .collect();
    let bike: Vec<usize> = (0..n).filter(|&i| frames[i].mode == Some(Mode::Bike)).collect();
    let skip = cfg.vision.skip;

    if !bike.is_empty() && n > skip {
        let mut detections: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
        for d in read_detections(&ride.path(&ride.manifest.detections))? {
            if d.frame < n as u64 {
                detections.entry(d.frame).or_default().push(d);
            } else {
                log::warn!("detection for frame {} beyond the {n} frames of the ride", d.frame);
            }
        }
        let none: Vec<Detection> = Vec::new();
        let dets = |f: usize| detections.get(&(f as u64)).unwrap_or(&none);

        // The last `skip` frames reuse the final forward pair.
        let start_of = |f: usize| f.min(n - 1 - skip);
        let mut starts: Vec<usize> = bike.iter().map(|&f| start_of(f)).collect();
        starts.dedup();
        let flows: Vec<Result<Vec<FlowObservation>>> = exec::map(exec, &starts, |&s| {
            let a = ride.frames.load(s)?;
            let b = ride.frames.load(s + skip)?;
            Ok(observations_from_flow(&frame_pair_flow(&a, &b, &cfg.vision)?))
        });
        let flow_of: BTreeMap<usize, &Result<Vec<FlowObservation>>> = starts.iter().copied().zip(&flows).collect();

        let first = ride.frames.load(bike[0])?;
        let dims = (first.width, first.height);
        let center = Point::new(dims.0 as f64 / 2.0, dims.1 as f64 / 2.0);
        let mut smoother = FoeSmoother::new(cfg.foe.smooth_m, cfg.foe.smooth_tau);
        let mut prev = center;
        for &f in &bike {
            let s = start_of(f);
            let est = match flow_of[&s] {
                Ok(obs) => estimate_frame(obs.clone(), dets(s), prev, dims, &cfg.foe),
                Err(e) => Err(Error::InvalidInput(e.to_string())),
            };
            let raw = match est {
                Ok(e) => {
                    frames[f].iterations = e.iterations;
                    frames[f].active_count = e.active_count;
                    Some(e.x)
                }
                Err(e) => {
                    log::warn!("frame {f}: FOE estimation failed: {e}");
                    None
                }
            };
            frames[f].foe_raw = raw;
            let smoothed = smoother.update(f as u64, raw)?.unwrap_or(prev);
            prev = Point::new(smoothed.x.clamp(0.0, dims.0 as f64 - 1.0), smoothed.y.clamp(0.0, dims.1 as f64 - 1.0));
            frames[f].foe = Some(prev);
        }

        let dist = build_distance_matrix(&canonical_map(cfg.criterion, dims, &cfg.regions), cfg.emd.cross_region_factor)?;
        let risk: Vec<Result<(DescriptorRecord, u8)>> = exec::map(exec, &bike, |&f| {
            let map = RegionMap::build(cfg.criterion, frames[f].foe.expect("set above"), dims, &cfg.regions);
            let descriptor = risk_descriptor(f as u64, dets(f), &map, &cfg.risk);
            let level = classify_risk(&descriptor.d, trainset, &dist, cfg.emd.k, Execution::Sequential)?.level;
            Ok((DescriptorRecord { descriptor, level: Some(level) }, level))
        });
        for (&f, r) in bike.iter().zip(risk) {
            match r {
                Ok((rec, level)) => {
                    frames[f].level = Some(level);
                    frames[f].descriptor = Some(rec);
                }
                Err(e) if e.is_numeric() => log::warn!("frame {f}: risk classification failed: {e}"),
                Err(e) => return Err(e),
            }
        }
    }

    let mut segments = Vec::with_capacity(behavior.segments.len());
    for seg in &behavior.segments {
        let mut risk = [0usize; 3];
        segments.push(ReportSegment {
            start: seg.start,
            end: seg.end,
            mode: seg.mode,
            coordinates: segment_polyline(&stream, seg),
            risk,
        });
        let k = segments.len() - 1;
        for fr in &frames {
            if let (Some(level), Some(j)) = (fr.level, segment_at(&behavior.segments, fr.t)) {
                if j == k {
                    risk[level as usize - 1] += 1;
                }
            }
        }
        segments[k].risk = risk;
    }
    let report = RideReport {
        frames,
        behavior,
        segments,
    };
    report.check_invariants()?;
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), |x| x.to_string())
}

pub fn format_foe_table(report: &RideReport) -> String {
    let mut out = String::from("frame raw_x raw_y x y iterations active_count\n");
    for f in report.frames.iter().filter(|f| f.foe.is_some()) {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            f.frame,
            opt(f.foe_raw.map(|p| p.x)),
            opt(f.foe_raw.map(|p| p.y)),
            opt(f.foe.map(|p| p.x)),
            opt(f.foe.map(|p| p.y)),
            f.iterations,
            f.active_count
        );
    }
    out
}

pub fn format_frames(report: &RideReport) -> String {
    let mut out = String::new();
    for f in &report.frames {
        out.push_str(&serde_json::to_string(f).expect("frame serializes"));
        out.push('\n');
    }
    out
}

pub fn format_windows(report: &RideReport) -> String {
    let mut out = String::from("t_start,t_end,raw,smoothed\n");
    for w in &report.behavior.labels {
        let _ = writeln!(out, "{},{},{},{}", w.t_start, w.t_end, w.raw, w.smoothed);
    }
    out
}

pub const REPORT_FILES: [&str; 5] = ["foe.txt", "descriptors.brds", "risk.ndjson", "windows.csv", "report.geojson"];

/// Write every output file into `dir`, creating it if needed.
pub fn write_outputs(report: &RideReport, cfg: &PipelineConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let descriptors: Vec<DescriptorRecord> = report.frames.iter().filter_map(|f| f.descriptor.clone()).collect();
    let contents = [
        format_foe_table(report),
        format_descriptors(cfg.criterion, &descriptors)?,
        format_frames(report),
        format_windows(report),
        format_report(&report.segments)?,
    ];
    for (name, text) in REPORT_FILES.iter().zip(contents) {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_lookup() {
        let segs = [
            Segment { start: 10.0, end: 20.0, mode: Mode::Walk },
            Segment { start: 20.0, end: 30.0, mode: Mode::Bike },
        ];
        assert_eq!(segment_at(&segs, 9.9), None);
        assert_eq!(segment_at(&segs, 20.0), Some(1));
        assert_eq!(segment_at(&segs, 30.0), Some(1));
        assert_eq!(segment_at(&segs, 30.1), None);
    }
}
