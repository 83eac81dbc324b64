use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ride::SyntheticRide;
use super::video::{script_detections, TunnelSpec};
use crate::error::{Error, Result};
use crate::io::{format_labels_csv, write_detections, write_manifest, write_pgm, write_sensor_csv, RideManifest};

/// Video laid over a synthetic ride.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VideoSpec {
    pub tunnel: TunnelSpec,
    pub fps: f64,
    /// Sensor-clock time of the first frame.
    pub start: f64,
    pub frames: u64,
}

/// Distance travelled by `t`, integrating the logged speed.
fn travelled(ride: &SyntheticRide, t: f64) -> f64 {
    let mut s = 0.0;
    for w in ride.stream.samples.windows(2) {
        if w[0].t >= t {
            break;
        }
        let dt = w[1].t.min(t) - w[0].t;
        s += w[0].speed * dt;
    }
    s
}

/// Write a ride directory: manifest, sensor log, ground-truth labels and,
/// when `video` is given, rendered frames with scripted detections.
pub fn write_ride_dir(dir: &Path, id: &str, ride: &SyntheticRide, video: Option<&VideoSpec>, seed: u64) -> Result<()> {
    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    let fps = video.map_or(30.0, |v| v.fps);
    let start = video.map_or(0.0, |v| v.start);
    let mut manifest = RideManifest::new(id, fps, start);
    manifest.labels = Some("labels.csv".into());
    write_manifest(dir, &manifest)?;
    write_sensor_csv(&dir.join(&manifest.sensors), &ride.stream)?;
    let labels = dir.join("labels.csv");
    fs::write(&labels, format_labels_csv(&ride.segments)).map_err(|e| Error::io(&labels, e))?;
    let dets = match video {
        Some(v) => {
            for i in 0..v.frames {
                let t = manifest.frame_time(i);
                let frame = v.tunnel.render(i, travelled(ride, t));
                write_pgm(&frames_dir.join(format!("{i:06}.pgm")), &frame)?;
            }
            script_detections(&v.tunnel, v.frames, v.fps, seed)
        }
        None => Vec::new(),
    };
    write_detections(&dir.join(&manifest.detections), &dets)
}
