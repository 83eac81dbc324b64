//! Ride directory layout.
//!
//! ```text
//! ride.toml            manifest
//! frames/000000.pgm    one PGM per frame (or frames.raw + frames.dims)
//! detections.ndjson    object detections
//! sensors.csv          smartphone log
//! labels.csv           optional ground-truth mode segments
//! ```

use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::pgm::read_pgm;
use crate::error::{Error, Result};
use crate::vision::GrayFrame;

pub const MANIFEST: &str = "ride.toml";

/// Rider metadata. Carried through, never used by the algorithms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experience: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suspension: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RideManifest {
    pub id: String,
    pub fps: f64,
    /// Sensor-clock time of frame 0, seconds.
    pub video_start: f64,
    #[serde(default = "default_frames")]
    pub frames: String,
    #[serde(default = "default_detections")]
    pub detections: String,
    #[serde(default = "default_sensors")]
    pub sensors: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(default)]
    pub profile: Profile,
}

fn default_frames() -> String {
    "frames".into()
}
fn default_detections() -> String {
    "detections.ndjson".into()
}
fn default_sensors() -> String {
    "sensors.csv".into()
}

impl RideManifest {
    pub fn new(id: impl Into<String>, fps: f64, video_start: f64) -> Self {
        Self {
            id: id.into(),
            fps,
            video_start,
            frames: default_frames(),
            detections: default_detections(),
            sensors: default_sensors(),
            labels: None,
            profile: Profile::default(),
        }
    }

    pub fn frame_time(&self, index: u64) -> f64 {
        self.video_start + index as f64 / self.fps
    }
}

/// Lazily loaded frames of a ride.
#[derive(Debug, Clone)]
pub enum FrameSource {
    Pgm(Vec<PathBuf>),
    Raw { path: PathBuf, width: usize, height: usize, count: usize },
}

impl FrameSource {
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)
                .map_err(|e| Error::io(path, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "pgm"))
                .collect();
            files.sort();
            return Ok(FrameSource::Pgm(files));
        }
        let dims = path.with_extension("dims");
        let text = fs::read_to_string(&dims).map_err(|e| Error::io(&dims, e))?;
        let v: Vec<usize> = text.split_whitespace().filter_map(|s| s.parse().ok()).collect();
        let [width, height] = v[..] else {
            return Err(Error::parse(dims.display().to_string(), 1, "expected `width height`"));
        };
        let len = fs::metadata(path).map_err(|e| Error::io(path, e))?.len() as usize;
        if width == 0 || height == 0 || !len.is_multiple_of(width * height) {
            return Err(Error::parse(path.display().to_string(), 1, "size is not a whole number of frames"));
        }
        Ok(FrameSource::Raw {
            path: path.to_path_buf(),
            width,
            height,
            count: len / (width * height),
        })
    }

    pub fn len(&self) -> usize {
        match self {
            FrameSource::Pgm(v) => v.len(),
            FrameSource::Raw { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn load(&self, index: usize) -> Result<GrayFrame> {
        if index >= self.len() {
            return Err(Error::InvalidInput(format!("frame {index} out of range ({} frames)", self.len())));
        }
        let frame = match self {
            FrameSource::Pgm(v) => read_pgm(&v[index])?,
            FrameSource::Raw { path, width, height, .. } => {
                let n = width * height;
                let mut buf = vec![0u8; n];
                let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
                f.seek(SeekFrom::Start((index * n) as u64)).map_err(|e| Error::io(path, e))?;
                f.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
                GrayFrame::new(*width, *height, buf)?
            }
        };
        Ok(frame.with_meta(index as u64, 0.0))
    }
}

/// An opened ride directory.
#[derive(Debug, Clone)]
pub struct RideRecording {
    pub dir: PathBuf,
    pub manifest: RideManifest,
    pub frames: FrameSource,
}

impl RideRecording {
    pub fn open(dir: &Path) -> Result<Self> {
        let mpath = dir.join(MANIFEST);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: RideManifest =
            toml::from_str(&text).map_err(|e| Error::parse(mpath.display().to_string(), toml_line(&text, &e), e.message()))?;
        if !(manifest.fps > 0.0) || !manifest.video_start.is_finite() {
            return Err(Error::parse(mpath.display().to_string(), 1, "fps must be positive and video_start finite"));
        }
        for f in [&manifest.detections, &manifest.sensors].into_iter().chain(manifest.labels.as_ref()) {
            let p = dir.join(f);
            if !p.is_file() {
                return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "missing ride file")));
            }
        }
        let frames = FrameSource::open(&dir.join(&manifest.frames))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            frames,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn frame_time(&self, index: u64) -> f64 {
        self.manifest.frame_time(index)
    }
}

pub(crate) fn toml_line(text: &str, e: &toml::de::Error) -> usize {
    e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1)
}

pub fn write_manifest(dir: &Path, manifest: &RideManifest) -> Result<()> {
    let path = dir.join(MANIFEST);
    let text = toml::to_string(manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let mut m = RideManifest::new("r1", 30.0, 12.5);
        m.profile.age = Some(34);
        let text = toml::to_string(&m).unwrap();
        let back: RideManifest = toml::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.frame_time(30), 13.5);
    }
}
