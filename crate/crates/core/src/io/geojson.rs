//! Ride report as a GeoJSON FeatureCollection of LineString segments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::behavior::Mode;
use crate::error::{Error, Result};

/// One mode-homogeneous stretch of a ride.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSegment {
    pub start: f64,
    pub end: f64,
    pub mode: Mode,
    /// `[lon, lat]` positions, at least two.
    pub coordinates: Vec<[f64; 2]>,
    /// Analyzed frames per risk level 1..=3.
    pub risk: [usize; 3],
}

impl ReportSegment {
    pub fn analyzed_frames(&self) -> usize {
        self.risk.iter().sum()
    }

    /// Most frequent level, ties to the higher one; `None` when no frame
    /// in the segment was analyzed.
    pub fn dominant_risk(&self) -> Option<u8> {
        let best = (0..3).max_by_key(|&i| self.risk[i])?;
        (self.risk[best] > 0).then_some(best as u8 + 1)
    }
}

pub fn report_value(segments: &[ReportSegment]) -> Result<Value> {
    let mut features = Vec::with_capacity(segments.len());
    for s in segments {
        if s.coordinates.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "segment at {} s has {} positions, a LineString needs 2",
                s.start,
                s.coordinates.len()
            )));
        }
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": s.coordinates },
            "properties": {
                "start": s.start,
                "end": s.end,
                "mode": s.mode,
                "risk": {
                    "histogram": s.risk,
                    "dominant": s.dominant_risk(),
                    "frames": s.analyzed_frames(),
                },
            },
        }));
    }
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

/// Pretty-printed with sorted keys and a trailing newline.
pub fn format_report(segments: &[ReportSegment]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&report_value(segments)?).expect("json value serializes");
    s.push('\n');
    Ok(s)
}

fn field<'a>(v: &'a Value, path: &[&str], name: &str) -> Result<&'a Value> {
    let mut cur = v;
    for p in path {
        cur = cur
            .get(p)
            .ok_or_else(|| Error::parse(name, 1, format!("missing `{}`", path.join("."))))?;
    }
    Ok(cur)
}

pub fn parse_report(text: &str, name: &str) -> Result<Vec<ReportSegment>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse(name, e.line(), e.to_string()))?;
    if field(&v, &["type"], name)? != "FeatureCollection" {
        return Err(Error::parse(name, 1, "not a FeatureCollection"));
    }
    let feats = field(&v, &["features"], name)?
        .as_array()
        .ok_or_else(|| Error::parse(name, 1, "`features` is not an array"))?;
    let mut out = Vec::with_capacity(feats.len());
    for f in feats {
        if field(f, &["geometry", "type"], name)? != "LineString" {
            return Err(Error::parse(name, 1, "segment geometry must be a LineString"));
        }
        let de = |path: &[&str]| -> Result<Value> { Ok(field(f, path, name)?.clone()) };
        let bad = |e: serde_json::Error| Error::parse(name, 1, e.to_string());
        out.push(ReportSegment {
            start: serde_json::from_value(de(&["properties", "start"])?).map_err(bad)?,
            end: serde_json::from_value(de(&["properties", "end"])?).map_err(bad)?,
            mode: serde_json::from_value(de(&["properties", "mode"])?).map_err(bad)?,
            coordinates: serde_json::from_value(de(&["geometry", "coordinates"])?).map_err(bad)?,
            risk: serde_json::from_value(de(&["properties", "risk", "histogram"])?).map_err(bad)?,
        });
    }
    Ok(out)
}

pub fn write_report(path: &Path, segments: &[ReportSegment]) -> Result<()> {
    fs::write(path, format_report(segments)?).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: &Path) -> Result<Vec<ReportSegment>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(mode: Mode, risk: [usize; 3]) -> ReportSegment {
        ReportSegment {
            start: 10.0,
            end: 40.5,
            mode,
            coordinates: vec![[-8.61, 41.15], [-8.6095, 41.1503]],
            risk,
        }
    }

    #[test]
    fn roundtrip_and_dominant() {
        let segs = vec![seg(Mode::Bike, [3, 5, 5]), seg(Mode::Walk, [0, 0, 0])];
        assert_eq!(segs[0].dominant_risk(), Some(3));
        assert_eq!(segs[1].dominant_risk(), None);
        let text = format_report(&segs).unwrap();
        let back = parse_report(&text, "m").unwrap();
        assert_eq!(back, segs);
        assert_eq!(format_report(&back).unwrap(), text);
    }

    #[test]
    fn short_line_rejected() {
        let mut s = seg(Mode::Bike, [1, 0, 0]);
        s.coordinates.truncate(1);
        assert!(format_report(&[s]).is_err());
    }
}
