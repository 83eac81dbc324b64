use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::Rect;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectClass {
    Person,
    Bicycle,
    Car,
    Bus,
    Motorcycle,
    /// Any other detector label; ignored by the descriptor.
    Other(String),
}

impl ObjectClass {
    pub fn as_str(&self) -> &str {
        match self {
            ObjectClass::Person => "person",
            ObjectClass::Bicycle => "bicycle",
            ObjectClass::Car => "car",
            ObjectClass::Bus => "bus",
            ObjectClass::Motorcycle => "motorcycle",
            ObjectClass::Other(s) => s,
        }
    }

    pub fn is_motorized(&self) -> bool {
        matches!(self, ObjectClass::Car | ObjectClass::Bus | ObjectClass::Motorcycle)
    }
}

impl From<&str> for ObjectClass {
    fn from(s: &str) -> Self {
        match s {
            "person" => ObjectClass::Person,
            "bicycle" => ObjectClass::Bicycle,
            "car" => ObjectClass::Car,
            "bus" => ObjectClass::Bus,
            "motorcycle" => ObjectClass::Motorcycle,
            other => ObjectClass::Other(other.to_string()),
        }
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ObjectClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ObjectClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(ObjectClass::from(s.as_str()))
    }
}

/// Bounding box `[x, y, w, h]` in pixels, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(a: [f64; 4]) -> Self {
        BBox { x: a[0], y: a[1], w: a[2], h: a[3] }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl From<BBox> for Rect {
    fn from(b: BBox) -> Self {
        Rect::new(b.x, b.y, b.w, b.h)
    }
}

/// One detector output for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub frame: u64,
    pub class: ObjectClass,
    pub score: f64,
    pub bbox: BBox,
}

impl Detection {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(format!("score {} outside [0, 1]", self.score));
        }
        let b = self.bbox;
        if ![b.x, b.y, b.w, b.h].iter().all(|v| v.is_finite()) || b.w < 0.0 || b.h < 0.0 {
            return Err(format!("invalid bbox {:?}", <[f64; 4]>::from(b)));
        }
        Ok(())
    }
}

/// Ground-contact strip of a detection: full box width, height
/// `max(frac * h, min_height)`, anchored at the bottom of the box after the
/// box is clamped to the frame.
pub fn object_footprint(bbox: BBox, height_frac: f64, min_height: f64, dims: (usize, usize)) -> Rect {
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let b = Rect::from(bbox).clamp_to(w, h);
    let fh = (height_frac * b.h).max(min_height);
    Rect::new(b.x, b.y + b.h - fh, b.w, fh).clamp_to(w, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footprint_heights() {
        let fp = object_footprint(BBox::from([10.0, 10.0, 40.0, 100.0]), 0.2, 10.0, (480, 360));
        assert_eq!(fp, Rect::new(10.0, 90.0, 40.0, 20.0));
        let fp = object_footprint(BBox::from([10.0, 10.0, 40.0, 30.0]), 0.2, 10.0, (480, 360));
        assert_eq!(fp.h, 10.0);
        assert_eq!(fp.y, 30.0);
    }

    #[test]
    fn footprint_clamped_at_frame_bottom() {
        let fp = object_footprint(BBox::from([450.0, 300.0, 60.0, 80.0]), 0.2, 10.0, (480, 360));
        assert_eq!(fp, Rect::new(450.0, 348.0, 30.0, 12.0));
        let fp = object_footprint(BBox::from([100.0, 300.0, 60.0, 60.0]), 0.2, 10.0, (480, 360));
        assert_eq!(fp, Rect::new(100.0, 348.0, 60.0, 12.0));
        assert!(fp.x + fp.w <= 480.0 && fp.y + fp.h <= 360.0);
    }

    #[test]
    fn class_roundtrip() {
        let d: Detection =
            serde_json::from_str(r#"{"frame":3,"class":"truck","score":0.5,"bbox":[1,2,3,4]}"#).unwrap();
        assert_eq!(d.class, ObjectClass::Other("truck".into()));
        assert_eq!(d.bbox, BBox { x: 1.0, y: 2.0, w: 3.0, h: 4.0 });
        assert!(ObjectClass::Bus.is_motorized());
    }
}
