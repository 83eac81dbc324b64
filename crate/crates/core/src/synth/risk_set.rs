use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rng;
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::io::DescriptorRecord;
use crate::risk::{
    occupancy_level, risk_descriptor, BBox, Criterion, Detection, ObjectClass, RegionGeometry, RegionMap, RiskParams,
};

const CLASSES: [&str; 5] = ["car", "bus", "motorcycle", "bicycle", "person"];

/// Detections of one frame whose level follows the occupancy rule by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskScene {
    pub foe: Point,
    pub detections: Vec<Detection>,
    pub level: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSceneParams {
    pub dims: (usize, usize),
    /// Lane FOE offset from the image centre, as a fraction of each side.
    pub foe_jitter: f64,
    /// Extra objects beside the one that fixes the level.
    pub max_extra: usize,
}

impl Default for RiskSceneParams {
    fn default() -> Self {
        Self {
            dims: (480, 360),
            foe_jitter: 0.05,
            max_extra: 2,
        }
    }
}

fn random_detection(rng: &mut ChaCha8Rng, frame: u64, bottom: (f64, f64), dims: (usize, usize)) -> Detection {
    let h = rng.gen_range(30.0..160.0);
    let w = rng.gen_range(15.0..100.0_f64).min(dims.0 as f64);
    let x = (bottom.0 - 0.5 * w).clamp(0.0, dims.0 as f64 - w);
    let y = (bottom.1 - h).max(0.0);
    Detection {
        frame,
        class: ObjectClass::from(*CLASSES.choose(rng).expect("nonempty")),
        score: rng.gen_range(0.5..=1.0),
        bbox: BBox {
            x,
            y,
            w,
            h: (bottom.1 - y).max(1.0),
        },
    }
}

/// A pixel whose sub-region colour satisfies `accept`, plus one so the
/// footprint bottom edge covers it.
fn pixel_where(rng: &mut ChaCha8Rng, map: &RegionMap, accept: impl Fn(u8) -> bool) -> (f64, f64) {
    let (w, h) = map.dims();
    loop {
        let (x, y) = (rng.gen_range(0..w), rng.gen_range(0..h));
        if accept(map.color(map.subregion_at(x, y)).level()) {
            return (x as f64 + 0.5, (y + 1) as f64);
        }
    }
}

/// One frame at the requested level: an object standing in a sub-region of
/// the matching colour plus up to `max_extra` objects in colours of equal
/// or lower risk. Draws are rejected until the occupancy rule yields
/// `level`.
pub fn gen_risk_scene(
    criterion: Criterion,
    level: u8,
    frame: u64,
    params: &RiskSceneParams,
    geometry: &RegionGeometry,
    risk: &RiskParams,
    rng: &mut ChaCha8Rng,
) -> Result<(RiskScene, DescriptorRecord)> {
    if !(1..=3).contains(&level) {
        return Err(Error::InvalidInput(format!("risk level {level} outside 1..=3")));
    }
    let (w, h) = (params.dims.0 as f64, params.dims.1 as f64);
    for _ in 0..10_000 {
        let j = params.foe_jitter;
        let foe = Point::new(w * (0.5 + rng.gen_range(-j..=j)), h * (0.5 + rng.gen_range(-j..=j)));
        let map = RegionMap::build(criterion, foe, params.dims, geometry);
        let at = pixel_where(rng, &map, |l| l == level);
        let mut dets = vec![random_detection(rng, frame, at, params.dims)];
        for _ in 0..rng.gen_range(0..=params.max_extra) {
            let at = pixel_where(rng, &map, |l| l <= level);
            dets.push(random_detection(rng, frame, at, params.dims));
        }
        let descriptor = risk_descriptor(frame, &dets, &map, risk);
        if descriptor.total() > 0.0 && occupancy_level(&descriptor.d, &map) == level {
            let scene = RiskScene {
                foe,
                detections: dets,
                level,
            };
            return Ok((
                scene,
                DescriptorRecord {
                    descriptor,
                    level: Some(level),
                },
            ));
        }
    }
    Err(Error::InvalidInput(format!("could not place a level-{level} scene in this geometry")))
}

/// `per_level` labelled descriptors for each level, interleaved 1, 2, 3.
pub fn gen_risk_set(
    criterion: Criterion,
    per_level: usize,
    params: &RiskSceneParams,
    geometry: &RegionGeometry,
    risk: &RiskParams,
    seed: u64,
) -> Result<Vec<DescriptorRecord>> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(3 * per_level);
    for i in 0..per_level {
        for level in 1..=3u8 {
            let frame = (3 * i + level as usize - 1) as u64;
            out.push(gen_risk_scene(criterion, level, frame, params, geometry, risk, &mut rng)?.1);
        }
    }
    Ok(out)
}
