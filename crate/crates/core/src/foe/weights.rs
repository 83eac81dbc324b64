use serde::{Deserialize, Serialize};

use crate::geom::{Point, Rect};
use crate::risk::Detection;
use crate::vision::RawFlowField;

/// One flow vector with its plausibility weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowObservation {
    pub p: Point,
    pub v: Point,
    /// Unit direction of `v`.
    pub u: Point,
    /// Magnitude weight from the annulus test.
    pub m: f64,
    /// Object weight `exp(-score)`.
    pub o: f64,
    /// Combined weight `m * o`.
    pub w: f64,
    pub annulus: u8,
}

impl FlowObservation {
    /// `None` for zero or non-finite flow.
    pub fn new(p: Point, v: Point) -> Option<Self> {
        if !p.is_finite() {
            return None;
        }
        let u = v.normalized()?;
        Some(Self {
            p,
            v,
            u,
            m: 1.0,
            o: 1.0,
            w: 1.0,
            annulus: 0,
        })
    }

    pub fn magnitude(&self) -> f64 {
        self.v.norm()
    }
}

/// Tracked, nonzero entries of a flow field as unit-weight observations.
pub fn observations_from_flow(field: &RawFlowField) -> Vec<FlowObservation> {
    field.tracked().filter_map(|e| FlowObservation::new(e.p, e.v)).collect()
}

/// Magnitude weight for a flow of norm `mag` in a zone with mean norm `mean`.
/// Cases are tested in order, so a deviation equal to the outer bound
/// takes the lowest weight.
pub fn magnitude_weight(mag: f64, mean: f64) -> f64 {
    let dev = (mag - mean).abs();
    if dev >= mean.powf(2.0 / 3.0) {
        0.10
    } else if dev <= mean.sqrt() {
        1.00
    } else {
        0.75
    }
}

/// Default zone radii as fractions of the image diagonal: the innermost
/// circle and the outer radii of the first two annuli. The last annulus is
/// unbounded.
pub const DEFAULT_ANNULUS_RADII: [f64; 3] = [0.15, 0.30, 0.50];

pub fn annulus_index(p: Point, center: Point, radii: &[f64; 3], diag: f64) -> u8 {
    let d = p.dist(center);
    radii.iter().position(|&r| d < r * diag).unwrap_or(3) as u8
}

/// Assign each observation to a zone around `prev_foe` and set its
/// magnitude weight from the zone's mean flow magnitude.
pub fn magnitude_weights(flows: &mut [FlowObservation], prev_foe: Point, dims: (usize, usize), radii: &[f64; 3]) {
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let center = Point::new(prev_foe.x.clamp(0.0, w), prev_foe.y.clamp(0.0, h));
    let diag = w.hypot(h);
    let mut sums = [0.0f64; 4];
    let mut counts = [0usize; 4];
    for f in flows.iter_mut() {
        f.annulus = annulus_index(f.p, center, radii, diag);
        sums[f.annulus as usize] += f.magnitude();
        counts[f.annulus as usize] += 1;
    }
    for f in flows.iter_mut() {
        let z = f.annulus as usize;
        let mean = sums[z] / counts[z] as f64;
        f.m = magnitude_weight(f.magnitude(), mean);
        f.w = f.m * f.o;
    }
}

/// Down-weight observations lying on detected objects by `exp(-s)`, with
/// `s` the highest score among covering boxes.
pub fn object_weights(flows: &mut [FlowObservation], detections: &[Detection]) {
    for f in flows.iter_mut() {
        let s = detections
            .iter()
            .filter(|d| Rect::from(d.bbox).contains(f.p))
            .map(|d| d.score)
            .fold(0.0f64, f64::max);
        f.o = (-s).exp();
        f.w = f.m * f.o;
    }
}
