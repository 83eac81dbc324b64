//! Focus-of-expansion estimation from weighted flow observations.

mod huber;
mod smooth;
mod weights;

pub use huber::{
    estimate_foe, huber, huber_irls, line_distance, objective, refine_foe, FoeEstimate, HuberConfig, IrlsOutcome,
    ResidualScale, StopReason,
};
pub use smooth::FoeSmoother;
pub use weights::{
    annulus_index, magnitude_weight, magnitude_weights, object_weights, observations_from_flow, FlowObservation,
    DEFAULT_ANNULUS_RADII,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Point;
use crate::risk::Detection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoeConfig {
    pub huber: HuberConfig,
    pub annulus_radii: [f64; 3],
    /// Number of previous frames in the temporal average.
    pub smooth_m: u64,
    pub smooth_tau: f64,
}

impl Default for FoeConfig {
    fn default() -> Self {
        Self {
            huber: HuberConfig::default(),
            annulus_radii: DEFAULT_ANNULUS_RADII,
            smooth_m: 5,
            smooth_tau: 0.5,
        }
    }
}

/// Weight the observations of one frame and run the refined estimate.
pub fn estimate_frame(
    mut flows: Vec<FlowObservation>,
    detections: &[Detection],
    prev_foe: Point,
    dims: (usize, usize),
    cfg: &FoeConfig,
) -> Result<FoeEstimate> {
    magnitude_weights(&mut flows, prev_foe, dims, &cfg.annulus_radii);
    object_weights(&mut flows, detections);
    refine_foe(&flows, &cfg.huber)
}
