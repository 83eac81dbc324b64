//! Frame front end: contrast enhancement, corner detection and sparse flow.

mod clahe;
mod corners;
mod frame;
mod lk;

pub use clahe::clahe;
pub use corners::{detect_corners, min_eigen_response, CornerParams, CornerSet};
pub use frame::GrayFrame;
pub use lk::{lk_flow, FlowEntry, LkParams, RawFlowField};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisionConfig {
    pub clahe_grid: (usize, usize),
    pub clip_limit: f64,
    pub corners: CornerParams,
    pub lk: LkParams,
    /// Frame distance between the two frames of one flow computation.
    pub skip: usize,
}

impl Default for VisionConfig {
    fn default() -> Self {
        Self {
            clahe_grid: (4, 4),
            clip_limit: 0.03,
            corners: CornerParams::default(),
            lk: LkParams::default(),
            skip: 5,
        }
    }
}

/// Enhance both frames, detect corners on the first and track them.
pub fn frame_pair_flow(prev: &GrayFrame, next: &GrayFrame, cfg: &VisionConfig) -> Result<RawFlowField> {
    let a = clahe(prev, cfg.clahe_grid, cfg.clip_limit)?;
    let b = clahe(next, cfg.clahe_grid, cfg.clip_limit)?;
    let corners = detect_corners(&a, &cfg.corners);
    lk_flow(&a, &b, &corners, &cfg.lk)
}
