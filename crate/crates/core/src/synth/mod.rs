//! Seeded generators with known ground truth.

mod dataset;
mod ride;
mod risk_set;
mod scene;
mod video;

pub use dataset::{write_ride_dir, VideoSpec};
pub use ride::{gen_ride, gen_schedule, SyntheticRide};
pub use risk_set::{gen_risk_scene, gen_risk_set, RiskScene, RiskSceneParams};
pub use scene::{gen_expansion_scene, ExpansionScene, SceneParams};
pub use video::{script_detections, TunnelSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
