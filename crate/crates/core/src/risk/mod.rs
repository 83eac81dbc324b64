//! Motion-aware risk regions and the 25-bin risk descriptor.

mod descriptor;
mod detection;
mod regions;

pub use descriptor::{occupancy_level, rasterize, risk_descriptor, GammaProfile, RiskDescriptor, RiskParams};
pub use detection::{object_footprint, BBox, Detection, ObjectClass};
pub use regions::{
    lane_region_map, proximity_region_map, Criterion, RegionGeometry, RegionMap, RiskColor, LANE_COLORS,
    PROXIMITY_COLORS, REGIONS, ROWS, SUBREGIONS,
};
