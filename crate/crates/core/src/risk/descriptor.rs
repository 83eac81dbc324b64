use serde::{Deserialize, Serialize};

use super::detection::{object_footprint, Detection, ObjectClass};
use super::regions::{Criterion, RegionMap, RiskColor, SUBREGIONS};
use crate::error::{Error, Result};
use crate::geom::Rect;

/// Region coefficients: `gamma_k = base[color] * row[row_of(k)]`.
///
/// Lane sub-regions use their slab (bottom first) as the row; proximity
/// sub-regions use their annulus (innermost first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaProfile {
    /// Base value for red, yellow and green.
    pub base: [f64; 3],
    pub row: [f64; 5],
}

impl Default for GammaProfile {
    fn default() -> Self {
        Self {
            base: [1.0, 0.6, 0.3],
            row: [1.0, 0.85, 0.7, 0.55, 0.4],
        }
    }
}

impl GammaProfile {
    pub fn validate(&self) -> Result<()> {
        let in_range = |v: &f64| *v > 0.0 && *v <= 1.0;
        if !self.base.iter().all(in_range) || !self.row.iter().all(in_range) {
            return Err(Error::Config("gamma coefficients must lie in (0, 1]".into()));
        }
        if !(self.base[0] > self.base[1] && self.base[1] > self.base[2]) {
            return Err(Error::Config("gamma base must decrease red > yellow > green".into()));
        }
        if !self.row.windows(2).all(|p| p[0] > p[1]) {
            return Err(Error::Config("gamma row multipliers must strictly decrease".into()));
        }
        Ok(())
    }

    pub fn base_for(&self, color: RiskColor) -> f64 {
        match color {
            RiskColor::Red => self.base[0],
            RiskColor::Yellow => self.base[1],
            RiskColor::Green => self.base[2],
        }
    }

    pub fn gamma(&self, map: &RegionMap, k: usize) -> f64 {
        let row = match map.criterion {
            Criterion::Lane => RegionMap::row(k),
            Criterion::Proximity => RegionMap::region(k),
        };
        self.base_for(map.color(k)) * self.row[row]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskParams {
    pub alpha_motorized: f64,
    pub alpha_bicycle: f64,
    pub alpha_person: f64,
    pub gamma: GammaProfile,
    pub footprint_height_frac: f64,
    pub footprint_min_height: f64,
}

impl Default for RiskParams {
    fn default() -> Self {
        Self {
            alpha_motorized: 1.0,
            alpha_bicycle: 0.8,
            alpha_person: 0.6,
            gamma: GammaProfile::default(),
            footprint_height_frac: 0.2,
            footprint_min_height: 10.0,
        }
    }
}

impl RiskParams {
    /// Object coefficient, `None` for classes the descriptor ignores.
    pub fn alpha(&self, class: &ObjectClass) -> Option<f64> {
        match class {
            ObjectClass::Car | ObjectClass::Bus | ObjectClass::Motorcycle => Some(self.alpha_motorized),
            ObjectClass::Bicycle => Some(self.alpha_bicycle),
            ObjectClass::Person => Some(self.alpha_person),
            ObjectClass::Other(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in [self.alpha_motorized, self.alpha_bicycle, self.alpha_person] {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("alpha {a} outside (0, 1]")));
            }
        }
        if !(self.footprint_height_frac > 0.0) || !(self.footprint_min_height >= 0.0) {
            return Err(Error::Config("invalid footprint parameters".into()));
        }
        self.gamma.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskDescriptor {
    pub frame: u64,
    pub criterion: Criterion,
    pub d: [f64; SUBREGIONS],
    /// Detections skipped because their class carries no coefficient.
    #[serde(default)]
    pub ignored: usize,
}

impl RiskDescriptor {
    pub fn zero(frame: u64, criterion: Criterion) -> Self {
        Self {
            frame,
            criterion,
            d: [0.0; SUBREGIONS],
            ignored: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.d.iter().sum()
    }
}

/// Pixel counts of `rect` per sub-region, counting pixels whose centres lie
/// inside the half-open rectangle.
pub fn rasterize(rect: Rect, map: &RegionMap) -> [f64; SUBREGIONS] {
    let mut counts = [0.0; SUBREGIONS];
    let (w, h) = map.dims();
    let lo = |v: f64, n: usize| ((v - 0.5).ceil().max(0.0) as usize).min(n);
    let (x0, x1) = (lo(rect.x, w), lo(rect.x + rect.w, w));
    let (y0, y1) = (lo(rect.y, h), lo(rect.y + rect.h, h));
    for y in y0..y1 {
        for x in x0..x1 {
            counts[map.subregion_at(x, y)] += 1.0;
        }
    }
    counts
}

/// Accumulate `alpha * score * gamma_k * a_k / b_k` over all detections.
pub fn risk_descriptor(frame: u64, detections: &[Detection], map: &RegionMap, params: &RiskParams) -> RiskDescriptor {
    let mut out = RiskDescriptor::zero(frame, map.criterion);
    for det in detections {
        let Some(alpha) = params.alpha(&det.class) else {
            out.ignored += 1;
            continue;
        };
        let fp = object_footprint(det.bbox, params.footprint_height_frac, params.footprint_min_height, map.dims());
        let counts = rasterize(fp, map);
        for (k, &a) in counts.iter().enumerate() {
            if a > 0.0 {
                out.d[k] += alpha * det.score * params.gamma.gamma(map, k) * a / map.area(k);
            }
        }
    }
    out
}

/// Risk level from region occupancy: 3 when any red sub-region carries
/// mass, 2 when any yellow one does, 1 otherwise.
pub fn occupancy_level(d: &[f64; SUBREGIONS], map: &RegionMap) -> u8 {
    d.iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, _)| map.color(k).level())
        .max()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::risk::regions::{lane_region_map, RegionGeometry, LANE_COLORS};
    use crate::risk::BBox;

    /// Tiny 50x50 map whose sub-region 0 is exactly the block [0,10)x[40,50).
    fn block_map() -> RegionMap {
        let (w, h) = (50, 50);
        let mut assignment = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let inside = x < 10 && y >= 40;
                assignment[y * w + x] = if inside { 0 } else { (1 + (x / 10 + 5 * (y / 10)) % 24) as u8 };
            }
        }
        let colors = std::array::from_fn(|k| LANE_COLORS[k / 5]);
        RegionMap::from_assignment(Criterion::Lane, (w, h), assignment, colors).unwrap()
    }

    fn det(class: ObjectClass, score: f64, bbox: [f64; 4]) -> Detection {
        Detection {
            frame: 0,
            class,
            score,
            bbox: BBox::from(bbox),
        }
    }

    #[test]
    fn empty_is_zero() {
        let map = lane_region_map(Point::new(240.0, 180.0), (480, 360), &RegionGeometry::default());
        let d = risk_descriptor(0, &[], &map, &RiskParams::default());
        assert_eq!(d.d, [0.0; SUBREGIONS]);
        assert_eq!(occupancy_level(&d.d, &map), 1);
    }

    #[test]
    fn footprint_filling_one_subregion() {
        let map = block_map();
        // Box height 50 gives a footprint of height 10 at the bottom.
        let p = RiskParams::default();
        let car = risk_descriptor(0, &[det(ObjectClass::Car, 0.9, [0.0, 0.0, 10.0, 50.0])], &map, &p);
        assert!((car.d[0] - 0.9).abs() < 1e-12);
        assert!(car.d[1..].iter().all(|&v| v == 0.0));
        let person = risk_descriptor(0, &[det(ObjectClass::Person, 0.9, [0.0, 0.0, 10.0, 50.0])], &map, &p);
        assert!((person.d[0] - 0.54).abs() < 1e-12);
        assert!(car.total() > person.total());
    }

    #[test]
    fn unknown_class_counted() {
        let map = block_map();
        let d = risk_descriptor(0, &[det("truck".into(), 0.9, [0.0, 0.0, 10.0, 50.0])], &map, &RiskParams::default());
        assert_eq!(d.total(), 0.0);
        assert_eq!(d.ignored, 1);
    }

    #[test]
    fn gamma_ordering() {
        let g = GammaProfile::default();
        g.validate().unwrap();
        let map = lane_region_map(Point::new(240.0, 180.0), (480, 360), &RegionGeometry::default());
        for row in 0..5 {
            let red = g.gamma(&map, row);
            let yellow = g.gamma(&map, 5 + row);
            let green = g.gamma(&map, 15 + row);
            assert!(red > yellow && yellow > green);
            if row > 0 {
                assert!(g.gamma(&map, row - 1) > red);
            }
        }
    }

    #[test]
    fn rasterize_counts_pixel_centres() {
        let map = block_map();
        let c = rasterize(Rect::new(0.2, 40.0, 9.4, 10.0), &map);
        assert_eq!(c[0], 100.0);
        let c = rasterize(Rect::new(0.6, 40.0, 8.8, 10.0), &map);
        assert_eq!(c[0], 80.0);
    }
}
