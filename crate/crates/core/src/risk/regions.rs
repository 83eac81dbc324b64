//! Partition of the image into 25 risk sub-regions.
//!
//! Sub-regions are numbered region-major with the bottom row first:
//! `k = region * 5 + row`. Lane regions are ordered red, yellow-left,
//! yellow-right, green-left, green-right. Proximity regions are the five
//! semicircular annuli from the innermost outwards, each split into five
//! angular sectors numbered left to right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

pub const SUBREGIONS: usize = 25;
pub const REGIONS: usize = 5;
pub const ROWS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Lane,
    Proximity,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Lane => "lane",
            Criterion::Proximity => "proximity",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lane" => Ok(Criterion::Lane),
            "proximity" => Ok(Criterion::Proximity),
            other => Err(Error::Config(format!("unknown criterion {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskColor {
    Red,
    Yellow,
    Green,
}

impl RiskColor {
    /// Risk level signalled by occupancy of this color.
    pub fn level(self) -> u8 {
        match self {
            RiskColor::Red => 3,
            RiskColor::Yellow => 2,
            RiskColor::Green => 1,
        }
    }
}

/// Fractions shaping the lane and proximity geometries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionGeometry {
    /// Width of the red wedge base, as a fraction of the image width.
    pub red_base: f64,
    /// Width of the red plus yellow wedge base.
    pub yellow_base: f64,
    /// Outer radii of the four bounded proximity annuli, times image height.
    pub proximity_radii: [f64; 4],
}

impl Default for RegionGeometry {
    fn default() -> Self {
        Self {
            red_base: 0.4,
            yellow_base: 0.8,
            proximity_radii: [0.25, 0.45, 0.65, 0.85],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub criterion: Criterion,
    pub width: usize,
    pub height: usize,
    assignment: Vec<u8>,
    colors: [RiskColor; SUBREGIONS],
    areas: [f64; SUBREGIONS],
    centroids: [Point; SUBREGIONS],
}

pub const LANE_COLORS: [RiskColor; REGIONS] = [
    RiskColor::Red,
    RiskColor::Yellow,
    RiskColor::Yellow,
    RiskColor::Green,
    RiskColor::Green,
];

pub const PROXIMITY_COLORS: [RiskColor; REGIONS] = [
    RiskColor::Red,
    RiskColor::Yellow,
    RiskColor::Yellow,
    RiskColor::Green,
    RiskColor::Green,
];

impl RegionMap {
    /// Build a map from an explicit per-pixel sub-region assignment.
    pub fn from_assignment(
        criterion: Criterion,
        dims: (usize, usize),
        assignment: Vec<u8>,
        colors: [RiskColor; SUBREGIONS],
    ) -> Result<Self> {
        let (w, h) = dims;
        if assignment.len() != w * h {
            return Err(Error::InvalidInput("assignment size does not match dims".into()));
        }
        if assignment.iter().any(|&k| k as usize >= SUBREGIONS) {
            return Err(Error::InvalidInput("sub-region id out of range".into()));
        }
        let mut count = [0u64; SUBREGIONS];
        let mut sx = [0u64; SUBREGIONS];
        let mut sy = [0u64; SUBREGIONS];
        for y in 0..h {
            for x in 0..w {
                let k = assignment[y * w + x] as usize;
                count[k] += 1;
                sx[k] += x as u64;
                sy[k] += y as u64;
            }
        }
        let mut areas = [0.0; SUBREGIONS];
        let mut centroids = [Point::default(); SUBREGIONS];
        for k in 0..SUBREGIONS {
            areas[k] = count[k] as f64;
            if count[k] > 0 {
                centroids[k] = Point::new(
                    sx[k] as f64 / count[k] as f64 + 0.5,
                    sy[k] as f64 / count[k] as f64 + 0.5,
                );
            }
        }
        Ok(Self {
            criterion,
            width: w,
            height: h,
            assignment,
            colors,
            areas,
            centroids,
        })
    }

    #[inline]
    pub fn subregion_at(&self, x: usize, y: usize) -> usize {
        self.assignment[y * self.width + x] as usize
    }

    pub fn color(&self, k: usize) -> RiskColor {
        self.colors[k]
    }

    pub fn colors(&self) -> &[RiskColor; SUBREGIONS] {
        &self.colors
    }

    /// Region (lane zone or proximity annulus) of sub-region `k`.
    pub fn region(k: usize) -> usize {
        k / ROWS
    }

    /// Row within the region, 0 = bottom (lane) or leftmost sector (proximity).
    pub fn row(k: usize) -> usize {
        k % ROWS
    }

    pub fn area(&self, k: usize) -> f64 {
        self.areas[k]
    }

    pub fn areas(&self) -> &[f64; SUBREGIONS] {
        &self.areas
    }

    pub fn centroid(&self, k: usize) -> Point {
        self.centroids[k]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Sub-region mirrored across the vertical centerline.
    pub fn mirror(&self, k: usize) -> usize {
        let (region, row) = (Self::region(k), Self::row(k));
        match self.criterion {
            Criterion::Lane => {
                let mirrored = match region {
                    1 => 2,
                    2 => 1,
                    3 => 4,
                    4 => 3,
                    r => r,
                };
                mirrored * ROWS + row
            }
            Criterion::Proximity => region * ROWS + (ROWS - 1 - row),
        }
    }

    pub fn build(criterion: Criterion, foe: Point, dims: (usize, usize), geometry: &RegionGeometry) -> RegionMap {
        match criterion {
            Criterion::Lane => lane_region_map(foe, dims, geometry),
            Criterion::Proximity => proximity_region_map(dims, geometry),
        }
    }
}

fn subregion_colors(region_colors: &[RiskColor; REGIONS]) -> [RiskColor; SUBREGIONS] {
    std::array::from_fn(|k| region_colors[k / ROWS])
}

/// Lane-occupation partition around the focus of expansion.
///
/// The red wedge has its apex at the FOE and a base of `red_base * width`
/// centred under it on the bottom edge; the yellow wedges extend the base
/// to `yellow_base * width`; the rest is green, split by the vertical
/// through the FOE. Five horizontal slabs between the FOE row and the
/// bottom edge give the rows; everything above the FOE joins the top row.
pub fn lane_region_map(foe: Point, dims: (usize, usize), geometry: &RegionGeometry) -> RegionMap {
    let (w, h) = dims;
    let (wf, hf) = (w as f64, h as f64);
    let fx = foe.x.clamp(0.0, wf);
    let fy = foe.y.clamp(0.0, hf);
    let span = hf - fy;
    let red_half = 0.5 * geometry.red_base * wf;
    let yellow_half = 0.5 * geometry.yellow_base * wf;

    let mut assignment = Vec::with_capacity(w * h);
    for y in 0..h {
        let py = y as f64 + 0.5;
        let (t, row) = if py > fy && span > 0.0 {
            let t = (py - fy) / span;
            // Slab 0 is the bottom fifth.
            let from_top = ((t * ROWS as f64).floor() as usize).min(ROWS - 1);
            (t, ROWS - 1 - from_top)
        } else {
            (0.0, ROWS - 1)
        };
        for x in 0..w {
            let dx = x as f64 + 0.5 - fx;
            let left = dx < 0.0;
            let region = if t > 0.0 && dx.abs() <= red_half * t {
                0
            } else if t > 0.0 && dx.abs() <= yellow_half * t {
                if left {
                    1
                } else {
                    2
                }
            } else if left {
                3
            } else {
                4
            };
            assignment.push((region * ROWS + row) as u8);
        }
    }
    RegionMap::from_assignment(Criterion::Lane, dims, assignment, subregion_colors(&LANE_COLORS))
        .expect("assignment built for dims")
}

/// Proximity partition: semicircular annuli centred at the bottom-centre
/// of the image, each split into five equal angular sectors.
pub fn proximity_region_map(dims: (usize, usize), geometry: &RegionGeometry) -> RegionMap {
    let (w, h) = dims;
    let (wf, hf) = (w as f64, h as f64);
    let center = Point::new(wf / 2.0, hf);
    let radii = geometry.proximity_radii.map(|r| r * hf);
    let sector_width = std::f64::consts::PI / ROWS as f64;
    let mut assignment = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let d = Point::new(x as f64 + 0.5, y as f64 + 0.5) - center;
            let r = d.norm();
            let annulus = radii.iter().position(|&ro| r < ro).unwrap_or(REGIONS - 1);
            // Angle measured from the left horizon, in [0, pi].
            let theta = (-d.y).atan2(-d.x).clamp(0.0, std::f64::consts::PI);
            let sector = ((theta / sector_width).floor() as usize).min(ROWS - 1);
            assignment.push((annulus * ROWS + sector) as u8);
        }
    }
    RegionMap::from_assignment(Criterion::Proximity, dims, assignment, subregion_colors(&PROXIMITY_COLORS))
        .expect("assignment built for dims")
}
