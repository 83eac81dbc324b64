use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::risk::{lane_region_map, proximity_region_map, Criterion, RegionGeometry, RegionMap, SUBREGIONS};

/// Symmetric 25x25 cost table between sub-regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundDistanceMatrix {
    pub criterion: Criterion,
    pub cross_region_factor: f64,
    d: Vec<f64>,
}

impl GroundDistanceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * SUBREGIONS + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// Wrap an explicit cost table; it must be square, symmetric,
    /// nonnegative with a zero diagonal.
    pub fn from_costs(criterion: Criterion, cross_region_factor: f64, d: Vec<f64>) -> Result<Self> {
        if d.len() != SUBREGIONS * SUBREGIONS {
            return Err(Error::InvalidInput(format!("expected {} costs, got {}", SUBREGIONS * SUBREGIONS, d.len())));
        }
        for i in 0..SUBREGIONS {
            if d[i * SUBREGIONS + i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in 0..SUBREGIONS {
                let v = d[i * SUBREGIONS + j];
                if !(v.is_finite() && v >= 0.0) || v != d[j * SUBREGIONS + i] {
                    return Err(Error::InvalidInput(format!("bad cost at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            criterion,
            cross_region_factor,
            d,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            d: self.d.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Plain whitespace-separated table, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..SUBREGIONS {
            let row: Vec<String> = (0..SUBREGIONS).map(|j| format!("{:.6}", self.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

/// Distance between sub-region centroids, allowing either `c_j` or its
/// reflection across the vertical centerline, relative to the diagonal.
pub fn base_distance(map: &RegionMap, i: usize, j: usize) -> f64 {
    let (w, h) = map.dims();
    let diag = (w as f64).hypot(h as f64);
    let ci = map.centroid(i);
    let cj = map.centroid(j);
    let mirrored = Point::new(w as f64 - cj.x, cj.y);
    ci.dist(cj).min(ci.dist(mirrored)) / diag
}

/// Whether `i` and `j` fall in different risk zones: different colors for
/// the lane criterion, different annuli for the proximity criterion.
pub fn crosses_region(map: &RegionMap, i: usize, j: usize) -> bool {
    match map.criterion {
        Criterion::Lane => map.color(i) != map.color(j),
        Criterion::Proximity => RegionMap::region(i) != RegionMap::region(j),
    }
}

pub fn build_distance_matrix(map: &RegionMap, factor: f64) -> Result<GroundDistanceMatrix> {
    if !(factor > 1.0 && factor.is_finite()) {
        return Err(Error::Config(format!("cross-region factor must be > 1, got {factor}")));
    }
    let mut d = vec![0.0; SUBREGIONS * SUBREGIONS];
    for i in 0..SUBREGIONS {
        for j in (i + 1)..SUBREGIONS {
            // Symmetrize: the mirror term is not symmetric on its own when
            // a map is slightly asymmetric.
            let base = base_distance(map, i, j).min(base_distance(map, j, i));
            let v = if crosses_region(map, i, j) { factor * base } else { base };
            d[i * SUBREGIONS + j] = v;
            d[j * SUBREGIONS + i] = v;
        }
    }
    Ok(GroundDistanceMatrix {
        criterion: map.criterion,
        cross_region_factor: factor,
        d,
    })
}

/// Region map used to define ground distances: lane regions are laid out
/// with the FOE at the image center, so descriptors from frames with
/// different FOEs share one cost table.
pub fn canonical_map(criterion: Criterion, dims: (usize, usize), geometry: &RegionGeometry) -> RegionMap {
    match criterion {
        Criterion::Lane => {
            let center = Point::new(dims.0 as f64 / 2.0, dims.1 as f64 / 2.0);
            lane_region_map(center, dims, geometry)
        }
        Criterion::Proximity => proximity_region_map(dims, geometry),
    }
}
