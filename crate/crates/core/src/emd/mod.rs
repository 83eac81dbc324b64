//! Earth Mover's Distance between risk descriptors and retrieval-based
//! risk classification.

mod distance;
mod knn;
mod transport;

pub use distance::{base_distance, build_distance_matrix, canonical_map, crosses_region, GroundDistanceMatrix};
pub use knn::{classify_risk, RiskLevel, RiskTrainingSet, TrainItem};
pub use transport::{transport, Transport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::SUBREGIONS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmdConfig {
    pub cross_region_factor: f64,
    pub k: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            cross_region_factor: 2.0,
            k: 5,
        }
    }
}

fn support(a: &[f64; SUBREGIONS]) -> Result<(Vec<usize>, Vec<f64>)> {
    if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput("signature must be finite and nonnegative".into()));
    }
    let total: f64 = a.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let idx: Vec<usize> = (0..SUBREGIONS).filter(|&k| a[k] > 0.0).collect();
    let mass = idx.iter().map(|&k| a[k] / total).collect();
    Ok((idx, mass))
}

/// Optimal transport plan between the unit-mass normalizations of `a` and
/// `b`, in sub-region indices.
pub fn emd_flow(a: &[f64; SUBREGIONS], b: &[f64; SUBREGIONS], dist: &GroundDistanceMatrix) -> Result<Transport> {
    let (ia, ma) = support(a)?;
    let (ib, mb) = support(b)?;
    let mut t = transport(&ma, &mb, &|i, j| dist.get(ia[i], ib[j]))?;
    for f in &mut t.flows {
        f.0 = ia[f.0];
        f.1 = ib[f.1];
    }
    Ok(t)
}

/// EMD between unit-mass normalizations. Arguments are put in a fixed
/// order before solving, so the result is bitwise symmetric.
pub fn emd(a: &[f64; SUBREGIONS], b: &[f64; SUBREGIONS], dist: &GroundDistanceMatrix) -> Result<f64> {
    if a == b {
        support(a)?;
        return Ok(0.0);
    }
    let swap = a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Greater);
    let (lo, hi) = if swap { (b, a) } else { (a, b) };
    Ok(emd_flow(lo, hi, dist)?.cost)
}
