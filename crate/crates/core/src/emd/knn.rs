use serde::{Deserialize, Serialize};

use super::distance::GroundDistanceMatrix;
use super::emd;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::risk::{Criterion, SUBREGIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainItem {
    pub d: [f64; SUBREGIONS],
    pub level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTrainingSet {
    pub criterion: Criterion,
    pub items: Vec<TrainItem>,
}

impl RiskTrainingSet {
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::DegenerateTraining("risk training set is empty".into()));
        }
        for (n, item) in self.items.iter().enumerate() {
            if !(1..=3).contains(&item.level) {
                return Err(Error::InvalidInput(format!("item {n}: level {} outside 1..=3", item.level)));
            }
            if item.d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput(format!("item {n}: descriptor must be finite and nonnegative")));
            }
        }
        Ok(())
    }

    /// Items with positive mass, the only ones usable as neighbours.
    pub fn usable(&self) -> impl Iterator<Item = (usize, &TrainItem)> {
        self.items.iter().enumerate().filter(|(_, it)| it.d.iter().sum::<f64>() > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskLevel {
    pub level: u8,
    /// Distances to the retrieved neighbours, ascending.
    pub neighbor_distances: Vec<f64>,
    /// Votes for levels 1, 2 and 3.
    pub vote_counts: [usize; 3],
}

/// k-nearest-neighbour vote under EMD. A zero descriptor is level 1.
/// Ties in the vote go to the smaller summed neighbour distance, then to
/// the lower level.
pub fn classify_risk(
    d: &[f64; SUBREGIONS],
    train: &RiskTrainingSet,
    dist: &GroundDistanceMatrix,
    k: usize,
    exec: Execution,
) -> Result<RiskLevel> {
    if k == 0 {
        return Err(Error::Config("k must be >= 1".into()));
    }
    if d.iter().sum::<f64>() <= 0.0 {
        return Ok(RiskLevel {
            level: 1,
            neighbor_distances: Vec::new(),
            vote_counts: [0; 3],
        });
    }
    let usable: Vec<(usize, &TrainItem)> = train.usable().collect();
    if usable.is_empty() {
        return Err(Error::DegenerateTraining("no training item has positive mass".into()));
    }
    let dists = exec::map(exec, &usable, |(_, item)| emd(d, &item.d, dist));
    let mut scored = Vec::with_capacity(usable.len());
    for ((idx, item), r) in usable.iter().zip(dists) {
        scored.push((r?, *idx, item.level));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);

    let mut votes = [0usize; 3];
    let mut sums = [0.0f64; 3];
    for &(dd, _, level) in &scored {
        votes[level as usize - 1] += 1;
        sums[level as usize - 1] += dd;
    }
    let mut best = 0;
    for l in 1..3 {
        if votes[l] > votes[best] || (votes[l] == votes[best] && sums[l] < sums[best]) {
            best = l;
        }
    }
    Ok(RiskLevel {
        level: best as u8 + 1,
        neighbor_distances: scored.iter().map(|s| s.0).collect(),
        vote_counts: votes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::{build_distance_matrix, canonical_map};
    use crate::risk::RegionGeometry;

    fn setup() -> GroundDistanceMatrix {
        let map = canonical_map(Criterion::Lane, (480, 360), &RegionGeometry::default());
        build_distance_matrix(&map, 2.0).unwrap()
    }

    fn unit(k: usize, v: f64) -> [f64; SUBREGIONS] {
        let mut d = [0.0; SUBREGIONS];
        d[k] = v;
        d
    }

    #[test]
    fn zero_descriptor_is_level_one() {
        let set = RiskTrainingSet {
            criterion: Criterion::Lane,
            items: vec![TrainItem { d: unit(0, 1.0), level: 3 }],
        };
        let r = classify_risk(&[0.0; SUBREGIONS], &set, &setup(), 5, Execution::Sequential).unwrap();
        assert_eq!(r.level, 1);
    }

    #[test]
    fn exact_match_with_k1() {
        let set = RiskTrainingSet {
            criterion: Criterion::Lane,
            items: vec![
                TrainItem { d: unit(0, 0.3), level: 3 },
                TrainItem { d: unit(7, 0.5), level: 2 },
                TrainItem { d: unit(18, 0.2), level: 1 },
            ],
        };
        let r = classify_risk(&unit(7, 0.5), &set, &setup(), 1, Execution::Sequential).unwrap();
        assert_eq!(r.level, 2);
        assert_eq!(r.neighbor_distances, vec![0.0]);
    }

    #[test]
    fn tie_goes_to_closer_then_lower() {
        let dist = setup();
        // One neighbour per level at k = 2: level 3 is at distance 0.
        let set = RiskTrainingSet {
            criterion: Criterion::Lane,
            items: vec![
                TrainItem { d: unit(2, 1.0), level: 3 },
                TrainItem { d: unit(16, 1.0), level: 1 },
            ],
        };
        let r = classify_risk(&unit(2, 1.0), &set, &dist, 2, Execution::Sequential).unwrap();
        assert_eq!(r.vote_counts, [1, 0, 1]);
        assert_eq!(r.level, 3);
        // Equal distances: lower level wins.
        let set = RiskTrainingSet {
            criterion: Criterion::Lane,
            items: vec![
                TrainItem { d: unit(2, 1.0), level: 3 },
                TrainItem { d: unit(2, 2.0), level: 1 },
            ],
        };
        let r = classify_risk(&unit(2, 1.0), &set, &dist, 2, Execution::Sequential).unwrap();
        assert_eq!(r.level, 1);
    }

    #[test]
    fn zero_mass_items_skipped() {
        let set = RiskTrainingSet {
            criterion: Criterion::Lane,
            items: vec![
                TrainItem { d: [0.0; SUBREGIONS], level: 3 },
                TrainItem { d: unit(20, 1.0), level: 1 },
            ],
        };
        let r = classify_risk(&unit(0, 1.0), &set, &setup(), 1, Execution::Parallel).unwrap();
        assert_eq!(r.level, 1);
    }
}
