use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::rng;
use crate::error::{Error, Result};
use crate::foe::FlowObservation;
use crate::geom::Point;

/// Flow observations radiating from a known FOE, with outlier flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionScene {
    pub foe: Point,
    pub dims: (usize, usize),
    pub flows: Vec<FlowObservation>,
    pub outlier: Vec<bool>,
}

impl ExpansionScene {
    pub fn outlier_count(&self) -> usize {
        self.outlier.iter().filter(|&&o| o).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub foe: Point,
    pub dims: (usize, usize),
    pub n: usize,
    /// Gaussian noise on inlier flow components, pixels.
    pub noise: f64,
    pub outlier_frac: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            foe: Point::new(240.0, 180.0),
            dims: (480, 360),
            n: 100,
            noise: 0.0,
            outlier_frac: 0.0,
        }
    }
}

/// Points uniform in the frame. Inlier flows are `lambda (p - foe)` plus
/// noise with `lambda` uniform in `[0.05, 0.2]`; outliers keep a flow of
/// the same magnitude law in a uniformly random direction. Exactly
/// `round(n * outlier_frac)` observations are outliers.
pub fn gen_expansion_scene(params: &SceneParams, seed: u64) -> Result<ExpansionScene> {
    let SceneParams { foe, dims, n, noise, outlier_frac } = *params;
    if n < 8 {
        return Err(Error::InvalidInput(format!("a scene needs at least 8 flows, got {n}")));
    }
    if !(0.0..1.0).contains(&outlier_frac) || !(noise >= 0.0) {
        return Err(Error::InvalidInput("outlier_frac must lie in [0, 1) and noise be >= 0".into()));
    }
    let mut rng: ChaCha8Rng = rng(seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let n_out = (n as f64 * outlier_frac).round() as usize;
    let mut outlier = vec![false; n];
    // Partial Fisher-Yates picks exactly n_out outlier slots.
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..n_out {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
        outlier[idx[i]] = true;
    }
    let mut flows = Vec::with_capacity(n);
    for &is_out in &outlier {
        loop {
            let p = Point::new(rng.gen_range(0.0..dims.0 as f64), rng.gen_range(0.0..dims.1 as f64));
            let lambda = rng.gen_range(0.05..=0.2);
            let radial = (p - foe) * lambda;
            let v = if is_out {
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(th.cos(), th.sin()) * radial.norm()
            } else if noise > 0.0 {
                radial + Point::new(normal.sample(&mut rng), normal.sample(&mut rng))
            } else {
                radial
            };
            if v.norm() > 1e-6 {
                if let Some(f) = FlowObservation::new(p, v) {
                    flows.push(f);
                    break;
                }
            }
        }
    }
    Ok(ExpansionScene { foe, dims, flows, outlier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foe::line_distance;

    #[test]
    fn clean_lines_hit_foe() {
        let s = gen_expansion_scene(&SceneParams { foe: Point::new(200.5, 170.25), ..Default::default() }, 1).unwrap();
        for f in &s.flows {
            assert!(line_distance(s.foe, f.p, f.u) < 1e-9);
        }
    }

    #[test]
    fn exact_outlier_count_and_determinism() {
        let p = SceneParams { outlier_frac: 0.3, noise: 1.0, ..Default::default() };
        let a = gen_expansion_scene(&p, 9).unwrap();
        assert_eq!(a.outlier_count(), 30);
        assert_eq!(a.flows.len(), 100);
        let b = gen_expansion_scene(&p, 9).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_ne!(a, gen_expansion_scene(&p, 10).unwrap());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(gen_expansion_scene(&SceneParams { n: 7, ..Default::default() }, 0).is_err());
        assert!(gen_expansion_scene(&SceneParams { outlier_frac: 1.0, ..Default::default() }, 0).is_err());
    }
}
