//! Robust closest point to a bundle of weighted lines.
//!
//! Each observation defines the line `p + t u`. The estimate minimizes
//! `sum_i huber(s_i * dist(x, L_i))` by iteratively reweighted least squares,
//! where `s_i` is `w_i` or `1 / w_i` depending on [`ResidualScale`]. Every
//! step solves the 2x2 system `sum c_i P_i x = sum c_i P_i p_i` with
//! `P_i = I - u_i u_i^T` and `c_i = s_i^2 * psi(r_i) / r_i` for the scaled
//! residual `r_i`.

use serde::{Deserialize, Serialize};

use super::weights::FlowObservation;
use crate::error::{Error, Result};
use crate::geom::{Point, Sym2};

/// How the combined weight scales a line distance before the Huber loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualScale {
    /// `w * dist`: low-weight flows pull less.
    #[default]
    Multiply,
    /// `dist / w`: low-weight flows are penalized harder.
    Divide,
}

impl ResidualScale {
    #[inline]
    pub fn factor(self, w: f64) -> f64 {
        match self {
            ResidualScale::Multiply => w,
            ResidualScale::Divide => 1.0 / w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HuberConfig {
    pub delta: f64,
    pub scale: ResidualScale,
    pub max_refine_iters: usize,
    /// Refinement stops once consecutive estimates move less than this (px).
    pub tol: f64,
    /// Maximum angle between a flow and the radial direction, degrees.
    pub angle_thresh: f64,
    pub min_flows: usize,
    pub max_irls_iters: usize,
    /// IRLS stops once a step moves less than this (px).
    pub irls_tol: f64,
    /// Largest accepted condition number of the normal matrix.
    pub max_condition: f64,
}

impl Default for HuberConfig {
    fn default() -> Self {
        Self {
            delta: 1.0,
            scale: ResidualScale::Multiply,
            max_refine_iters: 10,
            tol: 1.0,
            angle_thresh: 30.0,
            min_flows: 8,
            max_irls_iters: 50,
            irls_tol: 1e-9,
            max_condition: 1e8,
        }
    }
}

impl HuberConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::Config(format!("huber delta must be > 0, got {}", self.delta)));
        }
        if !(self.tol > 0.0) || !(self.irls_tol > 0.0) {
            return Err(Error::Config("FOE tolerances must be > 0".into()));
        }
        if !(self.angle_thresh > 0.0 && self.angle_thresh <= 90.0) {
            return Err(Error::Config(format!("angle threshold {} outside (0, 90]", self.angle_thresh)));
        }
        Ok(())
    }
}

pub fn huber(a: f64, delta: f64) -> f64 {
    let a = a.abs();
    if a <= delta {
        0.5 * a * a
    } else {
        delta * (a - 0.5 * delta)
    }
}

/// Perpendicular distance from `x` to the line through `p` along unit `u`.
pub fn line_distance(x: Point, p: Point, u: Point) -> f64 {
    let d = x - p;
    (d.x * u.y - d.y * u.x).abs()
}

pub fn objective(x: Point, flows: &[FlowObservation], cfg: &HuberConfig) -> f64 {
    flows
        .iter()
        .map(|f| huber(cfg.scale.factor(f.w) * line_distance(x, f.p, f.u), cfg.delta))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// Pruning would have dropped the active set below the quorum.
    Quorum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoeEstimate {
    pub x: Point,
    /// Robust solves performed (one per refinement round).
    pub iterations: usize,
    pub active_count: usize,
    pub objective: f64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrlsOutcome {
    pub x: Point,
    pub steps: usize,
    /// Objective after the initial solve and after every IRLS step.
    pub trace: Vec<f64>,
}

fn solve_weighted(flows: &[FlowObservation], c: &[f64], max_condition: f64) -> Result<Point> {
    let mut a = Sym2::default();
    let mut rhs = Point::default();
    for (f, &ci) in flows.iter().zip(c) {
        let proj = Sym2 {
            a: 1.0 - f.u.x * f.u.x,
            b: -f.u.x * f.u.y,
            c: 1.0 - f.u.y * f.u.y,
        };
        a.a += ci * proj.a;
        a.b += ci * proj.b;
        a.c += ci * proj.c;
        rhs = rhs + proj.apply(f.p) * ci;
    }
    let (lo, hi) = a.eigenvalues();
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::DegenerateGeometry { condition });
    }
    a.solve(rhs).ok_or(Error::DegenerateGeometry { condition })
}

fn usable(f: &FlowObservation) -> bool {
    f.w > 0.0 && f.w.is_finite() && f.v.norm() > 0.0 && f.p.is_finite()
}

/// Huber IRLS on all observations, starting from the weighted
/// least-squares solution.
pub fn huber_irls(flows: &[FlowObservation], cfg: &HuberConfig) -> Result<IrlsOutcome> {
    let scales: Vec<f64> = flows.iter().map(|f| cfg.scale.factor(f.w)).collect();
    let base: Vec<f64> = scales.iter().map(|s| s * s).collect();
    let mut x = solve_weighted(flows, &base, cfg.max_condition)?;
    let mut trace = vec![objective(x, flows, cfg)];
    let mut steps = 0;
    let mut c = base.clone();
    while steps < cfg.max_irls_iters {
        for (i, (ci, b)) in c.iter_mut().zip(&base).enumerate() {
            let f = &flows[i];
            let r = scales[i] * line_distance(x, f.p, f.u);
            *ci = if r <= cfg.delta { *b } else { b * cfg.delta / r };
        }
        let next = solve_weighted(flows, &c, cfg.max_condition)?;
        steps += 1;
        let moved = next.dist(x);
        x = next;
        trace.push(objective(x, flows, cfg));
        if moved < cfg.irls_tol {
            break;
        }
    }
    Ok(IrlsOutcome { x, steps, trace })
}

/// Single robust solve over all observations.
pub fn estimate_foe(flows: &[FlowObservation], cfg: &HuberConfig) -> Result<FoeEstimate> {
    let flows: Vec<FlowObservation> = flows.iter().copied().filter(usable).collect();
    if flows.len() < cfg.min_flows {
        return Err(Error::InsufficientFlow {
            usable: flows.len(),
            required: cfg.min_flows,
        });
    }
    let out = huber_irls(&flows, cfg)?;
    Ok(FoeEstimate {
        x: out.x,
        iterations: 1,
        active_count: flows.len(),
        objective: *out.trace.last().expect("trace has the initial entry"),
        stop: StopReason::Converged,
    })
}

fn is_radial(f: &FlowObservation, x: Point, cos_thresh: f64) -> bool {
    match (f.p - x).normalized() {
        Some(radial) => f.u.dot(radial) >= cos_thresh,
        None => true,
    }
}

/// Alternate robust solves with pruning of flows that do not point away
/// from the current estimate.
pub fn refine_foe(flows: &[FlowObservation], cfg: &HuberConfig) -> Result<FoeEstimate> {
    let mut active: Vec<FlowObservation> = flows.iter().copied().filter(usable).collect();
    let mut est = estimate_foe(&active, cfg)?;
    let cos_thresh = cfg.angle_thresh.to_radians().cos();
    loop {
        let keep: Vec<FlowObservation> = active
            .iter()
            .copied()
            .filter(|f| is_radial(f, est.x, cos_thresh))
            .collect();
        if keep.len() == active.len() {
            est.stop = StopReason::Converged;
            break;
        }
        if keep.len() < cfg.min_flows {
            est.stop = StopReason::Quorum;
            break;
        }
        if est.iterations >= cfg.max_refine_iters {
            est.stop = StopReason::MaxIterations;
            break;
        }
        let next = estimate_foe(&keep, cfg)?;
        let moved = next.x.dist(est.x);
        let iterations = est.iterations + 1;
        est = FoeEstimate { iterations, ..next };
        active = keep;
        if moved < cfg.tol {
            est.stop = StopReason::Converged;
            break;
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expansion(foe: Point, n: usize) -> Vec<FlowObservation> {
        (0..n)
            .map(|i| {
                let p = Point::new(13.0 + (i * 37 % 450) as f64, 7.0 + (i * 53 % 340) as f64);
                FlowObservation::new(p, (p - foe) * 0.1).unwrap()
            })
            .collect()
    }

    #[test]
    fn huber_pieces() {
        assert_eq!(huber(0.5, 1.0), 0.125);
        assert_eq!(huber(-3.0, 1.0), 2.5);
    }

    #[test]
    fn exact_on_clean_field() {
        let foe = Point::new(231.5, 170.25);
        let est = estimate_foe(&expansion(foe, 50), &HuberConfig::default()).unwrap();
        assert!(est.x.dist(foe) < 1e-3);
    }

    #[test]
    fn orthogonal_lines_intersect() {
        let mut flows = Vec::new();
        for k in 0..4 {
            let d = 10.0 + k as f64 * 5.0;
            flows.push(FlowObservation::new(Point::new(100.0 + d, 50.0), Point::new(1.0, 0.0)).unwrap());
            flows.push(FlowObservation::new(Point::new(100.0, 50.0 + d), Point::new(0.0, 1.0)).unwrap());
        }
        let est = estimate_foe(&flows, &HuberConfig::default()).unwrap();
        assert!(est.x.dist(Point::new(100.0, 50.0)) < 1e-9);
    }

    #[test]
    fn too_few_flows() {
        let flows = expansion(Point::new(10.0, 10.0), 7);
        assert!(matches!(
            estimate_foe(&flows, &HuberConfig::default()),
            Err(Error::InsufficientFlow { usable: 7, required: 8 })
        ));
    }

    #[test]
    fn parallel_lines_are_degenerate() {
        let flows: Vec<_> = (0..10)
            .map(|i| FlowObservation::new(Point::new(0.0, i as f64), Point::new(1.0, 0.0)).unwrap())
            .collect();
        assert!(matches!(
            estimate_foe(&flows, &HuberConfig::default()),
            Err(Error::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn clean_field_refines_in_one_round() {
        let foe = Point::new(200.0, 150.0);
        let flows = expansion(foe, 60);
        let est = refine_foe(&flows, &HuberConfig::default()).unwrap();
        assert_eq!(est.iterations, 1);
        assert_eq!(est.active_count, 60);
        assert_eq!(est.stop, StopReason::Converged);
    }

    #[test]
    fn quorum_stops_pruning() {
        // 8 radial flows and 4 flows pointing inward; pruning the inward
        // ones would leave exactly 8, so make the quorum 10.
        let foe = Point::new(100.0, 100.0);
        let mut flows = expansion(foe, 8);
        for i in 0..4 {
            let p = Point::new(20.0 + 30.0 * i as f64, 300.0);
            flows.push(FlowObservation::new(p, (foe - p) * 0.1).unwrap());
        }
        let cfg = HuberConfig { min_flows: 10, ..Default::default() };
        let est = refine_foe(&flows, &cfg).unwrap();
        assert_eq!(est.stop, StopReason::Quorum);
        assert_eq!(est.active_count, 12);
    }
}
