mod common;

use cyclerisk::foe::{estimate_foe, huber_irls, objective, refine_foe, FlowObservation, FoeSmoother, HuberConfig};
use cyclerisk::geom::Point;
use cyclerisk::synth::{gen_expansion_scene, SceneParams};
use proptest::prelude::*;

fn shifted(flows: &[FlowObservation], d: Point) -> Vec<FlowObservation> {
    flows.iter().map(|f| FlowObservation { p: f.p + d, ..*f }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clean_scene_recovers_foe(x in 20.0..460.0f64, y in 20.0..340.0f64, seed in 0u64..1000) {
        let foe = Point::new(x, y);
        let scene = gen_expansion_scene(&SceneParams { foe, ..Default::default() }, seed).unwrap();
        let est = refine_foe(&scene.flows, &HuberConfig::default()).unwrap();
        prop_assert!(est.x.dist(foe) < 1e-6);
    }

    #[test]
    fn estimate_is_translation_equivariant(seed in 0u64..1000, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let params = SceneParams { noise: 1.0, outlier_frac: 0.2, ..Default::default() };
        let scene = gen_expansion_scene(&params, seed).unwrap();
        let cfg = HuberConfig::default();
        let a = estimate_foe(&scene.flows, &cfg).unwrap();
        let b = estimate_foe(&shifted(&scene.flows, Point::new(dx, dy)), &cfg).unwrap();
        prop_assert!(b.x.dist(a.x + Point::new(dx, dy)) < 1e-6);
    }

    #[test]
    fn converged_estimate_is_a_local_minimum(seed in 0u64..1000, angle in 0.0..std::f64::consts::TAU) {
        let params = SceneParams { noise: 2.0, outlier_frac: 0.3, ..Default::default() };
        let scene = gen_expansion_scene(&params, seed).unwrap();
        // Heavy-outlier scenes can need more than the default 50 steps.
        let cfg = HuberConfig { max_irls_iters: 10_000, ..Default::default() };
        let est = estimate_foe(&scene.flows, &cfg).unwrap();
        let probe = est.x + Point::new(angle.cos(), angle.sin()) * 0.05;
        prop_assert!(est.objective <= objective(probe, &scene.flows, &cfg) + 1e-9);
    }

    #[test]
    fn irls_objective_never_increases(seed in 0u64..1000, frac in 0.0..0.5f64, noise in 0.0..3.0f64) {
        let params = SceneParams { noise, outlier_frac: frac, ..Default::default() };
        let scene = gen_expansion_scene(&params, seed).unwrap();
        let out = huber_irls(&scene.flows, &HuberConfig::default()).unwrap();
        for w in out.trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn smoother_stays_in_hull(points in prop::collection::vec((0.0..480.0f64, 0.0..360.0f64), 1..30)) {
        let mut s = FoeSmoother::new(5, 2.0);
        for (t, &(x, y)) in points.iter().enumerate() {
            let out = s.smooth(t as u64, Point::new(x, y)).unwrap();
            let hist: Vec<Point> = s.history().map(|h| h.1).collect();
            let (lo_x, hi_x) = hist.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.x), a.1.max(p.x)));
            let (lo_y, hi_y) = hist.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.y), a.1.max(p.y)));
            prop_assert!(out.x >= lo_x - 1e-9 && out.x <= hi_x + 1e-9);
            prop_assert!(out.y >= lo_y - 1e-9 && out.y <= hi_y + 1e-9);
        }
    }
}

#[test]
fn irls_not_beaten_by_lattice() {
    let cfg = HuberConfig::default();
    for seed in 0..3 {
        let params = SceneParams { noise: 1.5, outlier_frac: 0.25, n: 40, dims: (160, 120), foe: Point::new(70.0, 55.0) };
        let scene = gen_expansion_scene(&params, seed).unwrap();
        let est = estimate_foe(&scene.flows, &cfg).unwrap();
        let (_, grid) = common::huber_grid_min(&scene.flows, &cfg, params.dims);
        assert!(est.objective <= grid + 1e-6, "seed {seed}: {} > {grid}", est.objective);
    }
}
