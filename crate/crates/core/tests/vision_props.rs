mod common;

use cyclerisk::geom::Point;
use cyclerisk::vision::{clahe, detect_corners, lk_flow, CornerParams, GrayFrame, LkParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lk_recovers_translation(seed in 0u64..10_000, angle in 0.0..std::f64::consts::TAU, mag in 0.0..3.0f64) {
        let tex = common::WaveTexture::new(seed);
        let t = Point::new(mag * angle.cos(), mag * angle.sin());
        let prev = tex.frame(200, 150, 0.0, 0.0);
        let next = tex.frame(200, 150, t.x, t.y);
        let corners = detect_corners(&prev, &CornerParams::default());
        prop_assert!(!corners.is_empty());
        let field = lk_flow(&prev, &next, &corners, &LkParams::default()).unwrap();
        let good = field.entries.iter().filter(|e| e.tracked && (e.v - t).norm() <= 0.25).count();
        prop_assert!(good as f64 >= 0.9 * field.entries.len() as f64, "{good}/{}", field.entries.len());
    }

    #[test]
    fn clahe_fixes_constant_frames(v in 0u8..=255, w in 8usize..80, h in 8usize..80, clip in 0.01..1.0f64) {
        let flat = GrayFrame::filled(w, h, v);
        prop_assert_eq!(clahe(&flat, (4, 4), clip).unwrap(), flat);
    }

    #[test]
    fn clahe_keeps_two_level_order(lo in 0u8..128, hi in 128u8..=255) {
        let f = GrayFrame::from_fn(64, 64, |x, _| if x < 32 { lo } else { hi });
        let out = clahe(&f, (4, 4), 1.0).unwrap();
        for y in 0..64 {
            prop_assert!(out.get(10, y) < out.get(50, y));
        }
    }
}

#[test]
fn identity_pair_has_no_motion() {
    let tex = common::WaveTexture::new(5);
    let f = tex.frame(160, 120, 0.0, 0.0);
    let corners = detect_corners(&f, &CornerParams::default());
    let field = lk_flow(&f, &f, &corners, &LkParams::default()).unwrap();
    assert!(field.tracked().all(|e| e.v.norm() <= 0.05));
}
