//! Forward motion through a textured tunnel. Camera translation along the
//! tunnel axis makes every image point flow radially away from the
//! principal point, which is therefore the true FOE.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng;
use crate::geom::Point;
use crate::risk::{BBox, Detection, ObjectClass};
use crate::vision::GrayFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelSpec {
    pub width: usize,
    pub height: usize,
    pub foe: Point,
    /// Focal length, pixels.
    pub focal: f64,
    /// Tunnel radius, metres.
    pub radius: f64,
    /// Texture cell size of the coarse octave, metres.
    pub cell: f64,
    pub seed: u64,
}

impl Default for TunnelSpec {
    fn default() -> Self {
        Self {
            width: 480,
            height: 360,
            foe: Point::new(250.0, 170.0),
            focal: 350.0,
            radius: 6.0,
            cell: 0.6,
            seed: 0,
        }
    }
}

fn hash(a: i64, b: i64, c: u64) -> f64 {
    let mut z = (a as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
        .wrapping_add(c.wrapping_mul(0x1656_67B1_9E37_79F9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// Value noise on a lattice wrapping every `period` cells in `u`.
fn value_noise(u: f64, v: f64, period: i64, salt: u64) -> f64 {
    let (iu, iv) = (u.floor(), v.floor());
    let (fu, fv) = (u - iu, v - iv);
    let s = |t: f64| t * t * (3.0 - 2.0 * t);
    let (su, sv) = (s(fu), s(fv));
    let (i0, j0) = ((iu as i64).rem_euclid(period), iv as i64);
    let i1 = (i0 + 1) % period;
    let h = |i, j| hash(i, j, salt);
    let top = h(i0, j0) * (1.0 - su) + h(i1, j0) * su;
    let bot = h(i0, j0 + 1) * (1.0 - su) + h(i1, j0 + 1) * su;
    top * (1.0 - sv) + bot * sv
}

impl TunnelSpec {
    /// Wall texture in `[0, 1]` at turn fraction `angle` and distance `z`
    /// along the tunnel.
    pub fn texture(&self, angle: f64, z: f64) -> f64 {
        let mut n = 0.0;
        let mut amp = 1.0;
        let mut total = 0.0;
        for octave in 0..3u32 {
            let cell = self.cell / f64::from(1 << octave);
            let period = ((TAU * self.radius / cell).round() as i64).max(1);
            n += amp * value_noise(angle * period as f64, z / cell, period, self.seed.wrapping_add(u64::from(octave)));
            total += amp;
            amp *= 0.5;
        }
        n / total
    }

    /// Wall depth and turn fraction seen through pixel `(x, y)`.
    pub fn ray(&self, x: f64, y: f64) -> (f64, f64) {
        let d = Point::new(x, y) - self.foe;
        let r = d.norm().max(1e-6);
        (self.focal * self.radius / r, d.y.atan2(d.x).rem_euclid(TAU) / TAU)
    }

    /// Luminance seen at pixel `(x, y)` after the camera travelled `s` metres.
    pub fn shade(&self, x: f64, y: f64, s: f64) -> f64 {
        let (depth, angle) = self.ray(x, y);
        let fog = (-depth / 30.0).exp();
        128.0 + fog * 220.0 * (self.texture(angle, depth + s) - 0.5)
    }

    pub fn render(&self, index: u64, s: f64) -> GrayFrame {
        GrayFrame::from_fn(self.width, self.height, |x, y| {
            self.shade(x as f64 + 0.5, y as f64 + 0.5, s).round().clamp(0.0, 255.0) as u8
        })
        .with_meta(index, 0.0)
    }
}

/// Road users ahead of the camera, ground 1.2 m below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Actor {
    class: &'static str,
    lateral: f64,
    depth: f64,
    closing: f64,
    size: (f64, f64),
    score: f64,
}

const CAMERA_HEIGHT: f64 = 1.2;

/// Scripted detections for `frames` frames at `fps`: a few actors that
/// approach the camera and respawn far away once passed.
pub fn script_detections(spec: &TunnelSpec, frames: u64, fps: f64, seed: u64) -> Vec<Detection> {
    let mut rng = rng(seed);
    let spawn = |rng: &mut rand_chacha::ChaCha8Rng, depth: f64| {
        let (class, size) = match rng.gen_range(0..4) {
            0 => ("car", (1.8, 1.5)),
            1 => ("bus", (2.5, 3.0)),
            2 => ("bicycle", (0.6, 1.7)),
            _ => ("person", (0.5, 1.7)),
        };
        Actor {
            class,
            lateral: rng.gen_range(-4.0..4.0),
            depth,
            closing: rng.gen_range(1.0..6.0),
            size,
            score: rng.gen_range(0.55..0.99),
        }
    };
    let mut actors: Vec<Actor> = (0..3).map(|_| {
        let d = rng.gen_range(8.0..40.0);
        spawn(&mut rng, d)
    }).collect();
    let (w, h) = (spec.width as f64, spec.height as f64);
    let mut out = Vec::new();
    for frame in 0..frames {
        for a in &mut actors {
            if a.depth < 3.0 {
                let d = rng.gen_range(30.0..45.0);
                *a = spawn(&mut rng, d);
            }
            let f = spec.focal / a.depth;
            let bw = a.size.0 * f;
            let bh = a.size.1 * f;
            let x = spec.foe.x + a.lateral * f - 0.5 * bw;
            let bottom = spec.foe.y + CAMERA_HEIGHT * f;
            let (x0, x1) = (x.max(0.0), (x + bw).min(w));
            let (y0, y1) = ((bottom - bh).max(0.0), bottom.min(h));
            if x1 - x0 >= 4.0 && y1 - y0 >= 4.0 {
                out.push(Detection {
                    frame,
                    class: ObjectClass::from(a.class),
                    score: a.score,
                    bbox: BBox {
                        x: x0,
                        y: y0,
                        w: x1 - x0,
                        h: y1 - y0,
                    },
                });
            }
            a.depth -= a.closing / fps;
        }
    }
    out
}
