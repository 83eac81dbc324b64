use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng;
use crate::behavior::{Mode, Segment, SensorSample, SensorStream, NOMINAL_DT};
use crate::error::{Error, Result};

/// Per-mode generator constants. These are oracle conventions for tests,
/// not measurements of real rides.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Signature {
    speed_mean: f64,
    speed_sd: f64,
    /// Broadband vibration on the accelerometer axes.
    vibration: f64,
    /// AR(1) coefficient of the vibration; higher means lower frequency.
    vibration_ar: f64,
    gyro_noise: f64,
}

const fn signature(mode: Mode) -> Signature {
    match mode {
        Mode::Walk => Signature {
            speed_mean: 1.4,
            speed_sd: 0.3,
            vibration: 0.5,
            vibration_ar: 0.0,
            gyro_noise: 0.25,
        },
        Mode::Bike => Signature {
            speed_mean: 4.5,
            speed_sd: 1.5,
            vibration: 1.2,
            vibration_ar: 0.3,
            gyro_noise: 0.12,
        },
        Mode::Motor => Signature {
            speed_mean: 10.0,
            speed_sd: 6.0,
            vibration: 0.3,
            vibration_ar: 0.85,
            gyro_noise: 0.04,
        },
    }
}

/// Sensor log with ground-truth segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRide {
    pub stream: SensorStream,
    pub segments: Vec<Segment>,
}

/// Random schedule alternating modes, segments of 40 to 100 s, covering
/// `total` seconds. Every mode appears when `total >= 120`.
pub fn gen_schedule(total: f64, seed: u64) -> Vec<(Mode, f64)> {
    let mut rng = rng(seed);
    let mut out: Vec<(Mode, f64)> = Vec::new();
    let mut left = total;
    let mut order = Mode::ALL;
    let first = rng.gen_range(0..3);
    order.rotate_left(first);
    let mut n = 0;
    while left > 0.0 {
        let mode = if n < 3 {
            order[n]
        } else {
            let prev = out.last().expect("nonempty").0;
            let others: Vec<Mode> = Mode::ALL.into_iter().filter(|&m| m != prev).collect();
            others[rng.gen_range(0..2)]
        };
        let mut d = rng.gen_range(40.0..100.0_f64).min(left);
        if left - d < 30.0 {
            d = left;
        }
        out.push((mode, d));
        left -= d;
        n += 1;
    }
    out
}

struct ModeState {
    speed: f64,
    vib: [f64; 3],
    step_freq: f64,
    phase: f64,
}

/// Generate a 10 Hz log following `schedule`. Timestamps carry up to
/// 10 ms of jitter.
///
/// * walk: step impacts on `az` at 1.6 to 2.2 Hz, lateral sway on `ax`;
/// * bike: mid-band road vibration, pedalling sway on `gy` at 0.8 to 1.4 Hz;
/// * motor: low, slow vibration and a quiet gyroscope.
pub fn gen_ride(schedule: &[(Mode, f64)], seed: u64) -> Result<SyntheticRide> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("empty schedule".into()));
    }
    if let Some((m, d)) = schedule.iter().find(|(_, d)| !(*d >= 30.0)) {
        return Err(Error::InvalidInput(format!("{m} segment of {d} s is shorter than 30 s")));
    }
    let mut rng = rng(seed);
    let mut samples = Vec::new();
    let mut segments = Vec::with_capacity(schedule.len());
    let (mut lat, mut lon) = (41.15 + rng.gen_range(-0.01..0.01), -8.61 + rng.gen_range(-0.01..0.01));
    let mut heading = rng.gen_range(0.0..TAU);
    let mut t0 = 0.0;
    let mut k = 0usize;
    for &(mode, dur) in schedule {
        let sig = signature(mode);
        let mut st = ModeState {
            speed: (sig.speed_mean + sig.speed_sd * rng.sample::<f64, _>(StandardNormal) * 0.5).max(0.0),
            vib: [0.0; 3],
            step_freq: match mode {
                Mode::Walk => rng.gen_range(1.6..2.2),
                Mode::Bike => rng.gen_range(0.8..1.4),
                Mode::Motor => rng.gen_range(0.05..0.2),
            },
            phase: rng.gen_range(0.0..TAU),
        };
        let t1 = t0 + dur;
        segments.push(Segment { start: t0, end: t1, mode });
        // Ornstein-Uhlenbeck speed with a 20 s time constant.
        let theta = NOMINAL_DT / 20.0;
        let ou_sd = sig.speed_sd * (2.0 * theta).sqrt();
        let ar = sig.vibration_ar;
        let innov = sig.vibration * (1.0 - ar * ar).sqrt();
        while (k as f64) * NOMINAL_DT < t1 - 1e-9 {
            let tn = k as f64 * NOMINAL_DT;
            let t = tn + rng.gen_range(-0.01..0.01);
            let t = if k == 0 { t.abs() } else { t };
            st.speed += theta * (sig.speed_mean - st.speed) + ou_sd * rng.sample::<f64, _>(StandardNormal);
            st.speed = st.speed.max(0.0);
            for v in &mut st.vib {
                *v = ar * *v + innov * rng.sample::<f64, _>(StandardNormal);
            }
            let ph = TAU * st.step_freq * tn + st.phase;
            let g = |rng: &mut ChaCha8Rng| sig.gyro_noise * rng.sample::<f64, _>(StandardNormal);
            let (ax, ay, az, gx, gy, gz) = match mode {
                Mode::Walk => {
                    let impact = 2.5 * ph.sin().max(0.0).powi(3);
                    (
                        st.vib[0] + 1.0 * (0.5 * ph).sin(),
                        st.vib[1] + 0.6 * ph.cos(),
                        st.vib[2] + impact,
                        g(&mut rng),
                        0.3 * (0.5 * ph).sin() + g(&mut rng),
                        g(&mut rng),
                    )
                }
                Mode::Bike => (
                    st.vib[0],
                    st.vib[1],
                    st.vib[2],
                    g(&mut rng),
                    0.5 * ph.sin() + g(&mut rng),
                    g(&mut rng),
                ),
                Mode::Motor => (
                    st.vib[0],
                    st.vib[1],
                    st.vib[2],
                    g(&mut rng),
                    g(&mut rng),
                    0.1 * ph.sin() + g(&mut rng),
                ),
            };
            heading += 0.02 * rng.sample::<f64, _>(StandardNormal);
            let step = st.speed * NOMINAL_DT;
            lat += step * heading.cos() / 111_320.0;
            lon += step * heading.sin() / (111_320.0 * (lat * PI / 180.0).cos());
            let gps_noise = Normal::new(0.0, 0.15).expect("valid sigma");
            samples.push(SensorSample {
                t,
                ax,
                ay,
                az,
                gx,
                gy,
                gz,
                speed: (st.speed + gps_noise.sample(&mut rng)).max(0.0),
                lat,
                lon,
                acc: rng.gen_range(3.0..8.0),
            });
            k += 1;
        }
        t0 = t1;
    }
    Ok(SyntheticRide {
        stream: SensorStream::new(samples)?,
        segments,
    })
}
