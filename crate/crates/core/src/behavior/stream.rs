use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transport mode of a route segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Walk,
    Bike,
    Motor,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Walk, Mode::Bike, Mode::Motor];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Mode> {
        Mode::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Walk => "walk",
            Mode::Bike => "bike",
            Mode::Motor => "motor",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walk" => Ok(Mode::Walk),
            "bike" => Ok(Mode::Bike),
            "motor" => Ok(Mode::Motor),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// One smartphone acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorSample {
    pub t: f64,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
    pub speed: f64,
    pub lat: f64,
    pub lon: f64,
    pub acc: f64,
}

impl SensorSample {
    /// The seven channels used for features, in schema order.
    pub fn channels(&self) -> [f64; 7] {
        [self.ax, self.ay, self.az, self.gx, self.gy, self.gz, self.speed]
    }
}

pub const NOMINAL_DT: f64 = 0.1;
pub const GAP_FLAG_SECONDS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorStream {
    pub samples: Vec<SensorSample>,
}

impl SensorStream {
    /// Build a stream, enforcing strictly increasing finite timestamps.
    pub fn new(samples: Vec<SensorSample>) -> Result<Self> {
        for (n, pair) in samples.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) {
                return Err(Error::InvalidInput(format!(
                    "timestamps must increase: sample {} has t={} after t={}",
                    n + 1,
                    pair[1].t,
                    pair[0].t
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Indices `i` with `t[i+1] - t[i]` above the gap threshold.
    pub fn gaps(&self) -> Vec<usize> {
        self.samples
            .windows(2)
            .enumerate()
            .filter(|(_, p)| p[1].t - p[0].t > GAP_FLAG_SECONDS)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A stream resampled onto an exact 10 Hz lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedStream {
    pub t0: f64,
    /// Samples with `t` set to the lattice time.
    pub samples: Vec<SensorSample>,
    /// Per slot, true when no acquisition was close enough and the
    /// previous value was held.
    pub filled: Vec<bool>,
}

impl GriddedStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_gaps(&self) -> bool {
        self.filled.iter().any(|&f| f)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * NOMINAL_DT
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Seconds dropped at each end.
    pub trim: f64,
    /// Samples farther than this from a lattice time are not used for it.
    pub tolerance: f64,
    /// Minimum number of lattice samples left after trimming.
    pub min_samples: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            trim: 10.0,
            tolerance: 0.05,
            min_samples: 100,
        }
    }
}

/// Trim both ends and resample onto a 10 Hz lattice by nearest sample,
/// holding the last value where no sample lies strictly within the
/// tolerance.
pub fn preprocess(stream: &SensorStream, cfg: &PreprocessConfig) -> Result<GriddedStream> {
    let (Some(first), Some(last)) = (stream.samples.first(), stream.samples.last()) else {
        return Err(Error::InsufficientData("empty sensor stream".into()));
    };
    let start = first.t + cfg.trim;
    let end = last.t - cfg.trim;
    let slots = if end >= start {
        ((end - start) / NOMINAL_DT + 1e-6).floor() as usize + 1
    } else {
        0
    };
    if slots < cfg.min_samples {
        return Err(Error::InsufficientData(format!(
            "{:.1} s stream leaves {slots} samples after trimming, need {}",
            stream.duration(),
            cfg.min_samples
        )));
    }
    let tol = cfg.tolerance - 1e-6;
    let s = &stream.samples;
    let mut samples = Vec::with_capacity(slots);
    let mut filled = Vec::with_capacity(slots);
    // `cursor` is the first sample with t >= lattice time.
    let mut cursor = s.partition_point(|x| x.t < start);
    for k in 0..slots {
        let tk = start + k as f64 * NOMINAL_DT;
        while cursor < s.len() && s[cursor].t < tk {
            cursor += 1;
        }
        let before = cursor.checked_sub(1).map(|i| (i, tk - s[i].t));
        let after = (cursor < s.len()).then(|| (cursor, s[cursor].t - tk));
        let nearest = match (before, after) {
            (Some(b), Some(a)) => Some(if a.1 < b.1 { a } else { b }),
            (b, a) => b.or(a),
        };
        let (mut sample, gap) = match nearest {
            Some((i, dt)) if dt <= tol => (s[i], false),
            _ => match samples.last() {
                Some(&prev) => (prev, true),
                None => (s[before.or(after).expect("stream is nonempty").0], true),
            },
        };
        sample.t = tk;
        samples.push(sample);
        filled.push(gap);
    }
    Ok(GriddedStream {
        t0: start,
        samples,
        filled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regular(duration: f64) -> SensorStream {
        let n = (duration / NOMINAL_DT).round() as usize;
        SensorStream::new(
            (0..=n)
                .map(|i| SensorSample {
                    t: i as f64 * NOMINAL_DT,
                    ax: i as f64,
                    ..Default::default()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn hundred_seconds_keeps_eighty() {
        let g = preprocess(&regular(100.0), &PreprocessConfig::default()).unwrap();
        assert_eq!(g.len(), 801);
        assert!((g.time(g.len() - 1) - g.t0 - 80.0).abs() < 1e-9);
        assert!(!g.has_gaps());
        assert_eq!(g.samples[0].ax, 100.0);
    }

    #[test]
    fn twenty_seconds_is_too_short() {
        assert!(matches!(
            preprocess(&regular(20.0), &PreprocessConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn quarter_second_gap_holds_two_slots() {
        let mut s = regular(60.0).samples;
        // No acquisitions in (30.0, 30.25): the samples at 30.1 and 30.2 are lost.
        s.retain(|x| !(x.t > 30.0 + 1e-9 && x.t < 30.25));
        let g = preprocess(&SensorStream::new(s).unwrap(), &PreprocessConfig::default()).unwrap();
        let filled: Vec<usize> = (0..g.len()).filter(|&k| g.filled[k]).collect();
        assert_eq!(filled.len(), 2);
        assert!(g.has_gaps());
        let k = filled[0];
        assert!((g.time(k) - 30.1).abs() < 1e-9);
        assert_eq!(g.samples[k].ax, g.samples[k - 1].ax);
        assert_eq!(g.samples[k + 1].ax, g.samples[k - 1].ax);
    }

    #[test]
    fn decreasing_time_rejected() {
        let s = vec![
            SensorSample { t: 1.0, ..Default::default() },
            SensorSample { t: 0.5, ..Default::default() },
        ];
        assert!(SensorStream::new(s).is_err());
    }

    #[test]
    fn long_gaps_flagged() {
        let mut s = regular(10.0).samples;
        s.retain(|x| !(x.t > 4.0 && x.t < 6.0));
        assert_eq!(SensorStream::new(s).unwrap().gaps().len(), 1);
    }
}
