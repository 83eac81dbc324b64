use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Exponentially weighted average of the current and `m` previous
/// per-frame estimates. Frames without an estimate are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoeSmoother {
    pub m: u64,
    pub tau: f64,
    history: VecDeque<(u64, Point)>,
    last_frame: Option<u64>,
}

impl FoeSmoother {
    pub fn new(m: u64, tau: f64) -> Self {
        Self {
            m,
            tau: tau.max(0.0),
            history: VecDeque::new(),
            last_frame: None,
        }
    }

    pub fn history(&self) -> impl Iterator<Item = &(u64, Point)> {
        self.history.iter()
    }

    /// Record the estimate for frame `t` (or its absence) and return the
    /// smoothed point, `None` when no estimate lies in the window.
    pub fn update(&mut self, t: u64, estimate: Option<Point>) -> Result<Option<Point>> {
        if let Some(last) = self.last_frame {
            if t <= last {
                return Err(Error::InvalidInput(format!(
                    "FOE smoother frames must increase: {t} after {last}"
                )));
            }
        }
        self.last_frame = Some(t);
        if let Some(x) = estimate.filter(|x| x.is_finite()) {
            self.history.push_back((t, x));
        }
        let oldest = t.saturating_sub(self.m);
        while self.history.front().is_some_and(|&(j, _)| j < oldest) {
            self.history.pop_front();
        }
        if self.history.is_empty() {
            return Ok(None);
        }
        let mut num = Point::default();
        let mut den = 0.0;
        for &(j, x) in &self.history {
            let wgt = (-self.tau * (t - j) as f64).exp();
            num = num + x * wgt;
            den += wgt;
        }
        Ok(Some(num * (1.0 / den)))
    }

    pub fn smooth(&mut self, t: u64, x: Point) -> Result<Point> {
        Ok(self.update(t, Some(x))?.unwrap_or(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_window_passes_through() {
        let mut s = FoeSmoother::new(0, 0.5);
        s.smooth(0, Point::new(5.0, 5.0)).unwrap();
        assert_eq!(s.smooth(1, Point::new(1.0, 2.0)).unwrap(), Point::new(1.0, 2.0));
    }

    #[test]
    fn equal_history_is_fixed_point() {
        let mut s = FoeSmoother::new(5, 0.5);
        let c = Point::new(3.25, -1.5);
        for t in 0..10 {
            let out = s.smooth(t, c).unwrap();
            assert!((out - c).norm() < 1e-12);
        }
    }

    #[test]
    fn uniform_two_frame_average() {
        let mut s = FoeSmoother::new(1, 0.0);
        s.smooth(0, Point::new(0.0, 0.0)).unwrap();
        assert_eq!(s.smooth(1, Point::new(2.0, 2.0)).unwrap(), Point::new(1.0, 1.0));
    }

    #[test]
    fn decay_weights() {
        let mut s = FoeSmoother::new(5, 0.5);
        s.smooth(0, Point::new(0.0, 0.0)).unwrap();
        let out = s.smooth(2, Point::new(1.0, 0.0)).unwrap();
        let w_old = (-1.0f64).exp();
        assert!((out.x - 1.0 / (1.0 + w_old)).abs() < 1e-12);
    }

    #[test]
    fn missing_frames_skipped_and_order_enforced() {
        let mut s = FoeSmoother::new(2, 0.5);
        assert_eq!(s.update(0, None).unwrap(), None);
        s.smooth(1, Point::new(4.0, 4.0)).unwrap();
        assert_eq!(s.update(2, None).unwrap(), Some(Point::new(4.0, 4.0)));
        assert_eq!(s.update(4, None).unwrap(), None);
        assert!(s.update(4, None).is_err());
    }
}
