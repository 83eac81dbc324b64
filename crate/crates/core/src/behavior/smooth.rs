use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::svm::{argmax, sq_dist};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmootherConfig {
    /// Past windows included besides the current one.
    pub window: usize,
    pub lambda: f64,
    /// Feature-similarity bandwidth; `None` uses the model's median
    /// pairwise training distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            window: 10,
            lambda: 0.5,
            sigma: None,
        }
    }
}

pub fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Recency- and similarity-weighted average of past class probabilities:
/// `S_c(t) = sum_j exp(-lambda j) k(f_t, f_{t-j}) P_c(t-j)`.
#[derive(Debug, Clone)]
pub struct TemporalSmoother {
    pub window: usize,
    pub lambda: f64,
    pub sigma: f64,
    history: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl TemporalSmoother {
    pub fn new(window: usize, lambda: f64, sigma: f64) -> Result<Self> {
        if window < 1 || !(lambda >= 0.0) || !(sigma > 0.0) {
            return Err(Error::Config(format!(
                "smoother needs window >= 1, lambda >= 0, sigma > 0 (got {window}, {lambda}, {sigma})"
            )));
        }
        Ok(Self {
            window,
            lambda,
            sigma,
            history: VecDeque::with_capacity(window + 1),
        })
    }

    /// Feed the decision values and features of the next window; returns
    /// the smoothed class scores.
    pub fn push_scores(&mut self, decision: &[f64], features: &[f64]) -> Vec<f64> {
        self.history.push_front((features.to_vec(), softmax(decision)));
        self.history.truncate(self.window + 1);
        let current = &self.history[0].0;
        let mut s = vec![0.0; decision.len()];
        for (j, (f, p)) in self.history.iter().enumerate() {
            let decay = if j == 0 { 1.0 } else { (-self.lambda * j as f64).exp() };
            let kappa = (-sq_dist(current, f) / (2.0 * self.sigma * self.sigma)).exp();
            for (sc, pc) in s.iter_mut().zip(p) {
                *sc += decay * kappa * pc;
            }
        }
        s
    }

    /// Position of the winning class for the next window.
    pub fn push(&mut self, decision: &[f64], features: &[f64]) -> usize {
        argmax(&self.push_scores(decision, features))
    }
}
