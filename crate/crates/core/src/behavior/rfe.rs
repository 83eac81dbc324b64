//! Recursive feature elimination with linear SVMs and rank consensus.

use serde::{Deserialize, Serialize};

use super::svm::{kernel_matrix, solve_binary, standardization, Kernel, SmoConfig};
use crate::error::{Error, Result};

/// Binary problem used to rank features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfeTarget {
    /// Only samples of the two classes, first one positive.
    Pair(usize, usize),
    /// One class against all others.
    OneVsAll(usize),
}

fn binary_problem(x: &[Vec<f64>], y: &[usize], target: RfeTarget) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (row, &l) in x.iter().zip(y) {
        let label = match target {
            RfeTarget::Pair(a, _) if l == a => Some(1.0),
            RfeTarget::Pair(a, b) if l == b && a != b => Some(-1.0),
            RfeTarget::Pair(..) => None,
            RfeTarget::OneVsAll(a) => Some(if l == a { 1.0 } else { -1.0 }),
        };
        if let Some(v) = label {
            xs.push(row.clone());
            ys.push(v);
        }
    }
    (xs, ys)
}

/// Rank features, most relevant first. Each round trains a linear SVM on
/// the remaining standardized features and drops the one with the smallest
/// squared weight (lowest index on ties).
pub fn rfe_rank(x: &[Vec<f64>], y: &[usize], target: RfeTarget, c: f64, smo: &SmoConfig) -> Result<Vec<usize>> {
    let (xs, ys) = binary_problem(x, y, target);
    if !(ys.iter().any(|&v| v > 0.0) && ys.iter().any(|&v| v < 0.0)) {
        return Err(Error::DegenerateTraining(format!("RFE target {target:?} lacks one side")));
    }
    let (mean, scale) = standardization(&xs);
    let z: Vec<Vec<f64>> = xs
        .iter()
        .map(|r| r.iter().enumerate().map(|(k, v)| (v - mean[k]) / scale[k]).collect())
        .collect();
    let d = mean.len();
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut eliminated = Vec::with_capacity(d);
    while remaining.len() > 1 {
        let sub: Vec<Vec<f64>> = z.iter().map(|r| remaining.iter().map(|&f| r[f]).collect()).collect();
        let k = kernel_matrix(&Kernel::Linear, &sub);
        let sol = solve_binary(&k, &ys, c, smo)?;
        let mut w = vec![0.0; remaining.len()];
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                for (wk, xk) in w.iter_mut().zip(&sub[i]) {
                    *wk += a * ys[i] * xk;
                }
            }
        }
        let mut worst = 0;
        for pos in 1..remaining.len() {
            let (cur, best) = (w[pos] * w[pos], w[worst] * w[worst]);
            if cur < best || (cur == best && remaining[pos] < remaining[worst]) {
                worst = pos;
            }
        }
        eliminated.push(remaining.remove(worst));
    }
    eliminated.extend(remaining);
    eliminated.reverse();
    Ok(eliminated)
}

/// Keep the `m` features with the smallest summed rank position across
/// `rankings`, ties by lower feature index. Returned sorted by index.
pub fn consensus_select(rankings: &[Vec<usize>], m: usize) -> Result<Vec<usize>> {
    let Some(first) = rankings.first() else {
        return Err(Error::InvalidInput("no rankings to combine".into()));
    };
    let d = first.len();
    let mut score = vec![0usize; d];
    for r in rankings {
        if r.len() != d {
            return Err(Error::InvalidInput("rankings cover different feature counts".into()));
        }
        for (pos, &f) in r.iter().enumerate() {
            if f >= d {
                return Err(Error::InvalidInput(format!("feature {f} out of range")));
            }
            score[f] += pos;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&f| (score[f], f));
    let mut mask: Vec<usize> = order.into_iter().take(m.min(d)).collect();
    mask.sort_unstable();
    Ok(mask)
}
