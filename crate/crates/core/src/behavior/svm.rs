//! Soft-margin SVMs trained by sequential minimal optimization, combined
//! one-versus-all.
//!
//! The binary solver minimizes `0.5 a^T Q a - e^T a` subject to
//! `0 <= a <= C` and `y^T a = 0`, with `Q_ij = y_i y_j K(x_i, x_j)`, picking
//! the working pair by second-order information over a precomputed kernel
//! matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Poly2,
    Poly3,
    Gaussian,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [KernelKind::Linear, KernelKind::Gaussian, KernelKind::Poly2, KernelKind::Poly3];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Poly2 => "poly2",
            KernelKind::Poly3 => "poly3",
            KernelKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "poly2" => Ok(KernelKind::Poly2),
            "poly3" => Ok(KernelKind::Poly3),
            "gaussian" => Ok(KernelKind::Gaussian),
            other => Err(Error::Config(format!("unknown kernel {other:?}"))),
        }
    }
}

/// A kernel with its resolved parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `(x^T z + 1)^degree`
    Poly { degree: i32 },
    /// `exp(-|x - z|^2 / (2 bandwidth^2))`
    Gaussian { bandwidth: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Poly { degree } => (dot(a, b) + 1.0).powi(degree),
            Kernel::Gaussian { bandwidth } => (-sq_dist(a, b) / (2.0 * bandwidth * bandwidth)).exp(),
        }
    }

    /// Resolve a kernel kind; Gaussian bandwidth is the median pairwise
    /// distance of `x`.
    pub fn resolve(kind: KernelKind, x: &[Vec<f64>]) -> Kernel {
        match kind {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Poly2 => Kernel::Poly { degree: 2 },
            KernelKind::Poly3 => Kernel::Poly { degree: 3 },
            KernelKind::Gaussian => Kernel::Gaussian {
                bandwidth: median_pairwise_distance(x).max(1e-12),
            },
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of all `n (n - 1) / 2` pairwise Euclidean distances (lower
/// median for an even count); 1 when fewer than two points.
pub fn median_pairwise_distance(x: &[Vec<f64>]) -> f64 {
    let mut d = Vec::with_capacity(x.len() * x.len().saturating_sub(1) / 2);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            d.push(sq_dist(&x[i], &x[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = (d.len() - 1) / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoConfig {
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function `sum a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    /// `0.5 a^T Q a - e^T a` at the solution.
    pub objective: f64,
    pub iterations: usize,
}

const TAU: f64 = 1e-12;

/// Solve one binary dual over a full kernel matrix `k` (row-major `n x n`)
/// with labels `y` in `{-1, +1}`.
pub fn solve_binary(k: &[f64], y: &[f64], c: f64, cfg: &SmoConfig) -> Result<BinarySolution> {
    let n = y.len();
    if k.len() != n * n {
        return Err(Error::InvalidInput("kernel matrix size mismatch".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Config(format!("C must be > 0, got {c}")));
    }
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let is_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let is_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        // Working set selection by second-order gain.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_gain = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let a = q(i, i) + q(t, t) - 2.0 * y[i] * y[t] * q(i, t);
                    let a = if a > 0.0 { a } else { TAU };
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
        if gmax - gmin < cfg.tol {
            break;
        }
        if iterations >= cfg.max_iter {
            log::warn!("SMO stopped at the iteration cap with violation {:.3e}", gmax - gmin);
            break;
        }
        iterations += 1;

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai_old, alpha[j] - aj_old);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Offset from free variables, or the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
    Ok(BinarySolution {
        alpha,
        rho,
        objective,
        iterations,
    })
}

/// Row-major kernel matrix of `x` against itself.
pub fn kernel_matrix(kernel: &Kernel, x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&x[i], &x[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// One trained binary machine in expansion form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    pub rho: f64,
    /// Primal weights (linear kernel only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Indices into the model's support vectors.
    pub support: Vec<usize>,
    /// `a_i y_i` per support entry.
    pub coef: Vec<f64>,
}

impl Machine {
    fn from_solution(sol: &BinarySolution, y: &[f64], x: &[Vec<f64>], kernel: &Kernel, sv_index: &[usize]) -> Self {
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support.push(sv_index[i]);
                coef.push(a * y[i]);
            }
        }
        let weights = matches!(kernel, Kernel::Linear).then(|| {
            let d = x.first().map_or(0, Vec::len);
            let mut w = vec![0.0; d];
            for (i, &a) in sol.alpha.iter().enumerate() {
                for (wk, xk) in w.iter_mut().zip(&x[i]) {
                    *wk += a * y[i] * xk;
                }
            }
            w
        });
        Self {
            rho: sol.rho,
            weights,
            support,
            coef,
        }
    }
}

/// One-versus-all ensemble on standardized, masked features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    /// Class ids in decision order.
    pub classes: Vec<usize>,
    /// Empirical class frequencies of the training set.
    pub priors: Vec<f64>,
    /// Retained feature indices of the input schema.
    pub mask: Vec<usize>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Median pairwise distance of the standardized training features.
    pub median_distance: f64,
    /// Standardized support vectors shared by all machines.
    pub support_vectors: Vec<Vec<f64>>,
    pub machines: Vec<Machine>,
}

/// Per-feature mean and scale; a zero spread maps to scale 1.
pub fn standardization(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    let mut mean = vec![0.0; d];
    for row in x {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; d];
    for row in x {
        for k in 0..d {
            scale[k] += (row[k] - mean[k]).powi(2) / n;
        }
    }
    for s in &mut scale {
        *s = s.sqrt();
        if !(*s > 1e-12) {
            *s = 1.0;
        }
    }
    (mean, scale)
}

impl SvmModel {
    /// Mask and standardize one raw feature vector.
    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        self.mask
            .iter()
            .enumerate()
            .map(|(k, &f)| (raw[f] - self.mean[k]) / self.scale[k])
            .collect()
    }

    /// Decision values per class for an already transformed vector.
    pub fn decision_transformed(&self, z: &[f64]) -> Vec<f64> {
        let kvals: Vec<Option<f64>> = if matches!(self.kernel, Kernel::Linear) {
            Vec::new()
        } else {
            self.support_vectors.iter().map(|s| Some(self.kernel.eval(s, z))).collect()
        };
        self.machines
            .iter()
            .map(|m| match &m.weights {
                Some(w) => dot(w, z) - m.rho,
                None => {
                    m.support
                        .iter()
                        .zip(&m.coef)
                        .map(|(&s, &c)| c * kvals[s].expect("kernel value"))
                        .sum::<f64>()
                        - m.rho
                }
            })
            .collect()
    }

    pub fn decision(&self, raw: &[f64]) -> Vec<f64> {
        self.decision_transformed(&self.transform(raw))
    }

    /// Class id with the largest decision value (first on ties).
    pub fn predict(&self, raw: &[f64]) -> usize {
        self.classes[argmax(&self.decision(raw))]
    }

    pub fn class_position(&self, class: usize) -> Option<usize> {
        self.classes.iter().position(|&c| c == class)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Train an OVA ensemble on the columns `mask` of `x`.
pub fn train_svm(
    x: &[Vec<f64>],
    y: &[usize],
    c: f64,
    kind: KernelKind,
    mask: Option<&[usize]>,
    smo: &SmoConfig,
) -> Result<SvmModel> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput("feature and label counts differ or are empty".into()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("feature rows must be finite and of equal length".into()));
    }
    let mask: Vec<usize> = match mask {
        Some(m) => m.to_vec(),
        None => (0..d).collect(),
    };
    if mask.is_empty() || mask.iter().any(|&f| f >= d) {
        return Err(Error::InvalidInput("feature mask empty or out of range".into()));
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateTraining(format!("{} class(es) present, need 2", classes.len())));
    }
    let priors = classes
        .iter()
        .map(|&cl| y.iter().filter(|&&v| v == cl).count() as f64 / y.len() as f64)
        .collect();

    let masked: Vec<Vec<f64>> = x.iter().map(|r| mask.iter().map(|&f| r[f]).collect()).collect();
    let (mean, scale) = standardization(&masked);
    let z: Vec<Vec<f64>> = masked
        .iter()
        .map(|r| r.iter().enumerate().map(|(k, v)| (v - mean[k]) / scale[k]).collect())
        .collect();
    let median_distance = median_pairwise_distance(&z);
    let kernel = match kind {
        KernelKind::Gaussian => Kernel::Gaussian {
            bandwidth: median_distance.max(1e-12),
        },
        other => Kernel::resolve(other, &z),
    };
    let kmat = kernel_matrix(&kernel, &z);

    let mut solutions = Vec::with_capacity(classes.len());
    for &cl in &classes {
        let yb: Vec<f64> = y.iter().map(|&v| if v == cl { 1.0 } else { -1.0 }).collect();
        solutions.push((solve_binary(&kmat, &yb, c, smo)?, yb));
    }
    // Keep every training point that is a support vector of some machine.
    let mut keep: Vec<usize> = (0..z.len())
        .filter(|&i| solutions.iter().any(|(s, _)| s.alpha[i] > 0.0))
        .collect();
    if matches!(kernel, Kernel::Linear) {
        keep.clear();
    }
    let mut sv_index = vec![usize::MAX; z.len()];
    for (pos, &i) in keep.iter().enumerate() {
        sv_index[i] = pos;
    }
    let machines = solutions
        .iter()
        .map(|(s, yb)| {
            let mut m = Machine::from_solution(s, yb, &z, &kernel, &sv_index);
            if matches!(kernel, Kernel::Linear) {
                m.support.clear();
                m.coef.clear();
            }
            m
        })
        .collect();
    Ok(SvmModel {
        kernel,
        c,
        classes,
        priors,
        mask,
        mean,
        scale,
        median_distance,
        support_vectors: keep.iter().map(|&i| z[i].clone()).collect(),
        machines,
    })
}
