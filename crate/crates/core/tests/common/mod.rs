//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use cyclerisk::foe::{objective, FlowObservation, HuberConfig};
use cyclerisk::geom::Point;
use cyclerisk::vision::GrayFrame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense two-phase simplex on `min c.x  s.t.  A x = b, x >= 0` with Bland's
/// rule. Returns the optimal value, or `None` when infeasible or unbounded.
pub fn dense_lp(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let m = a.len();
    let n = c.len();
    let cols = n + m;
    // Tableau rows: constraints, with rhs last; artificial columns n..n+m.
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; cols + 1];
            for j in 0..n {
                row[j] = sign * a[i][j];
            }
            row[n + i] = 1.0;
            row[cols] = sign * b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    const EPS: f64 = 1e-11;

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            // Reduced costs of the allowed columns.
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let z: f64 = (0..m).map(|i| cost[basis[i]] * t[i][j]).sum();
                if cost[j] - z < -EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(e) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][e] > EPS {
                    let ratio = t[i][cols] / t[i][e];
                    let better = match leave {
                        None => true,
                        Some((l, r)) => ratio < r - EPS || ((ratio - r).abs() <= EPS && basis[i] < basis[l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            let piv = t[r][e];
            for v in t[r].iter_mut() {
                *v /= piv;
            }
            let pivot_row = t[r].clone();
            for (i, row) in t.iter_mut().enumerate() {
                if i != r && row[e] != 0.0 {
                    let f = row[e];
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
            basis[r] = e;
        }
    };

    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[n..] {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, cols);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][cols]).sum();
    if infeas > 1e-9 {
        return None;
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !basis.contains(&j) && t[i][j].abs() > 1e-9) {
                let piv = t[i][j];
                for v in t[i].iter_mut() {
                    *v /= piv;
                }
                let pr = t[i].clone();
                for (k, row) in t.iter_mut().enumerate() {
                    if k != i && row[j] != 0.0 {
                        let f = row[j];
                        for (v, p) in row.iter_mut().zip(&pr) {
                            *v -= f * p;
                        }
                    }
                }
                basis[i] = j;
            }
        }
    }
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    if !run(&mut t, &mut basis, &phase2, n) {
        return None;
    }
    Some((0..m).map(|i| phase2[basis[i]] * t[i][cols]).sum())
}

/// EMD between unit-mass normalizations of `a` and `b` as a dense LP over
/// all 25 x 25 flows.
pub fn emd_oracle(a: &[f64], b: &[f64], cost: impl Fn(usize, usize) -> f64) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..na {
        let mut r = vec![0.0; na * nb];
        for j in 0..nb {
            r[i * nb + j] = 1.0;
        }
        rows.push(r);
        rhs.push(a[i] / sa);
    }
    for j in 0..nb {
        let mut r = vec![0.0; na * nb];
        for i in 0..na {
            r[i * nb + j] = 1.0;
        }
        rows.push(r);
        rhs.push(b[j] / sb);
    }
    let c: Vec<f64> = (0..na * nb).map(|k| cost(k / nb, k % nb)).collect();
    dense_lp(&rows, &rhs, &c).expect("transport LP is feasible and bounded")
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let pivot_row = a[col].clone();
                for (v, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum of `0.5 a'Qa - e'a` over `0 <= a <= C`, `y'a = 0`, by enumerating
/// every assignment of the variables to {lower bound, upper bound, free}
/// and solving the KKT system of the free block.
pub fn svm_dual_oracle(k: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let obj = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += 0.5 * a[i] * a[j] * q(i, j);
            }
            s -= a[i];
        }
        s
    };
    let mut best = f64::INFINITY;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut v = code;
        for s in state.iter_mut() {
            *s = (v % 3) as u8;
            v /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if free.is_empty() {
            let eq: f64 = (0..n).map(|i| y[i] * alpha[i]).sum();
            if eq.abs() < 1e-12 {
                best = best.min(obj(&alpha));
            }
            continue;
        }
        let f = free.len();
        let mut m = vec![vec![0.0; f + 1]; f + 1];
        let mut rhs = vec![0.0; f + 1];
        for (r, &i) in free.iter().enumerate() {
            for (s, &j) in free.iter().enumerate() {
                m[r][s] = q(i, j);
            }
            m[r][f] = y[i];
            m[f][r] = y[i];
            let fixed: f64 = (0..n).filter(|&j| state[j] != 2).map(|j| q(i, j) * alpha[j]).sum();
            rhs[r] = 1.0 - fixed;
        }
        rhs[f] = -(0..n).filter(|&j| state[j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
        let Some(sol) = solve_dense(m, rhs) else { continue };
        if sol[..f].iter().all(|&v| v >= -1e-12 && v <= c + 1e-12) {
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
            best = best.min(obj(&alpha));
        }
    }
    best
}

/// Minimum of the FOE objective over the integer lattice of the frame.
pub fn huber_grid_min(flows: &[FlowObservation], cfg: &HuberConfig, dims: (usize, usize)) -> (Point, f64) {
    let mut best = (Point::default(), f64::INFINITY);
    for y in 0..=dims.1 {
        for x in 0..=dims.0 {
            let p = Point::new(x as f64, y as f64);
            let v = objective(p, flows, cfg);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    best
}

/// Smooth random texture: a sum of plane waves with periods of 10 to 40 px.
pub struct WaveTexture {
    waves: Vec<(f64, f64, f64, f64)>,
}

impl WaveTexture {
    pub fn new(seed: u64) -> Self {
        let mut r = rng(seed);
        let waves = (0..24)
            .map(|_| {
                let theta: f64 = r.gen_range(0.0..std::f64::consts::TAU);
                let period: f64 = r.gen_range(10.0..40.0);
                let k = std::f64::consts::TAU / period;
                (k * theta.cos(), k * theta.sin(), r.gen_range(0.0..std::f64::consts::TAU), r.gen_range(0.5..1.0))
            })
            .collect();
        Self { waves }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let total: f64 = self.waves.iter().map(|w| w.3).sum();
        let s: f64 = self.waves.iter().map(|&(kx, ky, ph, amp)| amp * (kx * x + ky * y + ph).sin()).sum();
        127.5 + 120.0 * s / total.sqrt() / 2.5
    }

    /// Frame whose pixel `(x, y)` samples the texture at `(x - dx, y - dy)`.
    pub fn frame(&self, w: usize, h: usize, dx: f64, dy: f64) -> GrayFrame {
        GrayFrame::from_fn(w, h, |x, y| self.value(x as f64 - dx, y as f64 - dy).round().clamp(0.0, 255.0) as u8)
    }
}
