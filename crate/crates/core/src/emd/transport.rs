//! Transportation simplex for balanced problems.
//!
//! Starts from the north-west corner rule and pivots on the most negative
//! reduced cost (lowest index on ties) using MODI potentials. The basis is
//! kept as a spanning tree of `m + n - 1` cells, degenerate zeros included.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub cost: f64,
    /// Nonzero flows `(row, col, amount)`.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

struct Basis {
    cells: Vec<(usize, usize, f64)>,
}

impl Basis {
    /// Node ids: rows `0..m`, columns `m..m+n`.
    fn adjacency(&self, m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); m + n];
        for (e, &(i, j, _)) in self.cells.iter().enumerate() {
            adj[i].push((m + j, e));
            adj[m + j].push((i, e));
        }
        adj
    }
}

fn potentials(basis: &Basis, cost: &dyn Fn(usize, usize) -> f64, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let adj = basis.adjacency(m, n);
    let mut pot = vec![f64::NAN; m + n];
    pot[0] = 0.0;
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        for &(next, e) in &adj[node] {
            if pot[next].is_nan() {
                let (i, j, _) = basis.cells[e];
                // u_i + v_j = c_ij
                pot[next] = cost(i, j) - pot[node];
                stack.push(next);
            }
        }
    }
    (pot[..m].to_vec(), pot[m..].to_vec())
}

/// Edge ids on the tree path from node `from` to node `to`.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            break;
        }
        for &(next, e) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, e));
                stack.push(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while let Some((prev, e)) = parent[node] {
        path.push(e);
        node = prev;
    }
    path
}

/// Solve `min sum c_ij x_ij` subject to row sums `supply`, column sums
/// `demand`, `x >= 0`. Totals must agree to within rounding.
pub fn transport(supply: &[f64], demand: &[f64], cost: &dyn Fn(usize, usize) -> f64) -> Result<Transport> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::ZeroMass);
    }
    let ts: f64 = supply.iter().sum();
    let td: f64 = demand.iter().sum();
    if (ts - td).abs() > 1e-9 * ts.max(td).max(1.0) {
        return Err(Error::InvalidInput(format!("unbalanced transport: {ts} vs {td}")));
    }

    // North-west corner start.
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]);
        cells.push((i, j, x));
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    // Push the rounding residue into the last cell.
    if let Some(last) = cells.last_mut() {
        last.2 = (last.2 + s[m - 1].max(0.0)).max(0.0);
    }
    let mut basis = Basis { cells };

    let scale = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| cost(i, j).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let eps = 1e-12 * scale;
    let max_pivots = 50 * (m + n) * (m + n) + 100;
    let mut pivots = 0;
    loop {
        let (u, v) = potentials(&basis, cost, m, n);
        let mut in_basis = vec![false; m * n];
        for &(i, j, _) in &basis.cells {
            in_basis[i * n + j] = true;
        }
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] {
                    continue;
                }
                let r = cost(i, j) - u[i] - v[j];
                if r < -eps && best.is_none_or(|b| r < b.2) {
                    best = Some((i, j, r));
                }
            }
        }
        let Some((ei, ej, _)) = best else { break };
        if pivots >= max_pivots {
            return Err(Error::SolverStalled(pivots));
        }
        pivots += 1;

        // Cycle: entering cell (+), then the tree path from column ej back
        // to row ei with alternating signs starting at (-).
        let adj = basis.adjacency(m, n);
        let path = tree_path(&adj, m + ej, ei);
        let mut leave: Option<usize> = None;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                let x = basis.cells[e].2;
                if leave.is_none_or(|l| x < basis.cells[l].2) {
                    leave = Some(e);
                }
            }
        }
        let leave = leave.expect("cycle has a decreasing edge");
        let theta = basis.cells[leave].2;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                basis.cells[e].2 = (basis.cells[e].2 - theta).max(0.0);
            } else {
                basis.cells[e].2 += theta;
            }
        }
        basis.cells[leave] = (ei, ej, theta);
    }

    let mut total = 0.0;
    let mut flows = Vec::new();
    for &(i, j, x) in &basis.cells {
        if x > 0.0 {
            total += x * cost(i, j);
            flows.push((i, j, x));
        }
    }
    flows.sort_by_key(|f| (f.0, f.1));
    Ok(Transport {
        cost: total,
        flows,
        pivots,
    })
}
