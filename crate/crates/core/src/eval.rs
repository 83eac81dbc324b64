//! Confusion matrices and loss grids.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::behavior::{train_svm, weighted_loss, KernelKind, SmoConfig};
use crate::error::{Error, Result};

/// Counts indexed `[truth][prediction]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_pairs(labels: Vec<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Self::new(labels);
        for (t, p) in pairs {
            m.add(t, p)?;
        }
        Ok(m)
    }

    pub fn add(&mut self, truth: usize, pred: usize) -> Result<()> {
        let n = self.labels.len();
        if truth >= n || pred >= n {
            return Err(Error::InvalidInput(format!("class index out of range ({truth}, {pred})")));
        }
        self.counts[truth][pred] += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Rows in percent; an empty row stays all zero.
    pub fn row_percent(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let s: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if s == 0 { 0.0 } else { 100.0 * c as f64 / s as f64 })
                    .collect()
            })
            .collect()
    }

    /// Diagonal share of each row, `None` for classes absent from the truth.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let s: usize = row.iter().sum();
                (s > 0).then(|| row[i] as f64 / s as f64)
            })
            .collect()
    }

    /// Row-normalized percentages, truth down the side.
    pub fn to_text(&self) -> String {
        let w = self.labels.iter().map(String::len).max().unwrap_or(0).max(7);
        let mut out = format!("{:>w$}", "truth");
        for l in &self.labels {
            let _ = write!(out, " {l:>w$}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(self.row_percent()) {
            let _ = write!(out, "{l:>w$}");
            for v in row {
                let _ = write!(out, " {:>w$}", format!("{v:.2}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossCell {
    pub c: f64,
    pub kernel: KernelKind,
    pub loss: f64,
}

/// Loss grid columns and rows.
pub const GRID_C: [f64; 4] = [0.5, 1.0, 10.0, 20.0];

/// Held-out weighted loss for every `(C, kernel)` pair.
pub fn loss_grid(
    train: (&[Vec<f64>], &[usize]),
    test: (&[Vec<f64>], &[usize]),
    cs: &[f64],
    kernels: &[KernelKind],
    mask: Option<&[usize]>,
    smo: &SmoConfig,
) -> Result<Vec<LossCell>> {
    let mut out = Vec::with_capacity(cs.len() * kernels.len());
    for &kernel in kernels {
        for &c in cs {
            let model = train_svm(train.0, train.1, c, kernel, mask, smo)?;
            let pred: Vec<usize> = test.0.iter().map(|r| model.predict(r)).collect();
            let loss = weighted_loss(&pred, test.1, &model.classes, &model.priors)?;
            out.push(LossCell { c, kernel, loss });
        }
    }
    Ok(out)
}

pub fn loss_grid_text(cells: &[LossCell]) -> String {
    let mut cs: Vec<f64> = cells.iter().map(|c| c.c).collect();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let mut out = format!("{:>10}", "kernel");
    for c in &cs {
        let _ = write!(out, " {:>8}", format!("C={c}"));
    }
    out.push('\n');
    let mut kernels: Vec<KernelKind> = Vec::new();
    for cell in cells {
        if !kernels.contains(&cell.kernel) {
            kernels.push(cell.kernel);
        }
    }
    for k in kernels {
        let _ = write!(out, "{:>10}", k.to_string());
        for c in &cs {
            match cells.iter().find(|x| x.kernel == k && x.c == *c) {
                Some(x) => {
                    let _ = write!(out, " {:>8.4}", x.loss);
                }
                None => {
                    let _ = write!(out, " {:>8}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_is_identity() {
        let labels = vec!["1".to_string(), "2".into(), "3".into()];
        let m = ConfusionMatrix::from_pairs(labels, [(0, 0), (1, 1), (2, 2), (2, 2)]).unwrap();
        let p = m.row_percent();
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 100.0 } else { 0.0 });
            }
        }
        assert!(m.to_text().contains("100.00"));
    }

    #[test]
    fn rows_sum_to_hundred() {
        let labels = vec!["a".to_string(), "b".into()];
        let m = ConfusionMatrix::from_pairs(labels, [(0, 0), (0, 1), (0, 1), (1, 1)]).unwrap();
        for row in m.row_percent() {
            assert!((row.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        }
        assert_eq!(m.per_class_accuracy(), vec![Some(1.0 / 3.0), Some(1.0)]);
    }
}
