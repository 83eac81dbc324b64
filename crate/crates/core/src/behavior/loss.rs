use crate::error::{Error, Result};

use super::svm::SvmModel;

/// Prior-weighted 0-1 loss.
///
/// Observation `i` weighs `prior(y_i) / count(y_i)`, with priors taken from
/// `priors` (indexed like `classes`), restricted to the classes present in
/// `truth` and renormalized, so the weights sum to 1.
pub fn weighted_loss(pred: &[usize], truth: &[usize], classes: &[usize], priors: &[f64]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidInput("empty test set".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput("prediction and label counts differ".into()));
    }
    let mut counts = vec![0usize; classes.len()];
    for t in truth {
        let pos = classes
            .iter()
            .position(|c| c == t)
            .ok_or_else(|| Error::InvalidInput(format!("test label {t} unknown to the model")))?;
        counts[pos] += 1;
    }
    let present: f64 = (0..classes.len()).filter(|&k| counts[k] > 0).map(|k| priors[k]).sum();
    if !(present > 0.0) {
        return Err(Error::InvalidInput("test classes have zero prior".into()));
    }
    let mut loss = 0.0;
    for (p, t) in pred.iter().zip(truth) {
        if p != t {
            let k = classes.iter().position(|c| c == t).expect("checked above");
            loss += priors[k] / present / counts[k] as f64;
        }
    }
    Ok(loss)
}

/// Weighted loss of `model` on raw feature rows.
pub fn loss(model: &SvmModel, x: &[Vec<f64>], y: &[usize]) -> Result<f64> {
    let pred: Vec<usize> = x.iter().map(|r| model.predict(r)).collect();
    weighted_loss(&pred, y, &model.classes, &model.priors)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSES: [usize; 2] = [0, 1];
    const EVEN: [f64; 2] = [0.5, 0.5];

    #[test]
    fn perfect_and_all_wrong() {
        let y = [0, 0, 1, 1, 1];
        assert_eq!(weighted_loss(&y, &y, &CLASSES, &EVEN).unwrap(), 0.0);
        let wrong = [1, 1, 0, 0, 0];
        assert!((weighted_loss(&wrong, &y, &CLASSES, &[0.3, 0.7]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_of_one_class_wrong() {
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let p = [1, 1, 0, 0, 1, 1, 1, 1];
        assert!((weighted_loss(&p, &y, &CLASSES, &EVEN).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn duplication_invariant() {
        let y = [0, 1, 1, 2];
        let p = [0, 2, 1, 0];
        let classes = [0, 1, 2];
        let priors = [0.2, 0.5, 0.3];
        let a = weighted_loss(&p, &y, &classes, &priors).unwrap();
        let yy: Vec<usize> = y.iter().chain(&y).copied().collect();
        let pp: Vec<usize> = p.iter().chain(&p).copied().collect();
        let b = weighted_loss(&pp, &yy, &classes, &priors).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn empty_rejected() {
        assert!(weighted_loss(&[], &[], &CLASSES, &EVEN).is_err());
    }
}
