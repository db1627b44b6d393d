//! Cross-entropy on class probabilities (the networks end in an explicit
//! softmax) and prediction helpers. Sums accumulate in f64.

use super::tensor::{Scalar, Tensor};
use crate::error::{EegError, Result};

const PROB_FLOOR: f64 = 1e-12;

/// Mean cross-entropy of softmax outputs against integer labels, and its
/// gradient with respect to the probabilities. Chained through the softmax
/// backward this reproduces the classic (p − t) logit gradient.
pub fn cross_entropy_from_probs<F: Scalar>(
    probs: &Tensor<F>,
    labels: &[usize],
) -> Result<(f64, Tensor<F>)> {
    let shape = probs.shape();
    if shape.len() != 2 || shape[0] != labels.len() {
        return Err(EegError::ShapeMismatch(format!(
            "probabilities {shape:?} vs {} labels",
            labels.len()
        )));
    }
    let (b, k) = (shape[0], shape[1]);
    let mut loss = 0.0f64;
    let mut grad = Tensor::<F>::zeros(shape);
    let pd = probs.data();
    let gd = grad.data_mut();
    for (i, &label) in labels.iter().enumerate() {
        if label >= k {
            return Err(EegError::InvalidLabel(format!(
                "label {label} out of range for {k} classes"
            )));
        }
        let p_raw = pd[i * k + label].as_f64();
        // a NaN probability must surface as a NaN loss, not vanish in max()
        let p = if p_raw.is_nan() { f64::NAN } else { p_raw.max(PROB_FLOOR) };
        loss -= p.ln();
        gd[i * k + label] = F::from_f64(-1.0 / (p * b as f64));
    }
    Ok((loss / b as f64, grad))
}

/// Argmax per row with ties broken toward the lowest class index.
pub fn argmax_rows<F: Scalar>(probs: &Tensor<F>) -> Vec<usize> {
    let k = *probs.shape().last().unwrap_or(&1);
    probs
        .data()
        .chunks(k)
        .map(|row| {
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_probs_give_ln_k() {
        let probs = Tensor::<f64>::from_vec(&[2, 4], vec![0.25; 8]).unwrap();
        let (loss, _) = cross_entropy_from_probs(&probs, &[0, 3]).unwrap();
        assert!((loss - (4.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let probs = Tensor::<f64>::from_vec(&[1, 3], vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(argmax_rows(&probs), vec![0]);
    }
}
