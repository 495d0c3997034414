//! Loss functions with analytic gradients: binary cross-entropy on logits,
//! multiclass cross-entropy, and mean squared error.

use crate::error::{Error, Result};

use super::tensor::{num, Scalar};

fn sigmoid<F: Scalar>(z: F) -> F {
    let one = F::one();
    if z >= F::zero() {
        one / (one + (-z).exp())
    } else {
        let e = z.exp();
        e / (one + e)
    }
}

/// Numerically stable binary cross-entropy on a raw logit:
/// `max(z, 0) - z·y + ln(1 + e^(-|z|))`, gradient `sigmoid(z) - y`.
pub fn loss_bce_logits<F: Scalar>(z: F, y: F) -> Result<(F, F)> {
    if !z.is_finite() {
        return Err(Error::Diverged("non-finite logit".into()));
    }
    let loss = z.max(F::zero()) - z * y + (-z.abs()).exp().ln_1p();
    let grad = sigmoid(z) - y;
    Ok((loss, grad))
}

/// `-ln softmax(scores)[class]` with log-sum-exp stabilization; the gradient
/// is `softmax(scores) - one_hot(class)`.
pub fn loss_cross_entropy<F: Scalar>(scores: &[F], class: usize) -> Result<(F, Vec<F>)> {
    if scores.len() < 2 {
        return Err(Error::InvalidArgument(
            "cross-entropy needs at least 2 scores".into(),
        ));
    }
    if class >= scores.len() {
        return Err(Error::InvalidArgument(format!(
            "class {class} out of range for {} scores",
            scores.len()
        )));
    }
    let max = scores.iter().cloned().fold(F::neg_infinity(), F::max);
    if !max.is_finite() {
        return Err(Error::Diverged("non-finite score".into()));
    }
    let sum_exp: F = scores.iter().map(|&s| (s - max).exp()).sum();
    let log_sum = sum_exp.ln() + max;
    let loss = log_sum - scores[class];
    let grad: Vec<F> = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let p = (s - log_sum).exp();
            if i == class {
                p - F::one()
            } else {
                p
            }
        })
        .collect();
    Ok((loss, grad))
}

/// Mean squared error `mean((pred - target)²)`, gradient `2(pred - target)/n`.
pub fn loss_mse<F: Scalar>(pred: &[F], target: &[F]) -> Result<(F, Vec<F>)> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            got: pred.len(),
        });
    }
    let n = num::<F>(pred.len() as f64);
    let mut loss = F::zero();
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let d = p - t;
        loss = loss + d * d;
        grad.push(num::<F>(2.0) * d / n);
    }
    Ok((loss / n, grad))
}
