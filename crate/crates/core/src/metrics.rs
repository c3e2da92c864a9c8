//! Evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{GedError, Result};

const UNNORMALIZE_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub ktau: f64,
}

fn check_lengths(preds: &[f64], truths: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(GedError::Empty("no predictions to evaluate".into()));
    }
    if preds.len() != truths.len() {
        return Err(GedError::Shape(format!(
            "{} predictions for {} truths",
            preds.len(),
            truths.len()
        )));
    }
    Ok(())
}

pub fn mse(preds: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(preds, truths)?;
    let total: f64 = preds
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(total / preds.len() as f64)
}

/// `(concordant - discordant) / C(n, 2)`. A pair tied in either sequence
/// counts as neither; the denominator still includes it.
pub fn kendall_tau(preds: &[f64], truths: &[f64]) -> Result<f64> {
    check_lengths(preds, truths)?;
    let n = preds.len();
    if n < 2 {
        return Err(GedError::Empty(
            "kendall tau needs at least two items".into(),
        ));
    }
    let mut balance: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let s = (preds[i] - preds[j]).signum() * (truths[i] - truths[j]).signum();
            if preds[i] != preds[j] && truths[i] != truths[j] {
                balance += s as i64;
            }
        }
    }
    Ok(balance as f64 / (n * (n - 1) / 2) as f64)
}

pub fn evaluate_predictions(preds: &[f64], truths: &[f64]) -> Result<Metrics> {
    Ok(Metrics {
        mse: mse(preds, truths)?,
        ktau: kendall_tau(preds, truths)?,
    })
}

/// Converts an exponentially normalised similarity back to a distance:
/// `-((n + n') / 2) ln(s + 1e-7)`.
pub fn unnormalize_score(s: f64, n: usize, n_prime: usize) -> f64 {
    -((n + n_prime) as f64 / 2.0) * (s + UNNORMALIZE_EPS).ln()
}

/// `exp(-2 g / (n + n'))`.
pub fn normalize_score(ged: f64, n: usize, n_prime: usize) -> f64 {
    (-2.0 * ged / (n + n_prime) as f64).exp()
}
