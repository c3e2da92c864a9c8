//! MSE training with Adam and early stopping, plus batch prediction and
//! evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledPair;
use crate::divergence::{ged_score, ged_score_and_gradient, SurrogateChoice};
use crate::encoder::{ModelParams, Weights};
use crate::error::{GedError, Result};
use crate::graph::CostConfig;
use crate::matrix::Matrix;
use crate::metrics::{evaluate_predictions, Metrics};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// L2 penalty added to the gradient before the Adam moments.
    pub weight_decay: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    /// Train on a fresh random subset of this many pairs each epoch.
    pub pairs_per_epoch: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            weight_decay: 5e-4,
            batch_size: 64,
            max_epochs: 300,
            patience: 100,
            pairs_per_epoch: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.weight_decay >= 0.0
            && self.batch_size > 0
            && self.pairs_per_epoch != Some(0);
        if !ok {
            return Err(GedError::Parse(format!(
                "invalid training configuration {self:?}"
            )));
        }
        Ok(())
    }
}

/// Adam with bias-corrected moments.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: i32,
    m: Vec<Matrix>,
    v: Vec<Matrix>,
}

impl Adam {
    pub fn new(params: &Weights<Matrix>, learning_rate: f64, weight_decay: f64) -> Self {
        let zeros: Vec<Matrix> = params
            .tensors()
            .iter()
            .map(|t| Matrix::zeros(t.rows(), t.cols()))
            .collect();
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn update(&mut self, params: &Weights<Matrix>, grads: &Weights<Matrix>) -> Weights<Matrix> {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let mut out = Vec::with_capacity(self.m.len());
        for (i, (p, g)) in params
            .tensors()
            .into_iter()
            .zip(grads.tensors())
            .enumerate()
        {
            let mut next = p.clone();
            let (m, v) = (self.m[i].data_mut(), self.v[i].data_mut());
            for (k, x) in next.data_mut().iter_mut().enumerate() {
                let g = g.data()[k] + self.weight_decay * *x;
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                *x -= self.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + self.eps);
            }
            out.push(next);
        }
        Weights::from_tensors(params, out).expect("layout preserved")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mse: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_mse: Option<f64>,
    pub stopped_early: bool,
}

fn shared_costs(pairs: &[LabeledPair]) -> Result<CostConfig> {
    let first = pairs
        .first()
        .ok_or_else(|| GedError::Empty("no pairs".into()))?
        .costs;
    if pairs.iter().any(|p| p.costs != first) {
        return Err(GedError::InvalidCosts(
            "pairs are labelled under different cost settings".into(),
        ));
    }
    Ok(first)
}

pub fn predict(
    pairs: &[LabeledPair],
    params: &ModelParams,
    choice: SurrogateChoice,
) -> Result<Vec<f64>> {
    params.validate()?;
    pairs
        .par_iter()
        .map(|p| ged_score(&p.pair, params, &p.costs, choice))
        .collect()
}

pub fn evaluate(
    pairs: &[LabeledPair],
    params: &ModelParams,
    choice: SurrogateChoice,
) -> Result<Metrics> {
    if pairs.is_empty() {
        return Err(GedError::Empty("no pairs to evaluate".into()));
    }
    let preds = predict(pairs, params, choice)?;
    let truths: Vec<f64> = pairs.iter().map(|p| p.ged).collect();
    evaluate_predictions(&preds, &truths)
}

/// MSE of always predicting `value`.
pub fn constant_mse(pairs: &[LabeledPair], value: f64) -> f64 {
    pairs.iter().map(|p| (p.ged - value).powi(2)).sum::<f64>() / pairs.len().max(1) as f64
}

pub fn mean_ged(pairs: &[LabeledPair]) -> f64 {
    pairs.iter().map(|p| p.ged).sum::<f64>() / pairs.len().max(1) as f64
}

/// Returns the parameters with the lowest validation MSE (the initial ones
/// when no epoch runs) and the per-epoch history.
pub fn train(
    train_pairs: &[LabeledPair],
    val_pairs: &[LabeledPair],
    init: ModelParams,
    config: &TrainConfig,
    choice: SurrogateChoice,
) -> Result<(ModelParams, TrainHistory)> {
    train_with_callback(train_pairs, val_pairs, init, config, choice, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with_callback(
    train_pairs: &[LabeledPair],
    val_pairs: &[LabeledPair],
    init: ModelParams,
    config: &TrainConfig,
    choice: SurrogateChoice,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    init.validate()?;
    let mut history = TrainHistory::default();
    if config.max_epochs == 0 {
        return Ok((init, history));
    }
    let costs = shared_costs(train_pairs)?;
    if !val_pairs.is_empty() && shared_costs(val_pairs)? != costs {
        return Err(GedError::InvalidCosts(
            "train and validation pairs use different costs".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = init;
    let mut best = params.clone();
    let mut best_val = f64::INFINITY;
    let mut adam = Adam::new(&params.weights, config.learning_rate, config.weight_decay);
    let mut order: Vec<usize> = (0..train_pairs.len()).collect();

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let take = config
            .pairs_per_epoch
            .map_or(order.len(), |k| k.min(order.len()));
        let mut loss_sum = 0.0;
        for (batch, chunk) in order[..take].chunks(config.batch_size).enumerate() {
            let results: Vec<(f64, Weights<Matrix>)> = chunk
                .par_iter()
                .map(|&i| {
                    let p = &train_pairs[i];
                    ged_score_and_gradient(&p.pair, &params, &costs, choice)
                        .map(|(s, g)| (s - p.ged, g))
                })
                .collect::<Result<_>>()?;
            let scale = 2.0 / chunk.len() as f64;
            let mut batch_loss = 0.0;
            let mut grad: Vec<Matrix> = params
                .weights
                .tensors()
                .iter()
                .map(|t| Matrix::zeros(t.rows(), t.cols()))
                .collect();
            for (residual, g) in &results {
                batch_loss += residual * residual;
                for (acc, t) in grad.iter_mut().zip(g.tensors()) {
                    for (a, x) in acc.data_mut().iter_mut().zip(t.data()) {
                        *a += scale * residual * x;
                    }
                }
            }
            if !batch_loss.is_finite() {
                return Err(GedError::NanLoss { epoch, batch });
            }
            loss_sum += batch_loss;
            let grad = Weights::from_tensors(&params.weights, grad)?;
            params.weights = adam.update(&params.weights, &grad);
            if !params.weights.is_finite() {
                return Err(GedError::NanLoss { epoch, batch });
            }
        }
        let train_loss = loss_sum / take.max(1) as f64;
        let val_mse = if val_pairs.is_empty() {
            train_loss
        } else {
            let preds = predict(val_pairs, &params, choice)?;
            let truths: Vec<f64> = val_pairs.iter().map(|p| p.ged).collect();
            crate::metrics::mse(&preds, &truths)?
        };
        let record = EpochRecord {
            epoch,
            train_loss,
            val_mse,
        };
        on_epoch(&record);
        history.epochs.push(record);
        if val_mse < best_val {
            best_val = val_mse;
            best = params.clone();
            history.best_epoch = Some(epoch);
            history.best_val_mse = Some(val_mse);
        } else if epoch - history.best_epoch.unwrap_or(0) >= config.patience {
            history.stopped_early = true;
            break;
        }
    }
    Ok((best, history))
}
