use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 1e-2;
pub const DEFAULT_EPOCHS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions { lambda: DEFAULT_LAMBDA, epochs: DEFAULT_EPOCHS, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn decision(&self, x: &[f32]) -> f64 {
        self.weights.iter().zip(x).map(|(w, &v)| w * v as f64).sum::<f64>() + self.bias
    }

    /// Positive class iff the decision value is strictly positive.
    pub fn predict(&self, x: &[f32]) -> bool {
        self.decision(x) > 0.0
    }

    pub fn accuracy(&self, xs: &[&[f32]], ys: &[bool]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let hits = xs.iter().zip(ys).filter(|(x, &y)| self.predict(x) == y).count();
        hits as f64 / xs.len() as f64
    }

    /// Regularized hinge objective `lambda/2 |w|^2 + mean hinge`, with the
    /// bias treated as an extra weight on a constant feature.
    pub fn objective(&self, xs: &[&[f32]], ys: &[bool], lambda: f64) -> f64 {
        let norm2 = self.weights.iter().map(|w| w * w).sum::<f64>() + self.bias * self.bias;
        let hinge = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| (1.0 - sign(y) * self.decision(x)).max(0.0))
            .sum::<f64>()
            / xs.len() as f64;
        0.5 * lambda * norm2 + hinge
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: LinearModel,
    /// Objective of the iterate reached at the end of each epoch.
    pub epoch_objective: Vec<f64>,
    /// Objective of the returned model after each epoch (best end-of-epoch
    /// iterate so far).
    pub best_objective: Vec<f64>,
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// Stochastic subgradient descent on the L2-regularized hinge loss with
/// step `1 / (lambda t)` and projection onto the ball of radius
/// `1 / sqrt(lambda)`. The returned model is the end-of-epoch iterate with
/// the lowest objective.
pub fn train_linear(xs: &[&[f32]], ys: &[bool], opts: &TrainOptions) -> Result<TrainReport> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("feature and label counts differ"));
    }
    if !ys.iter().any(|&y| y) || !ys.iter().any(|&y| !y) {
        return Err(Error::invalid("training data must contain both classes"));
    }
    if opts.lambda.is_nan() || opts.lambda <= 0.0 || opts.epochs == 0 {
        return Err(Error::invalid("lambda must be positive and epochs at least 1"));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::invalid("training vectors differ in length"));
    }

    let lambda = opts.lambda;
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut t = 0u64;

    let mut best: Option<(f64, LinearModel)> = None;
    let mut epoch_objective = Vec::with_capacity(opts.epochs);
    let mut best_objective = Vec::with_capacity(opts.epochs);

    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let y = sign(ys[i]);
            let x = xs[i];
            let margin = y * (w.iter().zip(x).map(|(w, &v)| w * v as f64).sum::<f64>() + b);
            let shrink = 1.0 - eta * lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            b *= shrink;
            if margin < 1.0 {
                for (wj, &v) in w.iter_mut().zip(x) {
                    *wj += eta * y * v as f64;
                }
                b += eta * y;
            }
            let norm = (w.iter().map(|v| v * v).sum::<f64>() + b * b).sqrt();
            if norm > radius {
                let s = radius / norm;
                for wj in w.iter_mut() {
                    *wj *= s;
                }
                b *= s;
            }
        }
        let model = LinearModel { weights: w.clone(), bias: b };
        let obj = model.objective(xs, ys, lambda);
        epoch_objective.push(obj);
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, model));
        }
        best_objective.push(best.as_ref().unwrap().0);
    }
    Ok(TrainReport { model: best.unwrap().1, epoch_objective, best_objective })
}
