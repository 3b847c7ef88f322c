//! Logistic fit of a k-sum model from challenge/response pairs.

use super::simpuf::{ChallengePolicy, SimPuf, SimPufKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub loss_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            max_epochs: 20_000,
            loss_tol: 1e-7,
        }
    }
}

/// Outcome of [`fit_lapuf_model`]. Stops at 100% training accuracy, on a
/// loss plateau, or after `max_epochs`. Weights are scaled to unit L2 norm; the
/// norm reached by gradient descent is kept in `scale`.
#[derive(Debug, Clone)]
pub struct LapufFit {
    pub weights: Vec<f64>,
    pub scale: f64,
    pub epochs: usize,
    pub train_accuracy: f64,
}

impl LapufFit {
    pub fn into_simpuf(self, condition: &str, k: usize, policy: ChallengePolicy) -> Result<SimPuf> {
        SimPuf::new(
            SimPufKind::LapufModel {
                weights: self.weights,
                fitted: true,
                scale: self.scale,
            },
            condition,
            k,
            policy,
        )
    }
}

/// Fits weights over features `φ_i(c) = (-1)^{c_i}` to the labelled CRPs.
pub fn fit_lapuf_model(crps: &[(Vec<bool>, bool)]) -> Result<LapufFit> {
    fit_lapuf_model_with(crps, FitOptions::default())
}

pub fn fit_lapuf_model_with(crps: &[(Vec<bool>, bool)], opts: FitOptions) -> Result<LapufFit> {
    if crps.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 training CRPs, got {}",
            crps.len()
        )));
    }
    let stages = crps[0].0.len();
    if stages == 0 || crps.iter().any(|(c, _)| c.len() != stages) {
        return Err(Error::Invalid("training challenges must share a positive length".into()));
    }
    let n = crps.len();
    let features: Vec<f64> = crps
        .iter()
        .flat_map(|(c, _)| c.iter().map(|b| if *b { -1.0 } else { 1.0 }))
        .collect();
    // target 1 for response bit 0 (positive confidence)
    let targets: Vec<f64> = crps.iter().map(|(_, bit)| if *bit { 0.0 } else { 1.0 }).collect();

    let mut w = vec![0.0; stages];
    let mut grad = vec![0.0; stages];
    let mut prev_loss = f64::INFINITY;
    let mut accuracy = 0.0;
    for epoch in 1..=opts.max_epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut loss = 0.0;
        let mut correct = 0usize;
        for (row, &y) in features.chunks_exact(stages).zip(&targets) {
            let s: f64 = row.iter().zip(&w).map(|(x, wi)| x * wi).sum();
            if (s >= 0.0) == (y == 1.0) {
                correct += 1;
            }
            let margin = if y == 1.0 { s } else { -s };
            loss += softplus(-margin);
            let r = sigmoid(s) - y;
            grad.iter_mut().zip(row).for_each(|(g, x)| *g += r * x);
        }
        loss /= n as f64;
        if !loss.is_finite() {
            return Err(Error::FitDiverged { epochs: epoch, accuracy });
        }
        accuracy = correct as f64 / n as f64;
        if correct == n || (prev_loss - loss).abs() < opts.loss_tol {
            return Ok(finish(w, epoch, accuracy));
        }
        prev_loss = loss;
        let step = opts.learning_rate / n as f64;
        w.iter_mut().zip(&grad).for_each(|(wi, g)| *wi -= step * g);
    }
    Ok(finish(w, opts.max_epochs, accuracy))
}

fn finish(w: Vec<f64>, epochs: usize, train_accuracy: f64) -> LapufFit {
    let scale = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let weights = if scale > 0.0 {
        w.iter().map(|x| x / scale).collect()
    } else {
        w
    };
    LapufFit {
        weights,
        scale,
        epochs,
        train_accuracy,
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
