//! One-vs-rest logistic regression by full-batch gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SparseVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegConfig {
    pub l2_strength: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            l2_strength: 1e-4,
            epochs: 300,
            lr: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub dimension: usize,
    /// One weight vector per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogisticModel {
    pub fn scores(&self, x: &SparseVec) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + x.iter().map(|&(c, v)| w.get(c).map_or(0.0, |w| w * v)).sum::<f64>())
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy of class `class` against the rest, plus
/// `l2/2 * ||w||^2`; returns `(loss, d weight, d bias)`.
pub fn logistic_loss_and_gradient(
    weights: &[f64],
    bias: f64,
    features: &[SparseVec],
    labels: &[usize],
    class: usize,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut grad = vec![0.0; weights.len()];
    let mut gb = 0.0;
    let mut loss = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let t = if y == class { 1.0 } else { 0.0 };
        let z = bias + x.iter().map(|&(c, v)| weights[c] * v).sum::<f64>();
        // log(1 + e^z) - t z, computed stably
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - t * z;
        let d = (sigmoid(z) - t) / n;
        gb += d;
        for &(c, v) in x {
            grad[c] += d * v;
        }
    }
    let norm2: f64 = weights.iter().map(|w| w * w).sum();
    for (g, w) in grad.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (loss / n + 0.5 * l2 * norm2, grad, gb)
}

pub fn logreg_train(
    features: &[SparseVec],
    labels: &[usize],
    dimension: usize,
    class_count: usize,
    config: &LogRegConfig,
) -> Result<LogisticModel> {
    if features.len() != labels.len() {
        return Err(Error::argument(format!(
            "{} feature vectors for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut present = vec![false; class_count];
    for &y in labels {
        *present
            .get_mut(y)
            .ok_or_else(|| Error::argument(format!("label {y} >= class count {class_count}")))? = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::Training("training set has fewer than two classes".into()));
    }
    if features.iter().flatten().any(|&(c, _)| c >= dimension) {
        return Err(Error::argument(format!("feature column >= dimension {dimension}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LogisticModel {
        dimension,
        weights: (0..class_count)
            .map(|_| (0..dimension).map(|_| rng.gen_range(-1e-3..1e-3)).collect())
            .collect(),
        bias: vec![0.0; class_count],
    };
    let (lr, l2) = (config.lr, config.l2_strength);
    for class in 0..class_count {
        for _ in 0..config.epochs {
            let w = &model.weights[class];
            // data gradient only; the L2 term is applied implicitly below
            let (_, grad, gb) = logistic_loss_and_gradient(w, model.bias[class], features, labels, class, 0.0);
            let w = &mut model.weights[class];
            for (w, g) in w.iter_mut().zip(&grad) {
                *w = (*w - lr * g) / (1.0 + lr * l2);
            }
            model.bias[class] -= lr * gb;
        }
    }
    Ok(model)
}

/// Highest-scoring class per vector, lowest index on ties.
pub fn logreg_predict(model: &LogisticModel, features: &[SparseVec]) -> Vec<usize> {
    features
        .iter()
        .map(|x| {
            let s = model.scores(x);
            let mut best = 0;
            for (i, &v) in s.iter().enumerate() {
                if v > s[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}
