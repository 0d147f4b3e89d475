//! Binary base learners. Both report the probability of the right-hand
//! ("positive") side.

use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{Error, Result};
use crate::multinomial::{estimate_ml, CountVector, Multinomial, Prior, DEFAULT_SMOOTHING};

/// Anything that scores a sample with the probability of the right branch.
pub trait BinaryScorer {
    fn predict_proba(&self, x: &CountVector) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    /// Multinomial likelihood ratio with smoothed conditionals.
    #[default]
    Generative,
    /// L2-regularized logistic regression.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Add-alpha smoothing of generative conditionals.
    pub smoothing: f64,
    pub l2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            smoothing: DEFAULT_SMOOTHING,
            l2: 1e-4,
            learning_rate: 2.0,
            epochs: 300,
        }
    }
}

/// `σ(right − left)` for two log scores. The smaller tail is rounded to a
/// multiple of 2^-53 so that `p` and `1 − p` are both exact and swapping
/// the arguments yields exactly `1 − p`.
fn posterior_right(log_left: f64, log_right: f64) -> f64 {
    if log_left == f64::NEG_INFINITY && log_right == f64::NEG_INFINITY {
        return 0.5;
    }
    const SCALE: f64 = (1u64 << 53) as f64;
    let d = log_left - log_right;
    let s = (SCALE / (1.0 + d.abs().exp())).round() / SCALE;
    if d > 0.0 {
        s
    } else if d < 0.0 {
        1.0 - s
    } else {
        0.5
    }
}

/// Posterior of the right branch under two multinomial class models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerativeModel {
    /// `(left, right)` branch prior.
    pub prior: Prior,
    pub left: Multinomial,
    pub right: Multinomial,
}

impl GenerativeModel {
    pub fn new(prior: Prior, left: Multinomial, right: Multinomial) -> Result<Self> {
        if prior.len() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: prior.len(),
            });
        }
        if left.dim() != right.dim() {
            return Err(Error::DimensionMismatch {
                expected: left.dim(),
                found: right.dim(),
            });
        }
        Ok(GenerativeModel { prior, left, right })
    }

    fn log_score(prior: f64, dist: &Multinomial, x: &CountVector) -> f64 {
        let mut score = prior.ln();
        for &(id, count) in x.entries() {
            if id < dist.dim() {
                score += count as f64 * dist.get(id).ln();
            }
        }
        score
    }
}

impl BinaryScorer for GenerativeModel {
    fn predict_proba(&self, x: &CountVector) -> f64 {
        posterior_right(
            Self::log_score(self.prior.get(0), &self.left, x),
            Self::log_score(self.prior.get(1), &self.right, x),
        )
    }
}

/// Logistic regression over L2-normalized count vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn normalized(x: &CountVector) -> Vec<(usize, f64)> {
    let norm = x
        .entries()
        .iter()
        .map(|&(_, c)| (c as f64) * (c as f64))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Vec::new();
    }
    x.entries()
        .iter()
        .map(|&(id, c)| (id, c as f64 / norm))
        .collect()
}

impl LinearModel {
    fn margin(&self, x: &[(usize, f64)]) -> f64 {
        self.bias
            + x.iter()
                .filter(|&&(id, _)| id < self.weights.len())
                .map(|&(id, v)| self.weights[id] * v)
                .sum::<f64>()
    }

    fn fit(
        positives: &[&Sample],
        negatives: &[&Sample],
        dim: usize,
        hyper: &Hyperparams,
    ) -> LinearModel {
        let data: Vec<(Vec<(usize, f64)>, f64)> = negatives
            .iter()
            .map(|s| (normalized(&s.features), 0.0))
            .chain(positives.iter().map(|s| (normalized(&s.features), 1.0)))
            .collect();
        let n = data.len() as f64;
        let mut model = LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        };
        let mut grad = vec![0.0; dim];
        for _ in 0..hyper.epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_bias = 0.0;
            for (x, y) in &data {
                let residual = posterior_right(0.0, model.margin(x)) - y;
                grad_bias += residual;
                for &(id, v) in x {
                    grad[id] += residual * v;
                }
            }
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= hyper.learning_rate * (g / n + hyper.l2 * *w);
            }
            model.bias -= hyper.learning_rate * grad_bias / n;
        }
        model
    }
}

impl BinaryScorer for LinearModel {
    fn predict_proba(&self, x: &CountVector) -> f64 {
        posterior_right(0.0, self.margin(&normalized(x)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BinaryModel {
    Generative(GenerativeModel),
    Linear(LinearModel),
}

impl BinaryScorer for BinaryModel {
    fn predict_proba(&self, x: &CountVector) -> f64 {
        match self {
            BinaryModel::Generative(m) => m.predict_proba(x),
            BinaryModel::Linear(m) => m.predict_proba(x),
        }
    }
}

/// Trains a model separating `negatives` (left, probability 0) from
/// `positives` (right, probability 1).
pub fn train_binary(
    positives: &[&Sample],
    negatives: &[&Sample],
    dim: usize,
    kind: LearnerKind,
    hyper: &Hyperparams,
) -> Result<BinaryModel> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::Training(format!(
            "both sides need samples ({} positive, {} negative)",
            positives.len(),
            negatives.len()
        )));
    }
    match kind {
        LearnerKind::Generative => {
            let pool = |side: &[&Sample]| {
                let mut counts = CountVector::new();
                for s in side {
                    counts.accumulate(&s.features);
                }
                estimate_ml(&counts, dim, hyper.smoothing)
            };
            let prior = Prior::binary(negatives.len() as f64, positives.len() as f64)?;
            Ok(BinaryModel::Generative(GenerativeModel::new(
                prior,
                pool(negatives)?,
                pool(positives)?,
            )?))
        }
        LearnerKind::Linear => Ok(BinaryModel::Linear(LinearModel::fit(
            positives, negatives, dim, hyper,
        ))),
    }
}
