//! Multinomial distributions over a finite vocabulary and the information
//! measures built on them.
//!
//! All logarithms are base 2, so entropies and divergences are in bits and a
//! uniform binary prior has entropy exactly 1. Terms of the form `0 · log 0`
//! are taken to be zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability vector.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Default add-alpha smoothing for conditionals estimated from text.
pub const DEFAULT_SMOOTHING: f64 = 0.01;

fn check_probabilities(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// A probability distribution over vocabulary ids `0..dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Multinomial {
    probs: Vec<f64>,
}

impl Multinomial {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Degenerate("multinomial over an empty vocabulary".into()));
        }
        check_probabilities(&probs)?;
        Ok(Multinomial { probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidProbability { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("weights sum to zero".into()));
        }
        Multinomial::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Degenerate("multinomial over an empty vocabulary".into()));
        }
        Ok(Multinomial {
            probs: vec![1.0 / dim as f64; dim],
        })
    }

    /// Point mass on `index`.
    pub fn point(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::FeatureOutOfRange { index, dim });
        }
        let mut probs = vec![0.0; dim];
        probs[index] = 1.0;
        Ok(Multinomial { probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }
}

impl TryFrom<Vec<f64>> for Multinomial {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Multinomial::new(probs)
    }
}

impl From<Multinomial> for Vec<f64> {
    fn from(m: Multinomial) -> Self {
        m.probs
    }
}

/// Normalized class (or branch) weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Prior {
    weights: Vec<f64>,
}

impl Prior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Degenerate("empty prior".into()));
        }
        check_probabilities(&weights)?;
        Ok(Prior { weights })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Degenerate("empty prior".into()));
        }
        Ok(Prior {
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Empirical prior from per-class counts.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::Degenerate("all class counts are zero".into()));
        }
        Prior::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    /// Two-component prior proportional to `(a, b)`.
    pub fn binary(a: f64, b: f64) -> Result<Self> {
        let total = a + b;
        if !(total > 0.0) || a < 0.0 || b < 0.0 {
            return Err(Error::Degenerate(format!("invalid branch weights ({a}, {b})")));
        }
        Prior::new(vec![a / total, b / total])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.weights)
    }
}

impl TryFrom<Vec<f64>> for Prior {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Prior::new(weights)
    }
}

impl From<Prior> for Vec<f64> {
    fn from(p: Prior) -> Self {
        p.weights
    }
}

/// Sparse token counts, sorted by vocabulary id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    entries: Vec<(usize, u64)>,
    total: u64,
}

impl CountVector {
    pub fn new() -> Self {
        CountVector::default()
    }

    /// Builds a vector from `(id, count)` pairs; repeated ids accumulate and
    /// zero counts are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u64)>>(pairs: I) -> Self {
        let mut map = BTreeMap::new();
        for (id, count) in pairs {
            *map.entry(id).or_insert(0u64) += count;
        }
        let entries: Vec<(usize, u64)> = map.into_iter().filter(|&(_, c)| c > 0).collect();
        let total = entries.iter().map(|&(_, c)| c).sum();
        CountVector { entries, total }
    }

    /// Counts each occurrence of an id once.
    pub fn from_ids<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        CountVector::from_pairs(ids.into_iter().map(|id| (id, 1)))
    }

    pub fn from_dense(counts: &[u64]) -> Self {
        CountVector::from_pairs(counts.iter().copied().enumerate())
    }

    pub fn entries(&self) -> &[(usize, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: usize) -> u64 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    /// One past the largest id present, or zero when empty.
    pub fn max_index_bound(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i + 1)
    }

    /// Adds `other` into `self`.
    pub fn accumulate(&mut self, other: &CountVector) {
        if other.is_empty() {
            return;
        }
        let mut merged = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(ia, ca)), Some(&&(ib, cb))) => {
                    if ia < ib {
                        merged.push((ia, ca));
                        a.next();
                    } else if ib < ia {
                        merged.push((ib, cb));
                        b.next();
                    } else {
                        merged.push((ia, ca + cb));
                        a.next();
                        b.next();
                    }
                }
                (Some(&&e), None) => {
                    merged.push(e);
                    a.next();
                }
                (None, Some(&&e)) => {
                    merged.push(e);
                    b.next();
                }
                (None, None) => break,
            }
        }
        self.entries = merged;
        self.total += other.total;
    }
}

/// Add-alpha maximum-likelihood estimate:
/// `p[i] = (counts[i] + alpha) / (total + alpha · dim)`.
pub fn estimate_ml(counts: &CountVector, dim: usize, alpha: f64) -> Result<Multinomial> {
    if dim == 0 {
        return Err(Error::Degenerate("dimension must be at least 1".into()));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Degenerate(format!("smoothing weight {alpha} must be >= 0")));
    }
    if counts.max_index_bound() > dim {
        return Err(Error::FeatureOutOfRange {
            index: counts.max_index_bound() - 1,
            dim,
        });
    }
    let denom = counts.total() as f64 + alpha * dim as f64;
    if !(denom > 0.0) {
        return Err(Error::Degenerate(
            "zero total count with no smoothing".into(),
        ));
    }
    let mut probs = vec![alpha / denom; dim];
    for &(id, count) in counts.entries() {
        probs[id] = (count as f64 + alpha) / denom;
    }
    Multinomial::new(probs)
}

pub(crate) fn entropy_of(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Shannon entropy in bits.
pub fn entropy(p: &Multinomial) -> f64 {
    entropy_of(&p.probs)
}

/// `D(p ‖ q)` in bits. Fails when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &Multinomial, q: &Multinomial) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let mut total = 0.0;
    for (index, (&pi, &qi)) in p.probs.iter().zip(&q.probs).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::Support { index, p: pi });
            }
            total += pi * (pi / qi).log2();
        }
    }
    Ok(total.max(0.0))
}

fn check_family(prior: &Prior, dists: &[Multinomial]) -> Result<usize> {
    if prior.len() != dists.len() {
        return Err(Error::ArityMismatch {
            expected: prior.len(),
            found: dists.len(),
        });
    }
    if dists.len() < 2 {
        return Err(Error::TooFewClasses {
            needed: 2,
            found: dists.len(),
        });
    }
    let dim = dists[0].dim();
    for d in &dists[1..] {
        if d.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d.dim(),
            });
        }
    }
    Ok(dim)
}

/// The prior-weighted mixture `Σ π_i P_i`, the minimizer of
/// `Σ π_i D(P_i ‖ Q)` over `Q`.
pub fn mutual_source(prior: &Prior, dists: &[Multinomial]) -> Result<Multinomial> {
    let dim = check_family(prior, dists)?;
    let mut probs = vec![0.0; dim];
    for (&w, d) in prior.weights.iter().zip(dists) {
        if w == 0.0 {
            continue;
        }
        for (acc, &p) in probs.iter_mut().zip(&d.probs) {
            *acc += w * p;
        }
    }
    Multinomial::new(probs)
}

/// Generalized Jensen-Shannon divergence `H(Σ π_i P_i) − Σ π_i H(P_i)`.
pub fn js_divergence(prior: &Prior, dists: &[Multinomial]) -> Result<f64> {
    let mixture = mutual_source(prior, dists)?;
    let weighted: f64 = prior
        .weights
        .iter()
        .zip(dists)
        .map(|(&w, d)| w * entropy(d))
        .sum();
    // Clamp rounding noise into [0, H(π)].
    Ok((entropy(&mixture) - weighted).clamp(0.0, prior.entropy()))
}

/// The same divergence as [`js_divergence`], evaluated as the prior-weighted
/// KL divergence of each component to the mutual source.
pub fn js_divergence_kl(prior: &Prior, dists: &[Multinomial]) -> Result<f64> {
    let mixture = mutual_source(prior, dists)?;
    let mut total = 0.0;
    for (&w, d) in prior.weights.iter().zip(dists) {
        if w > 0.0 {
            total += w * kl_divergence(d, &mixture)?;
        }
    }
    Ok(total)
}
