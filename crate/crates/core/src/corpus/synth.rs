//! Synthetic multinomial corpora with controllable class separation.
//!
//! Every class conditional is `(1 − λ)·base + λ·own_i` with
//! `λ = separation / (1 + separation)`. `base` is a flat Dirichlet draw
//! shared by all classes; `own_i` puts half its mass on symbol `i mod dim`
//! and spreads the rest by a Dirichlet(0.5) draw. Separation 0 makes all
//! classes identical, and pairwise divergences grow strictly with
//! separation.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_distr::Gamma;

use super::text::PUNCTUATION;
use crate::classify::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::multinomial::{CountVector, Multinomial, Prior};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub k: usize,
    pub dim: usize,
    pub tokens_per_chunk: usize,
    pub chunks_per_class: usize,
    pub separation: f64,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub dataset: Dataset,
    pub priors: Prior,
    /// The generating class conditionals.
    pub conditionals: Vec<Multinomial>,
}

fn dirichlet<R: Rng + ?Sized>(dim: usize, alpha: f64, rng: &mut R) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut draw: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draw.iter().sum();
    if total > 0.0 {
        draw.iter_mut().for_each(|x| *x /= total);
    } else {
        draw = vec![1.0 / dim as f64; dim];
    }
    draw
}

/// Class conditionals only. The random draws do not depend on
/// `separation`, so one seed gives a family indexed by separation.
pub fn synth_conditionals<R: Rng + ?Sized>(
    k: usize,
    dim: usize,
    separation: f64,
    rng: &mut R,
) -> Result<Vec<Multinomial>> {
    if k == 0 || dim == 0 {
        return Err(Error::Degenerate("k and dim must be at least 1".into()));
    }
    if !(separation >= 0.0) {
        return Err(Error::Degenerate(format!("separation {separation} must be >= 0")));
    }
    let lambda = if separation.is_infinite() {
        1.0
    } else {
        separation / (1.0 + separation)
    };
    let base = dirichlet(dim, 1.0, rng);
    (0..k)
        .map(|class| {
            let mut own: Vec<f64> = dirichlet(dim, 0.5, rng).iter().map(|x| 0.5 * x).collect();
            own[class % dim] += 0.5;
            Multinomial::from_weights(
                &base
                    .iter()
                    .zip(&own)
                    .map(|(b, o)| (1.0 - lambda) * b + lambda * o)
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// Draws `n` token ids from `dist`.
pub fn draw_tokens<R: Rng + ?Sized>(dist: &Multinomial, n: usize, rng: &mut R) -> Vec<usize> {
    let sampler = WeightedIndex::new(dist.probs()).expect("valid distribution");
    (0..n).map(|_| sampler.sample(rng)).collect()
}

/// Balanced labeled chunks drawn from synthetic class conditionals.
pub fn synth_corpus<R: Rng + ?Sized>(config: &SynthConfig, rng: &mut R) -> Result<SynthCorpus> {
    if config.tokens_per_chunk == 0 || config.chunks_per_class == 0 {
        return Err(Error::Degenerate("all counts must be at least 1".into()));
    }
    let conditionals = synth_conditionals(config.k, config.dim, config.separation, rng)?;
    let mut samples = Vec::with_capacity(config.k * config.chunks_per_class);
    for (class, dist) in conditionals.iter().enumerate() {
        let sampler = WeightedIndex::new(dist.probs()).expect("valid distribution");
        for _ in 0..config.chunks_per_class {
            let ids = (0..config.tokens_per_chunk).map(|_| sampler.sample(rng));
            samples.push(Sample::new(CountVector::from_ids(ids), class));
        }
    }
    Ok(SynthCorpus {
        dataset: Dataset::new(config.dim, config.k, samples)?,
        priors: Prior::uniform(config.k)?,
        conditionals,
    })
}

/// Renders token ids as text: the first ids map to punctuation symbols and
/// the rest to words `w<id>`.
pub fn render_text(ids: &[usize]) -> String {
    ids.iter()
        .map(|&id| match PUNCTUATION.get(id) {
            Some(c) => c.to_string(),
            None => format!("w{id}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
