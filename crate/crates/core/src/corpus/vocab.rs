use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::text::{Chunk, Token};
use crate::error::{Error, Result};
use crate::multinomial::CountVector;

/// The projected feature space: the top unigrams (ids `0..U`) followed by
/// the indexed bigrams of projected text (ids `U..U+B`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyParts", into = "VocabularyParts")]
pub struct Vocabulary {
    tokens: Vec<Token>,
    bigrams: Vec<(usize, usize)>,
    index: HashMap<Token, usize>,
    bigram_index: HashMap<(usize, usize), usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyParts {
    tokens: Vec<Token>,
    bigrams: Vec<(usize, usize)>,
}

impl From<VocabularyParts> for Vocabulary {
    fn from(parts: VocabularyParts) -> Self {
        let mut vocab = Vocabulary::from_ranked(parts.tokens);
        vocab.set_bigrams(parts.bigrams);
        vocab
    }
}

impl From<Vocabulary> for VocabularyParts {
    fn from(v: Vocabulary) -> Self {
        VocabularyParts {
            tokens: v.tokens,
            bigrams: v.bigrams,
        }
    }
}

impl Vocabulary {
    /// Tokens in rank order; later duplicates are ignored.
    pub fn from_ranked(tokens: Vec<Token>) -> Self {
        let mut index = HashMap::with_capacity(tokens.len());
        let mut kept = Vec::with_capacity(tokens.len());
        for t in tokens {
            if !index.contains_key(&t) {
                index.insert(t.clone(), kept.len());
                kept.push(t);
            }
        }
        Vocabulary {
            tokens: kept,
            bigrams: Vec::new(),
            index,
            bigram_index: HashMap::new(),
        }
    }

    fn set_bigrams(&mut self, bigrams: Vec<(usize, usize)>) {
        self.bigram_index = bigrams
            .iter()
            .enumerate()
            .map(|(i, &pair)| (pair, i))
            .collect();
        self.bigrams = bigrams;
    }

    /// Indexes every bigram occurring in the projected sequences, in
    /// ascending `(first, second)` id order.
    pub fn index_bigrams<'a, I>(&mut self, projected: I)
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut pairs = BTreeSet::new();
        for seq in projected {
            pairs.extend(seq.windows(2).map(|w| (w[0], w[1])));
        }
        self.set_bigrams(pairs.into_iter().collect());
    }

    pub fn unigram_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn bigram_count(&self) -> usize {
        self.bigrams.len()
    }

    /// Size of the feature space.
    pub fn dim(&self) -> usize {
        self.tokens.len() + self.bigrams.len()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn bigrams(&self) -> &[(usize, usize)] {
        &self.bigrams
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Feature id of a bigram, if indexed.
    pub fn bigram_feature(&self, first: usize, second: usize) -> Option<usize> {
        self.bigram_index
            .get(&(first, second))
            .map(|&i| self.tokens.len() + i)
    }

    /// Unigram and bigram features of one chunk.
    pub fn featurize(&self, chunk: &Chunk) -> CountVector {
        extract_features(&project(chunk, self), self)
    }

    /// One token per line in rank order.
    pub fn unigram_lines(&self) -> String {
        self.tokens.iter().map(|t| format!("{t}\n")).collect()
    }

    /// One `first second` token pair per line in feature order.
    pub fn bigram_lines(&self) -> String {
        self.bigrams
            .iter()
            .map(|&(a, b)| format!("{} {}\n", self.tokens[a], self.tokens[b]))
            .collect()
    }
}

/// Result of vocabulary construction.
#[derive(Debug, Clone)]
pub struct VocabularyBuild {
    pub vocabulary: Vocabulary,
    /// The corpus had fewer distinct tokens than requested.
    pub short: bool,
}

/// The `top_k` most frequent tokens, by descending frequency and then
/// lexicographically.
pub fn build_vocabulary(chunks: &[&Chunk], top_k: usize) -> Result<VocabularyBuild> {
    if top_k == 0 {
        return Err(Error::Degenerate("top_k must be at least 1".into()));
    }
    let counts: HashMap<&str, u64> = chunks
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<&str, u64>, chunk| {
            for t in &chunk.tokens {
                *acc.entry(t.as_str()).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (t, c) in b {
                *a.entry(t).or_insert(0) += c;
            }
            a
        });
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let short = ranked.len() < top_k;
    ranked.truncate(top_k);
    Ok(VocabularyBuild {
        vocabulary: Vocabulary::from_ranked(ranked.into_iter().map(|(t, _)| t.to_owned()).collect()),
        short,
    })
}

/// Builds the unigram vocabulary and the bigram index from the same chunks.
pub fn fit_vocabulary(chunks: &[&Chunk], top_k: usize) -> Result<VocabularyBuild> {
    let mut build = build_vocabulary(chunks, top_k)?;
    let projected: Vec<Vec<usize>> = chunks
        .par_iter()
        .map(|c| project(c, &build.vocabulary))
        .collect();
    build
        .vocabulary
        .index_bigrams(projected.iter().map(Vec::as_slice));
    Ok(build)
}

/// Ids of the in-vocabulary tokens, in their original order.
pub fn project(chunk: &Chunk, vocab: &Vocabulary) -> Vec<usize> {
    chunk.tokens.iter().filter_map(|t| vocab.id(t)).collect()
}

/// Unigram counts plus counts of indexed adjacent pairs. Pairs missing from
/// the index are dropped.
pub fn extract_features(projected: &[usize], vocab: &Vocabulary) -> CountVector {
    let unigrams = projected.iter().map(|&id| (id, 1));
    let bigrams = projected
        .windows(2)
        .filter_map(|w| vocab.bigram_feature(w[0], w[1]))
        .map(|id| (id, 1));
    CountVector::from_pairs(unigrams.chain(bigrams))
}
