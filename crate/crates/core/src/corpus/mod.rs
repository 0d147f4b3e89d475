//! Text front end: tokens, paragraphs, the frequency-ranked vocabulary and
//! projected unigram/bigram features, plus a synthetic corpus generator.

mod manifest;
mod matrix;
mod synth;
mod text;
mod vocab;

pub use manifest::{chunk_corpus, load_manifest, Document, Manifest};
pub use matrix::{FeatureMatrix, RowInfo, FEATURES_HEADER};
pub use synth::{draw_tokens, render_text, synth_conditionals, synth_corpus, SynthConfig, SynthCorpus};
pub use text::{chunk_lengths, chunk_paragraphs, is_punctuation, tokenize, Chunk, Token, PUNCTUATION};
pub use vocab::{
    build_vocabulary, extract_features, fit_vocabulary, project, Vocabulary, VocabularyBuild,
};

use crate::classify::{Dataset, Sample};
use crate::error::Result;

/// Featurizes `chunks` over `vocab` into a dataset with `num_classes` classes.
pub fn featurize_chunks(chunks: &[&Chunk], vocab: &Vocabulary, num_classes: usize) -> Result<Dataset> {
    use rayon::prelude::*;
    let samples: Vec<Sample> = chunks
        .par_iter()
        .map(|c| Sample::new(vocab.featurize(c), c.class_id))
        .collect();
    Dataset::new(vocab.dim(), num_classes, samples)
}
