use serde::{Deserialize, Serialize};

use crate::decomposition::ClassId;

/// A lowercased word or a single punctuation symbol.
pub type Token = String;

/// Symbols emitted as standalone tokens.
pub const PUNCTUATION: [char; 13] = [
    '.', ';', ',', ':', '?', '!', '\'', '(', ')', '"', '-', '/', '\\',
];

pub fn is_punctuation(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Splits text into maximal alphanumeric runs and single punctuation
/// symbols. Everything else separates tokens. Words are lowercased.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            // Keep only alphanumeric output so re-tokenizing is stable.
            word.extend(c.to_lowercase().filter(|l| l.is_alphanumeric()));
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if is_punctuation(c) {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// A paragraph of consecutive tokens from one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub class_id: ClassId,
    /// Position of the chunk within its document.
    pub index: usize,
    pub tokens: Vec<Token>,
    /// The whole document was shorter than half a chunk.
    pub flagged: bool,
}

/// Lengths of the windows `chunk_paragraphs` cuts `n` tokens into.
pub fn chunk_lengths(n: usize, size: usize) -> Vec<usize> {
    assert!(size >= 2, "chunk size must be at least 2");
    if n == 0 {
        return Vec::new();
    }
    let (full, rem) = (n / size, n % size);
    if full == 0 {
        return vec![n];
    }
    let mut lengths = vec![size; full];
    if rem > 0 {
        if 2 * rem < size {
            *lengths.last_mut().expect("full >= 1") += rem;
        } else {
            lengths.push(rem);
        }
    }
    lengths
}

/// Cuts a document into windows of `size` tokens. A trailing remainder
/// shorter than `size / 2` joins the previous window; a document shorter
/// than `size / 2` becomes one flagged chunk.
pub fn chunk_paragraphs(
    tokens: Vec<Token>,
    size: usize,
    doc_id: &str,
    class_id: ClassId,
) -> Vec<Chunk> {
    let flagged = 2 * tokens.len() < size;
    let mut rest = tokens.into_iter();
    chunk_lengths(rest.len(), size)
        .into_iter()
        .enumerate()
        .map(|(index, len)| Chunk {
            doc_id: doc_id.to_owned(),
            class_id,
            index,
            tokens: rest.by_ref().take(len).collect(),
            flagged,
        })
        .collect()
}
