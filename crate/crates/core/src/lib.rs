//! Hierarchical decompositions of multiclass problems over multinomial
//! (token-count) data.
//!
//! - [`multinomial`]: distributions, entropy, KL and Jensen-Shannon divergence.
//! - [`bounds`]: JS bounds on binary, multiclass and tree-structured Bayes error.
//! - [`decomposition`]: decomposition trees and their randomized agglomerative construction.
//! - [`classify`]: base learners, hierarchical and all-pairs schemes, cross-validation.
//! - [`corpus`]: tokenization, paragraph chunking, projected features, synthetic corpora.

pub mod bounds;
pub mod classify;
pub mod corpus;
pub mod decomposition;
pub mod error;
pub mod multinomial;
pub mod rng;

pub use error::{Error, Result};
pub use multinomial::{CountVector, Multinomial, Prior};
