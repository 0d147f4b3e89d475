//! Base learners, hierarchical and all-pairs multiclass schemes, and
//! stratified cross-validation.

mod all_pairs;
mod cv;
mod hierarchy;
mod learner;

pub use all_pairs::{decode_all_pairs, train_all_pairs, AllPairsClassifier, PairModel};
pub use cv::{
    cross_validate, cross_validate_with, stratified_folds, CvConfig, CvReport, Decoder,
    FoldScore, Scheme,
};
pub use hierarchy::{decode_hard, decode_soft, train_hierarchy, HierarchicalClassifier};
pub use learner::{
    train_binary, BinaryModel, BinaryScorer, GenerativeModel, Hyperparams, LearnerKind,
    LinearModel,
};

use serde::{Deserialize, Serialize};

use crate::decomposition::ClassId;
use crate::error::{Error, Result};
use crate::multinomial::{estimate_ml, CountVector, Multinomial, Prior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: CountVector,
    pub label: ClassId,
}

impl Sample {
    pub fn new(features: CountVector, label: ClassId) -> Self {
        Sample { features, label }
    }
}

/// Labeled samples over a fixed feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub num_classes: usize,
    #[serde(default)]
    pub class_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Checks labels and feature indices against the declared sizes.
    pub fn new(dim: usize, num_classes: usize, samples: Vec<Sample>) -> Result<Self> {
        for s in &samples {
            if s.label >= num_classes {
                return Err(Error::IndexOutOfRange {
                    index: s.label,
                    len: num_classes,
                });
            }
            if s.features.max_index_bound() > dim {
                return Err(Error::FeatureOutOfRange {
                    index: s.features.max_index_bound() - 1,
                    dim,
                });
            }
        }
        Ok(Dataset {
            dim,
            num_classes,
            class_names: (0..num_classes).map(|c| c.to_string()).collect(),
            samples,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = names;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Fails on the first class without samples.
    pub fn require_all_classes(&self) -> Result<()> {
        match self.class_counts().iter().position(|&c| c == 0) {
            Some(class) => Err(Error::EmptyClass(class)),
            None => Ok(()),
        }
    }

    /// Empirical class prior.
    pub fn priors(&self) -> Result<Prior> {
        Prior::from_counts(&self.class_counts())
    }

    /// Per-class smoothed maximum-likelihood conditionals from pooled counts.
    pub fn class_conditionals(&self, alpha: f64) -> Result<Vec<Multinomial>> {
        let mut pooled = vec![CountVector::new(); self.num_classes];
        for s in &self.samples {
            pooled[s.label].accumulate(&s.features);
        }
        pooled
            .iter()
            .map(|c| estimate_ml(c, self.dim, alpha))
            .collect()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dim: self.dim,
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }
}
