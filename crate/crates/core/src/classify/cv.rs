//! Stratified k-fold cross-validation of the multiclass schemes.
//!
//! Fold assignment: one seeded stream (`seeded(seed)`) shuffles each class's
//! sample indices in class order, and the shuffled indices of each class are
//! dealt round-robin to folds `0, 1, …`. Trees are rebuilt on every fold's
//! training split; fold `f` builds with base seed `seed + ((f + 1) << 32)`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::all_pairs::train_all_pairs;
use super::hierarchy::train_hierarchy;
use super::learner::{Hyperparams, LearnerKind};
use super::Dataset;
use crate::decomposition::{best_of_runs_with, BuildOptions, ClassId, TreeShape};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Hierarchical,
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoder {
    HierarchicalHard,
    HierarchicalSoft,
    AllPairs,
}

impl Decoder {
    pub fn as_str(self) -> &'static str {
        match self {
            Decoder::HierarchicalHard => "hierarchical-hard",
            Decoder::HierarchicalSoft => "hierarchical-soft",
            Decoder::AllPairs => "all-pairs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub learner: LearnerKind,
    pub hyper: Hyperparams,
    /// Tree construction settings; the seed is replaced per fold.
    pub build: BuildOptions,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 3,
            seed: 0,
            learner: LearnerKind::Generative,
            hyper: Hyperparams::default(),
            build: BuildOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub decoder: Decoder,
    pub fold: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// The tree selected on one fold's training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldTree {
    pub fold: usize,
    pub nested: String,
    pub q_total: f64,
    pub shape: TreeShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub num_classes: usize,
    pub folds: usize,
    pub seed: u64,
    pub scores: Vec<FoldScore>,
    pub trees: Vec<FoldTree>,
}

impl CvReport {
    /// Mean of the per-fold accuracies.
    pub fn mean_accuracy(&self, decoder: Decoder) -> Option<f64> {
        let accs: Vec<f64> = self
            .scores
            .iter()
            .filter(|s| s.decoder == decoder)
            .map(|s| s.accuracy)
            .collect();
        (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
    }

    pub fn decoders(&self) -> Vec<Decoder> {
        let mut d: Vec<Decoder> = self.scores.iter().map(|s| s.decoder).collect();
        d.sort();
        d.dedup();
        d
    }
}

/// Fold index of every sample.
pub fn stratified_folds(
    labels: &[ClassId],
    num_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Degenerate(format!("need at least 2 folds, got {folds}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &label) in labels.iter().enumerate() {
        if label >= num_classes {
            return Err(Error::IndexOutOfRange {
                index: label,
                len: num_classes,
            });
        }
        by_class[label].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < folds {
            return Err(Error::Stratification {
                class,
                count: members.len(),
                folds,
            });
        }
    }
    let mut rng = seeded(seed);
    let mut assignment = vec![0; labels.len()];
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

fn accuracy(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, (fold as u64 + 1) << 32)
}

/// Cross-validates the given schemes on a featurized dataset.
pub fn cross_validate(data: &Dataset, schemes: &[Scheme], config: &CvConfig) -> Result<CvReport> {
    cross_validate_with(
        &data.labels(),
        data.num_classes,
        schemes,
        config,
        |_, train, test| Ok((data.subset(train), data.subset(test))),
    )
}

/// Cross-validation where each fold's train and test datasets are produced
/// by `prepare(fold, train_indices, test_indices)`, so feature spaces can be
/// rebuilt from the training split alone.
pub fn cross_validate_with<F>(
    labels: &[ClassId],
    num_classes: usize,
    schemes: &[Scheme],
    config: &CvConfig,
    prepare: F,
) -> Result<CvReport>
where
    F: Fn(usize, &[usize], &[usize]) -> Result<(Dataset, Dataset)>,
{
    if num_classes < 2 {
        return Err(Error::TooFewClasses {
            needed: 2,
            found: num_classes,
        });
    }
    let assignment = stratified_folds(labels, num_classes, config.folds, config.seed)?;
    let mut scores = Vec::new();
    let mut trees = Vec::new();
    for fold in 0..config.folds {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
            (0..labels.len()).partition(|&i| assignment[i] != fold);
        let (train, test) = prepare(fold, &train_idx, &test_idx)?;
        let total = test.len();
        for &scheme in schemes {
            match scheme {
                Scheme::Hierarchical => {
                    let priors = train.priors()?;
                    let conditionals = train.class_conditionals(config.hyper.smoothing)?;
                    let options = BuildOptions {
                        seed: fold_seed(config.seed, fold),
                        ..config.build.clone()
                    };
                    let (tree, report) = best_of_runs_with(&priors, &conditionals, &options)?;
                    let clf = train_hierarchy(&tree, &train, config.learner, &config.hyper)?;
                    let (mut hard, mut soft) = (0, 0);
                    for s in &test.samples {
                        hard += (clf.decode_hard(&s.features) == s.label) as usize;
                        soft += (clf.decode_soft(&s.features).0 == s.label) as usize;
                    }
                    for (decoder, correct) in [
                        (Decoder::HierarchicalHard, hard),
                        (Decoder::HierarchicalSoft, soft),
                    ] {
                        scores.push(FoldScore {
                            decoder,
                            fold,
                            correct,
                            total,
                            accuracy: accuracy(correct, total),
                        });
                    }
                    trees.push(FoldTree {
                        fold,
                        nested: tree.to_nested(),
                        q_total: report.q_total,
                        shape: tree.shape(),
                    });
                }
                Scheme::AllPairs => {
                    let clf = train_all_pairs(&train, config.learner, &config.hyper)?;
                    let correct = test
                        .samples
                        .iter()
                        .filter(|s| clf.decode(&s.features) == s.label)
                        .count();
                    scores.push(FoldScore {
                        decoder: Decoder::AllPairs,
                        fold,
                        correct,
                        total,
                        accuracy: accuracy(correct, total),
                    });
                }
            }
        }
    }
    Ok(CvReport {
        num_classes,
        folds: config.folds,
        seed: config.seed,
        scores,
        trees,
    })
}
