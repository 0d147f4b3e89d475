//! Command-line pipeline: corpus preprocessing, tree construction, training,
//! evaluation, scheme comparison and bound reports.
//!
//! Every command is a pure function of its inputs and flags. Artifacts are
//! text (feature triplets, token lists, JSON documents, CSV) and each one
//! records the seed it was produced with.

mod commands;
mod model;
mod problem;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hierclass::bounds::LeafWeight;
use hierclass::classify::{LearnerKind, Scheme};
use hierclass::decomposition::Strategy;

pub use model::{ModelDocument, TrainedClassifier, MODEL_SCHEMA};
pub use problem::{parse_problem, Problem};

#[derive(Debug, Parser)]
#[command(name = "hierclass", version, about = "Hierarchical multiclass decompositions of text classification problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize, chunk and featurize a labeled corpus
    Preprocess(PreprocessArgs),
    /// Select a decomposition tree for a feature matrix
    BuildTree(BuildTreeArgs),
    /// Train a hierarchical or all-pairs classifier
    Train(TrainArgs),
    /// Score a trained model on a feature matrix
    Evaluate(EvaluateArgs),
    /// Cross-validate hierarchical and all-pairs schemes
    Compare(CompareArgs),
    /// Bayes-error bounds for an explicit problem file
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Generative,
    Linear,
}

impl From<LearnerArg> for LearnerKind {
    fn from(a: LearnerArg) -> Self {
        match a {
            LearnerArg::Generative => LearnerKind::Generative,
            LearnerArg::Linear => LearnerKind::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LeafWeightArg {
    Prior,
    Literal,
}

impl From<LeafWeightArg> for LeafWeight {
    fn from(a: LeafWeightArg) -> Self {
        match a {
            LeafWeightArg::Prior => LeafWeight::Prior,
            LeafWeightArg::Literal => LeafWeight::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Hierarchical,
    AllPairs,
}

impl From<SchemeArg> for Scheme {
    fn from(a: SchemeArg) -> Self {
        match a {
            SchemeArg::Hierarchical => Scheme::Hierarchical,
            SchemeArg::AllPairs => Scheme::AllPairs,
        }
    }
}

/// Where the vocabulary comes from when comparing on a raw corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VocabScope {
    /// Rebuilt from each fold's training chunks.
    Fold,
    /// Built once from the whole corpus.
    Global,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub top_k: usize,
    #[arg(long, default_value_t = 1000)]
    pub chunk_size: usize,
    /// Drop chunks of documents shorter than half a chunk
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BuildOpts {
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = LeafWeightArg::Prior)]
    pub leaf_weight: LeafWeightArg,
    /// Always merge the closest pair instead of sampling
    #[arg(long)]
    pub greedy: bool,
    /// Add-alpha smoothing of class conditionals
    #[arg(long, default_value_t = hierclass::multinomial::DEFAULT_SMOOTHING)]
    pub smoothing: f64,
}

#[derive(Debug, Args)]
pub struct BuildTreeArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub build: BuildOpts,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// Tree document from build-tree; built on the fly when absent
    #[arg(long)]
    pub tree: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Hierarchical)]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = LearnerArg::Generative)]
    pub learner: LearnerArg,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub build: BuildOpts,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// CSV destination; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Preprocessed feature matrix
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub features: Option<PathBuf>,
    /// Raw corpus manifest; vocabularies follow --vocab-scope
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VocabScope::Fold)]
    pub vocab_scope: VocabScope,
    #[arg(long, default_value_t = 5000)]
    pub top_k: usize,
    #[arg(long, default_value_t = 1000)]
    pub chunk_size: usize,
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    #[arg(long, value_enum, default_value_t = LearnerArg::Generative)]
    pub learner: LearnerArg,
    /// CSV destination; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub build: BuildOpts,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// CSV destination; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LeafWeightArg::Prior)]
    pub leaf_weight: LeafWeightArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Settings shared by the pipeline stages, checked once up front.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub top_k: usize,
    pub chunk_size: usize,
    pub runs: usize,
    pub folds: usize,
    pub learner: LearnerKind,
    pub schemes: Vec<Scheme>,
    pub strategy: Strategy,
    pub leaf_weight: LeafWeight,
    pub smoothing: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            top_k: 5000,
            chunk_size: 1000,
            runs: 10,
            folds: 3,
            learner: LearnerKind::Generative,
            schemes: vec![Scheme::Hierarchical, Scheme::AllPairs],
            strategy: Strategy::Randomized,
            leaf_weight: LeafWeight::Prior,
            smoothing: hierclass::multinomial::DEFAULT_SMOOTHING,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("top-k", self.top_k),
            ("runs", self.runs),
            ("folds", self.folds),
        ] {
            if value == 0 {
                bail!("--{name} must be positive");
            }
        }
        if self.chunk_size < 2 {
            bail!("--chunk-size must be at least 2");
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            bail!("--smoothing must be a finite non-negative number");
        }
        Ok(())
    }

    fn with_build(mut self, build: &BuildOpts) -> Self {
        self.seed = build.seed;
        self.runs = build.runs;
        self.leaf_weight = build.leaf_weight.into();
        self.smoothing = build.smoothing;
        self.strategy = if build.greedy {
            Strategy::Greedy
        } else {
            Strategy::Randomized
        };
        self
    }
}

/// Runs one parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(args) => commands::preprocess(&args),
        Command::BuildTree(args) => commands::build_tree(&args),
        Command::Train(args) => commands::train(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Bounds(args) => commands::bounds(&args),
    }
}
