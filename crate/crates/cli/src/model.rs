use anyhow::{bail, Context, Result};
use hierclass::classify::{AllPairsClassifier, HierarchicalClassifier, Hyperparams, LearnerKind};
use serde::{Deserialize, Serialize};

pub const MODEL_SCHEMA: &str = "hierclass.model.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainedClassifier {
    Hierarchical(HierarchicalClassifier),
    AllPairs(AllPairsClassifier),
}

/// A trained classifier with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema: String,
    pub seed: u64,
    pub learner: LearnerKind,
    pub hyperparams: Hyperparams,
    /// Feature-space size the models were trained on.
    pub dim: usize,
    pub class_names: Vec<String>,
    pub classifier: TrainedClassifier,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).context("malformed model document")?;
        if doc.schema != MODEL_SCHEMA {
            bail!("unsupported model schema `{}`", doc.schema);
        }
        if let TrainedClassifier::Hierarchical(h) = &doc.classifier {
            h.tree.ensure_valid()?;
        }
        Ok(doc)
    }
}
