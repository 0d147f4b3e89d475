use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{train_binary, BinaryModel, BinaryScorer, GenerativeModel, Hyperparams, LearnerKind};
use super::{Dataset, Sample};
use crate::bounds::node_binary_problem;
use crate::decomposition::{Branch, ClassId, DecompositionTree, NodeId};
use crate::error::{Error, Result};
use crate::multinomial::{CountVector, Multinomial, Prior};

/// A decomposition tree with one binary model per internal node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalClassifier<M = BinaryModel> {
    pub tree: DecompositionTree,
    pub models: BTreeMap<NodeId, M>,
}

impl<M: BinaryScorer> HierarchicalClassifier<M> {
    /// Pairs a valid tree with exactly one model per internal node.
    pub fn from_models(tree: DecompositionTree, models: BTreeMap<NodeId, M>) -> Result<Self> {
        tree.ensure_valid()?;
        let internal = tree.internal_nodes();
        if models.len() != internal.len() || internal.iter().any(|id| !models.contains_key(id)) {
            return Err(Error::Training(format!(
                "expected models for internal nodes {internal:?}"
            )));
        }
        Ok(HierarchicalClassifier { tree, models })
    }

    fn proba(&self, node: NodeId, x: &CountVector) -> f64 {
        self.models[&node].predict_proba(x)
    }

    /// Follows thresholded decisions from the root; `p >= 0.5` goes right.
    pub fn decode_hard(&self, x: &CountVector) -> ClassId {
        let mut id = self.tree.root();
        loop {
            let node = self.tree.node(id);
            if node.is_leaf() {
                return node.class.expect("valid leaves carry a class");
            }
            id = if self.proba(id, x) >= 0.5 {
                node.children[1]
            } else {
                node.children[0]
            };
        }
    }

    /// Per-class path probabilities, indexed by class id.
    pub fn path_probabilities(&self, x: &CountVector) -> Vec<f64> {
        let mut out = vec![0.0; self.tree.num_classes()];
        let mut stack = vec![(self.tree.root(), 1.0)];
        while let Some((id, mass)) = stack.pop() {
            let node = self.tree.node(id);
            if node.is_leaf() {
                out[node.class.expect("valid leaves carry a class")] = mass;
                continue;
            }
            let p = self.proba(id, x);
            stack.push((node.children[0], mass * (1.0 - p)));
            stack.push((node.children[1], mass * p));
        }
        out
    }

    /// Winner-takes-all over path probabilities; ties go to the lowest id.
    pub fn decode_soft(&self, x: &CountVector) -> (ClassId, Vec<f64>) {
        let probs = self.path_probabilities(x);
        let mut best = 0;
        for (class, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = class;
            }
        }
        (best, probs)
    }
}

impl HierarchicalClassifier<BinaryModel> {
    /// Generative node models built from known class priors and
    /// conditionals rather than estimated from samples.
    pub fn from_exact(
        tree: DecompositionTree,
        class_priors: &Prior,
        class_conditionals: &[Multinomial],
    ) -> Result<Self> {
        let models = tree
            .internal_nodes()
            .into_iter()
            .map(|id| {
                let (prior, left, right) =
                    node_binary_problem(&tree, id, class_priors, class_conditionals)?;
                Ok((id, BinaryModel::Generative(GenerativeModel::new(prior, left, right)?)))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        HierarchicalClassifier::from_models(tree, models)
    }
}

/// Trains one model per internal node on the samples whose class lies under
/// that node, left label set against right label set.
pub fn train_hierarchy(
    tree: &DecompositionTree,
    data: &Dataset,
    kind: LearnerKind,
    hyper: &Hyperparams,
) -> Result<HierarchicalClassifier> {
    tree.ensure_valid()?;
    if tree.num_classes() != data.num_classes {
        return Err(Error::ArityMismatch {
            expected: tree.num_classes(),
            found: data.num_classes,
        });
    }
    data.require_all_classes()?;
    // Branch side of every class at every node, from the root paths.
    let mut side: BTreeMap<(NodeId, ClassId), Branch> = BTreeMap::new();
    for class in 0..tree.num_classes() {
        for (node, branch) in tree.path_to(class) {
            side.insert((node, class), branch);
        }
    }
    let models = tree
        .internal_nodes()
        .into_par_iter()
        .map(|id| {
            let (mut positives, mut negatives): (Vec<&Sample>, Vec<&Sample>) =
                (Vec::new(), Vec::new());
            for s in &data.samples {
                match side.get(&(id, s.label)) {
                    Some(Branch::Left) => negatives.push(s),
                    Some(Branch::Right) => positives.push(s),
                    None => {}
                }
            }
            Ok((id, train_binary(&positives, &negatives, data.dim, kind, hyper)?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(HierarchicalClassifier {
        tree: tree.clone(),
        models,
    })
}

pub fn decode_hard<M: BinaryScorer>(clf: &HierarchicalClassifier<M>, x: &CountVector) -> ClassId {
    clf.decode_hard(x)
}

pub fn decode_soft<M: BinaryScorer>(
    clf: &HierarchicalClassifier<M>,
    x: &CountVector,
) -> (ClassId, Vec<f64>) {
    clf.decode_soft(x)
}
