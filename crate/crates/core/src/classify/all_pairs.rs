use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{train_binary, BinaryModel, BinaryScorer, Hyperparams, LearnerKind};
use super::{Dataset, Sample};
use crate::decomposition::ClassId;
use crate::error::{Error, Result};
use crate::multinomial::CountVector;

/// The model separating class `low` (left) from class `high` (right).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel<M = BinaryModel> {
    pub low: ClassId,
    pub high: ClassId,
    pub model: M,
}

/// One binary model per unordered class pair, in ascending pair order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllPairsClassifier<M = BinaryModel> {
    pub num_classes: usize,
    pub models: Vec<PairModel<M>>,
}

impl<M: BinaryScorer> AllPairsClassifier<M> {
    pub fn from_models(num_classes: usize, models: Vec<PairModel<M>>) -> Result<Self> {
        let expected: Vec<(ClassId, ClassId)> = (0..num_classes)
            .flat_map(|a| (a + 1..num_classes).map(move |b| (a, b)))
            .collect();
        let found: Vec<(ClassId, ClassId)> = models.iter().map(|m| (m.low, m.high)).collect();
        if expected != found {
            return Err(Error::Training(format!(
                "expected pair models {expected:?}, found {found:?}"
            )));
        }
        Ok(AllPairsClassifier {
            num_classes,
            models,
        })
    }

    /// Majority vote. Each pair votes for `high` when `p >= 0.5`. Vote ties
    /// go to the larger summed probability in the class's favor, then to
    /// the lowest class id.
    pub fn decode(&self, x: &CountVector) -> ClassId {
        let k = self.num_classes;
        let mut votes = vec![0usize; k];
        let mut support = vec![0.0f64; k];
        for pm in &self.models {
            let p = pm.model.predict_proba(x);
            if p >= 0.5 {
                votes[pm.high] += 1;
            } else {
                votes[pm.low] += 1;
            }
            support[pm.high] += p;
            support[pm.low] += 1.0 - p;
        }
        let mut best = 0;
        for class in 1..k {
            if votes[class] > votes[best]
                || (votes[class] == votes[best] && support[class] > support[best])
            {
                best = class;
            }
        }
        best
    }
}

/// Trains one model per class pair on exactly those two classes' samples.
pub fn train_all_pairs(
    data: &Dataset,
    kind: LearnerKind,
    hyper: &Hyperparams,
) -> Result<AllPairsClassifier> {
    if data.num_classes < 2 {
        return Err(Error::TooFewClasses {
            needed: 2,
            found: data.num_classes,
        });
    }
    data.require_all_classes()?;
    let k = data.num_classes;
    let mut by_class: Vec<Vec<&Sample>> = vec![Vec::new(); k];
    for s in &data.samples {
        by_class[s.label].push(s);
    }
    let pairs: Vec<(ClassId, ClassId)> = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .collect();
    let models = pairs
        .into_par_iter()
        .map(|(low, high)| {
            let model = train_binary(&by_class[high], &by_class[low], data.dim, kind, hyper)?;
            Ok(PairModel { low, high, model })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AllPairsClassifier {
        num_classes: k,
        models,
    })
}

pub fn decode_all_pairs<M: BinaryScorer>(clf: &AllPairsClassifier<M>, x: &CountVector) -> ClassId {
    clf.decode(x)
}
