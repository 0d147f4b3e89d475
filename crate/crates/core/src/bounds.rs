//! Jensen-Shannon bounds on the Bayes error.
//!
//! For a `k`-class problem with prior `π` and conditionals `P_i`, let
//! `J = H(π) − JS_π(P_1, …, P_k)`. Then
//!
//! ```text
//! J² / (4(k − 1)) ≤ Bayes error ≤ J / 2
//! ```
//!
//! For a decomposition tree, each internal node `v` induces a binary problem
//! with quality `q(v) = 1 − J(v)/2` (and `q'(v) = 1 − J(v)²/4`). The tree
//! score is the recurrence `Q(v) = q(v) · (Q(left) + Q(right))`, with the
//! leaf of class `j` contributing `π_j`. Expanded, `Q(T)` is the
//! prior-weighted sum over classes of the product of `q` along each
//! root-to-leaf path. `1 − Q(T)` and `1 − Q'(T)` rank decompositions; they are
//! not certified bounds on the tree's error for `k ≥ 3`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{ClassId, DecompositionTree, NodeId};
use crate::error::{Error, Result};
use crate::multinomial::{js_divergence, mutual_source, Multinomial, Prior};

/// Largest vocabulary the brute-force oracle will enumerate.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

/// Column order of the flat bound-report CSV.
pub const REPORT_COLUMNS: [&str; 14] = [
    "record",
    "node",
    "k",
    "js",
    "prior_entropy",
    "j_value",
    "lower",
    "upper",
    "lower_raw",
    "upper_raw",
    "oracle_error",
    "within_bounds",
    "q",
    "q_prime",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: usize,
    pub js: f64,
    pub prior_entropy: f64,
    /// `H(π) − JS`.
    pub j_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_raw: f64,
    pub upper_raw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_error: Option<f64>,
}

impl BoundReport {
    /// Computes the exact Bayes error by enumeration and records it.
    pub fn with_oracle(mut self, prior: &Prior, dists: &[Multinomial]) -> Result<Self> {
        self.oracle_error = Some(brute_force_bayes_error(prior, dists)?);
        Ok(self)
    }

    pub fn oracle_within_bounds(&self) -> Option<bool> {
        self.oracle_error
            .map(|e| self.lower - 1e-9 <= e && e <= self.upper + 1e-9)
    }

    pub fn csv_row(&self, record: &str) -> Vec<String> {
        vec![
            record.to_owned(),
            String::new(),
            self.k.to_string(),
            self.js.to_string(),
            self.prior_entropy.to_string(),
            self.j_value.to_string(),
            self.lower.to_string(),
            self.upper.to_string(),
            self.lower_raw.to_string(),
            self.upper_raw.to_string(),
            opt(self.oracle_error),
            opt(self.oracle_within_bounds()),
            String::new(),
            String::new(),
        ]
    }
}

fn opt<T: ToString>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// How a leaf enters the tree recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LeafWeight {
    /// `Q(leaf_j) = π_j`.
    #[default]
    Prior,
    /// `Q(leaf) = 1` regardless of the class prior.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeBound {
    pub node: NodeId,
    pub j_value: f64,
    pub q: f64,
    pub q_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeBoundReport {
    pub leaf_weight: LeafWeight,
    /// `Q(T)`.
    pub q_total: f64,
    /// `Q'(T)`.
    pub q_prime_total: f64,
    /// `1 − Q(T)` clamped to `[0, 1]`.
    pub upper: f64,
    /// `1 − Q'(T)` clamped to `[0, 1]`.
    pub lower: f64,
    pub upper_raw: f64,
    pub lower_raw: f64,
    pub per_node: Vec<NodeBound>,
}

impl TreeBoundReport {
    /// One `tree` row followed by one `node` row per internal node.
    /// `tree_error`, when given, is the tree's exact hard-decoding error.
    pub fn csv_rows(&self, k: usize, tree_error: Option<f64>) -> Vec<Vec<String>> {
        let within = tree_error.map(|e| self.lower - 1e-9 <= e && e <= self.upper + 1e-9);
        let mut rows = vec![vec![
            "tree".to_owned(),
            String::new(),
            k.to_string(),
            String::new(),
            String::new(),
            String::new(),
            self.lower.to_string(),
            self.upper.to_string(),
            self.lower_raw.to_string(),
            self.upper_raw.to_string(),
            opt(tree_error),
            opt(within),
            self.q_total.to_string(),
            self.q_prime_total.to_string(),
        ]];
        for n in &self.per_node {
            rows.push(vec![
                "node".to_owned(),
                n.node.to_string(),
                "2".to_owned(),
                String::new(),
                String::new(),
                n.j_value.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                n.q.to_string(),
                n.q_prime.to_string(),
            ]);
        }
        rows
    }
}

fn report(prior: &Prior, dists: &[Multinomial]) -> Result<BoundReport> {
    let k = dists.len();
    let js = js_divergence(prior, dists)?;
    let prior_entropy = prior.entropy();
    let j_value = (prior_entropy - js).max(0.0);
    let lower_raw = j_value * j_value / (4.0 * (k as f64 - 1.0));
    let upper_raw = j_value / 2.0;
    Ok(BoundReport {
        k,
        js,
        prior_entropy,
        j_value,
        lower: lower_raw.clamp(0.0, 1.0),
        upper: upper_raw.clamp(0.0, 1.0),
        lower_raw,
        upper_raw,
        oracle_error: None,
    })
}

/// Binary bounds `J²/4 ≤ error ≤ J/2`.
pub fn binary_js_bounds(prior: &Prior, p1: &Multinomial, p2: &Multinomial) -> Result<BoundReport> {
    if prior.len() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: prior.len(),
        });
    }
    report(prior, &[p1.clone(), p2.clone()])
}

/// `k`-class bounds `J_k²/(4(k − 1)) ≤ error ≤ J_k/2`.
pub fn multiclass_js_bounds(prior: &Prior, dists: &[Multinomial]) -> Result<BoundReport> {
    report(prior, dists)
}

fn check_enumerable(prior: &Prior, dists: &[Multinomial]) -> Result<usize> {
    if prior.len() != dists.len() {
        return Err(Error::ArityMismatch {
            expected: prior.len(),
            found: dists.len(),
        });
    }
    let dim = dists.first().map_or(0, Multinomial::dim);
    if let Some(d) = dists.iter().find(|d| d.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: d.dim(),
        });
    }
    if dim > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            dim,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(dim)
}

/// Exact Bayes error `Σ_x (Σ_i π_i P_i(x) − max_i π_i P_i(x))` by
/// enumerating the vocabulary.
pub fn brute_force_bayes_error(prior: &Prior, dists: &[Multinomial]) -> Result<f64> {
    let dim = check_enumerable(prior, dists)?;
    let mut error = 0.0;
    for x in 0..dim {
        let mut mass = 0.0;
        let mut best = 0.0f64;
        for (&w, d) in prior.weights().iter().zip(dists) {
            let joint = w * d.get(x);
            mass += joint;
            best = best.max(joint);
        }
        error += mass - best;
    }
    Ok(error.max(0.0))
}

/// Exact error of hard decoding through `tree` when every node uses the
/// Bayes-optimal rule of its induced binary problem (ties go right).
pub fn tree_bayes_error(
    tree: &DecompositionTree,
    prior: &Prior,
    dists: &[Multinomial],
) -> Result<f64> {
    let dim = check_enumerable(prior, dists)?;
    tree.ensure_valid()?;
    let mut error = 0.0;
    for x in 0..dim {
        let joint: Vec<f64> = prior
            .weights()
            .iter()
            .zip(dists)
            .map(|(&w, d)| w * d.get(x))
            .collect();
        let mut id = tree.root();
        while !tree.node(id).is_leaf() {
            let node = tree.node(id);
            let mass = |child: NodeId| -> f64 {
                tree.node(child).label_set.iter().map(|&c| joint[c]).sum()
            };
            let (l, r) = (node.children[0], node.children[1]);
            id = if mass(r) >= mass(l) { r } else { l };
        }
        let class = tree.node(id).class.expect("valid leaves carry a class");
        error += joint.iter().sum::<f64>() - joint[class];
    }
    Ok(error.max(0.0))
}

fn branch(
    node: NodeId,
    classes: &[ClassId],
    priors: &Prior,
    conditionals: &[Multinomial],
) -> Result<(f64, Multinomial)> {
    if classes.is_empty() {
        return Err(Error::EmptyBranch(node));
    }
    let mass: f64 = classes.iter().map(|&c| priors.get(c)).sum();
    if classes.len() == 1 {
        return Ok((mass, conditionals[classes[0]].clone()));
    }
    let members: Vec<Multinomial> = classes.iter().map(|&c| conditionals[c].clone()).collect();
    let weights = if mass > 0.0 {
        Prior::new(classes.iter().map(|&c| priors.get(c) / mass).collect())?
    } else {
        // A branch of zero-prior classes: mix its members evenly.
        Prior::uniform(classes.len())?
    };
    Ok((mass, mutual_source(&weights, &members)?))
}

/// The binary problem at internal node `node`: branch prior and the
/// (left, right) branch conditionals, each the prior-weighted mixture of its
/// member classes.
pub fn node_binary_problem(
    tree: &DecompositionTree,
    node: NodeId,
    class_priors: &Prior,
    class_conditionals: &[Multinomial],
) -> Result<(Prior, Multinomial, Multinomial)> {
    if class_priors.len() != tree.num_classes() {
        return Err(Error::ArityMismatch {
            expected: tree.num_classes(),
            found: class_priors.len(),
        });
    }
    if class_conditionals.len() != tree.num_classes() {
        return Err(Error::ArityMismatch {
            expected: tree.num_classes(),
            found: class_conditionals.len(),
        });
    }
    if node >= tree.nodes().len() {
        return Err(Error::IndexOutOfRange {
            index: node,
            len: tree.nodes().len(),
        });
    }
    let v = tree.node(node);
    if v.is_leaf() {
        return Err(Error::LeafNode(node));
    }
    let (l, r) = (v.children[0], v.children[1]);
    let (lm, left) = branch(node, &tree.node(l).label_set, class_priors, class_conditionals)?;
    let (rm, right) = branch(node, &tree.node(r).label_set, class_priors, class_conditionals)?;
    let prior = Prior::binary(lm, rm).or_else(|_| Prior::uniform(2))?;
    Ok((prior, left, right))
}

/// `J(v)` for every internal node, keyed by node id.
pub fn node_j_values(
    tree: &DecompositionTree,
    class_priors: &Prior,
    class_conditionals: &[Multinomial],
) -> Result<BTreeMap<NodeId, f64>> {
    tree.ensure_valid()?;
    tree.internal_nodes()
        .into_par_iter()
        .map(|id| {
            let (prior, left, right) =
                node_binary_problem(tree, id, class_priors, class_conditionals)?;
            let js = js_divergence(&prior, &[left, right])?;
            Ok((id, (prior.entropy() - js).max(0.0)))
        })
        .collect()
}

/// Evaluates both recurrences from precomputed node `J` values.
pub fn tree_bounds_from_j(
    tree: &DecompositionTree,
    class_priors: &Prior,
    j_values: &BTreeMap<NodeId, f64>,
    leaf_weight: LeafWeight,
) -> Result<TreeBoundReport> {
    tree.ensure_valid()?;
    let n = tree.nodes().len();
    let mut q_sub = vec![0.0; n];
    let mut q_prime_sub = vec![0.0; n];
    let mut per_node = Vec::new();
    for id in tree.post_order() {
        let node = tree.node(id);
        if node.is_leaf() {
            let class = node.class.expect("valid leaves carry a class");
            let value = match leaf_weight {
                LeafWeight::Prior => class_priors.get(class),
                LeafWeight::Literal => 1.0,
            };
            q_sub[id] = value;
            q_prime_sub[id] = value;
        } else {
            let j = *j_values
                .get(&id)
                .ok_or_else(|| Error::Degenerate(format!("no J value for node {id}")))?;
            let q = 1.0 - j / 2.0;
            let q_prime = 1.0 - j * j / 4.0;
            let (l, r) = (node.children[0], node.children[1]);
            q_sub[id] = q * (q_sub[l] + q_sub[r]);
            q_prime_sub[id] = q_prime * (q_prime_sub[l] + q_prime_sub[r]);
            per_node.push(NodeBound {
                node: id,
                j_value: j,
                q,
                q_prime,
            });
        }
    }
    per_node.sort_by_key(|b| b.node);
    let root = tree.root();
    let (q_total, q_prime_total) = (q_sub[root], q_prime_sub[root]);
    let (upper_raw, lower_raw) = (1.0 - q_total, 1.0 - q_prime_total);
    Ok(TreeBoundReport {
        leaf_weight,
        q_total,
        q_prime_total,
        upper: upper_raw.clamp(0.0, 1.0),
        lower: lower_raw.clamp(0.0, 1.0),
        upper_raw,
        lower_raw,
        per_node,
    })
}

/// Both tree recurrences (`Q` and `Q'`) in one report.
pub fn tree_bounds(
    tree: &DecompositionTree,
    class_priors: &Prior,
    class_conditionals: &[Multinomial],
    leaf_weight: LeafWeight,
) -> Result<TreeBoundReport> {
    let j_values = node_j_values(tree, class_priors, class_conditionals)?;
    tree_bounds_from_j(tree, class_priors, &j_values, leaf_weight)
}

/// `1 − Q(T)` with prior-weighted leaves.
pub fn tree_upper_bound(
    tree: &DecompositionTree,
    class_priors: &Prior,
    class_conditionals: &[Multinomial],
) -> Result<TreeBoundReport> {
    tree_bounds(tree, class_priors, class_conditionals, LeafWeight::Prior)
}

/// `1 − Q'(T)` with prior-weighted leaves. Returns the same report as
/// [`tree_upper_bound`]; read `lower` and `q_prime_total` from it.
pub fn tree_lower_bound(
    tree: &DecompositionTree,
    class_priors: &Prior,
    class_conditionals: &[Multinomial],
) -> Result<TreeBoundReport> {
    tree_bounds(tree, class_priors, class_conditionals, LeafWeight::Prior)
}
