//! Decomposition trees and their agglomerative randomized construction.
//!
//! A decomposition tree is a full binary tree whose `k` leaves are the
//! classes. Every internal node carries one binary problem: its left label
//! set against its right label set.
//!
//! Construction starts from a forest of `k` single-leaf trees. At each step,
//! every unordered pair of forest trees `(i, j)` gets the divergence
//! `JS(i, j)` of their conditionals under the weight-proportional prior, and
//! one pair is merged with probability proportional to `2^-JS(i, j)`. The
//! merged tree's conditional is the mutual source of the pair and its weight
//! the sum of their weights. Several independent runs are made and the tree
//! with the largest `Q(T)` is kept.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{tree_bounds, LeafWeight, TreeBoundReport};
use crate::error::{Error, Result};
use crate::multinomial::{js_divergence, mutual_source, Multinomial, Prior};
use crate::rng::{derive_seed, seeded};

pub type NodeId = usize;
pub type ClassId = usize;

/// Tolerance for weight bookkeeping and candidate normalization.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Current version tag of the serialized tree document.
pub const TREE_SCHEMA: &str = "hierclass.tree.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: NodeId,
    /// The class of a leaf; `None` for internal nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassId>,
    /// Empty for leaves, `[left, right]` for internal nodes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeId>,
    /// Sorted class ids covered by this node.
    pub label_set: Vec<ClassId>,
    pub weight: f64,
    /// Class conditional of a leaf or mutual source of an internal node.
    /// Only populated during construction; never serialized.
    #[serde(skip)]
    pub conditional: Option<Multinomial>,
}

impl TreeNode {
    pub fn leaf(id: NodeId, class: ClassId, weight: f64) -> Self {
        TreeNode {
            id,
            class: Some(class),
            children: Vec::new(),
            label_set: vec![class],
            weight,
            conditional: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn left(&self) -> Option<NodeId> {
        (self.children.len() == 2).then(|| self.children[0])
    }

    pub fn right(&self) -> Option<NodeId> {
        (self.children.len() == 2).then(|| self.children[1])
    }
}

/// Which branch of an internal node a path takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTree {
    num_classes: usize,
    root: NodeId,
    nodes: Vec<TreeNode>,
}

/// A broken tree invariant, as reported by [`DecompositionTree::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RootOutOfRange { root: NodeId },
    IdMismatch { index: usize, id: NodeId },
    NotFullBinary { node: NodeId, children: usize },
    ChildOutOfRange { node: NodeId, child: NodeId },
    MultipleParents { node: NodeId },
    Unreachable { node: NodeId },
    LeafWithoutClass { node: NodeId },
    InternalWithClass { node: NodeId },
    LeafLabelSet { node: NodeId },
    LabelSetsNotDisjoint { node: NodeId },
    LabelSetNotUnion { node: NodeId },
    ClassOutOfRange { node: NodeId, class: ClassId },
    DuplicateClass { class: ClassId },
    LeafCount { expected: usize, found: usize },
    InternalCount { expected: usize, found: usize },
    RootLabelSet,
    WeightNotAdditive { node: NodeId },
    RootWeight { weight: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RootOutOfRange { root } => write!(f, "root {root} out of range"),
            Violation::IdMismatch { index, id } => {
                write!(f, "node at index {index} carries id {id}")
            }
            Violation::NotFullBinary { node, children } => {
                write!(f, "node {node}: not full binary ({children} children)")
            }
            Violation::ChildOutOfRange { node, child } => {
                write!(f, "node {node}: child {child} out of range")
            }
            Violation::MultipleParents { node } => {
                write!(f, "node {node}: reached more than once")
            }
            Violation::Unreachable { node } => write!(f, "node {node}: unreachable from root"),
            Violation::LeafWithoutClass { node } => write!(f, "node {node}: leaf without class"),
            Violation::InternalWithClass { node } => {
                write!(f, "node {node}: internal node carries a class")
            }
            Violation::LeafLabelSet { node } => {
                write!(f, "node {node}: leaf label set is not its singleton class")
            }
            Violation::LabelSetsNotDisjoint { node } => {
                write!(f, "node {node}: label sets not disjoint")
            }
            Violation::LabelSetNotUnion { node } => {
                write!(f, "node {node}: label set is not the union of its children")
            }
            Violation::ClassOutOfRange { node, class } => {
                write!(f, "node {node}: class {class} out of range")
            }
            Violation::DuplicateClass { class } => write!(f, "class {class} has several leaves"),
            Violation::LeafCount { expected, found } => {
                write!(f, "expected {expected} leaves, found {found}")
            }
            Violation::InternalCount { expected, found } => {
                write!(f, "expected {expected} internal nodes, found {found}")
            }
            Violation::RootLabelSet => write!(f, "root label set is not all classes"),
            Violation::WeightNotAdditive { node } => {
                write!(f, "node {node}: weight is not the sum of its children")
            }
            Violation::RootWeight { weight } => write!(f, "root weight {weight} is not 1"),
        }
    }
}

fn sorted_union(a: &[ClassId], b: &[ClassId]) -> Vec<ClassId> {
    let set: BTreeSet<ClassId> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

impl DecompositionTree {
    /// Assembles a tree without checking it; see [`validate`](Self::validate).
    pub fn from_parts(nodes: Vec<TreeNode>, root: NodeId, num_classes: usize) -> Self {
        DecompositionTree {
            num_classes,
            root,
            nodes,
        }
    }

    /// Assembles a tree and rejects it if any invariant fails.
    pub fn checked(nodes: Vec<TreeNode>, root: NodeId, num_classes: usize) -> Result<Self> {
        let tree = DecompositionTree::from_parts(nodes, root, num_classes);
        tree.ensure_valid()?;
        Ok(tree)
    }

    /// Builds a tree from nested parentheses such as `((0 1) 2)`. Weights
    /// come from `priors`.
    pub fn parse_nested(expr: &str, priors: &Prior) -> Result<Self> {
        let tokens: Vec<String> = expr
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        let mut builder = NestedBuilder {
            tokens,
            pos: 0,
            nodes: Vec::new(),
            priors,
        };
        let root = builder.parse()?;
        if builder.pos != builder.tokens.len() {
            return Err(Error::Degenerate(format!(
                "trailing input in tree expression `{expr}`"
            )));
        }
        // Renumber so leaves come first (leaf id = class id), matching built trees.
        let tree = DecompositionTree::from_parts(builder.nodes, root, priors.len());
        tree.ensure_valid()?;
        Ok(tree.renumbered())
    }

    /// A caterpillar (decision-list) tree: `order[0]` is split off at the
    /// root, then `order[1]`, and so on.
    pub fn caterpillar(order: &[ClassId], priors: &Prior) -> Result<Self> {
        if order.len() < 2 {
            return Err(Error::TooFewClasses {
                needed: 2,
                found: order.len(),
            });
        }
        let mut expr = format!("{}", order[order.len() - 1]);
        for class in order[..order.len() - 1].iter().rev() {
            expr = format!("({class} {expr})");
        }
        DecompositionTree::parse_nested(&expr, priors)
    }

    fn renumbered(self) -> Self {
        let k = self.num_classes;
        let mut new_ids = vec![usize::MAX; self.nodes.len()];
        for node in &self.nodes {
            if let Some(c) = node.class {
                new_ids[node.id] = c;
            }
        }
        let mut next = k;
        for id in self.post_order() {
            if !self.nodes[id].is_leaf() {
                new_ids[id] = next;
                next += 1;
            }
        }
        let mut nodes: Vec<Option<TreeNode>> = vec![None; self.nodes.len()];
        for mut node in self.nodes {
            let new_id = new_ids[node.id];
            node.id = new_id;
            for child in &mut node.children {
                *child = new_ids[*child];
            }
            nodes[new_id] = Some(node);
        }
        DecompositionTree {
            num_classes: k,
            root: new_ids[self.root],
            nodes: nodes.into_iter().map(|n| n.expect("renumbering is a bijection")).collect(),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    /// Internal node ids in ascending order.
    pub fn internal_nodes(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| !n.is_leaf())
            .map(|n| n.id)
            .collect()
    }

    pub fn leaf_of(&self, class: ClassId) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.is_leaf() && n.class == Some(class))
            .map(|n| n.id)
    }

    /// Node ids in post order (children before parents).
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded || self.nodes[id].is_leaf() {
                out.push(id);
            } else {
                stack.push((id, true));
                for &child in self.nodes[id].children.iter().rev() {
                    stack.push((child, false));
                }
            }
        }
        out
    }

    /// Internal nodes on the way from the root to `class`, with the branch
    /// taken at each.
    pub fn path_to(&self, class: ClassId) -> Vec<(NodeId, Branch)> {
        let mut path = Vec::new();
        let mut id = self.root;
        while !self.nodes[id].is_leaf() {
            let node = &self.nodes[id];
            let left = node.children[0];
            if self.nodes[left].label_set.binary_search(&class).is_ok() {
                path.push((id, Branch::Left));
                id = left;
            } else {
                path.push((id, Branch::Right));
                id = node.children[1];
            }
        }
        path
    }

    /// Strips construction-time conditionals.
    pub fn without_conditionals(mut self) -> Self {
        for node in &mut self.nodes {
            node.conditional = None;
        }
        self
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        let n = self.nodes.len();
        let k = self.num_classes;
        if self.root >= n {
            violations.push(Violation::RootOutOfRange { root: self.root });
            return Err(violations);
        }
        for (index, node) in self.nodes.iter().enumerate() {
            if node.id != index {
                violations.push(Violation::IdMismatch { index, id: node.id });
            }
        }

        let mut visits = vec![0usize; n];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            visits[id] += 1;
            if visits[id] > 1 {
                violations.push(Violation::MultipleParents { node: id });
                continue;
            }
            for &child in &self.nodes[id].children {
                if child >= n {
                    violations.push(Violation::ChildOutOfRange { node: id, child });
                } else {
                    stack.push(child);
                }
            }
        }
        for (id, &v) in visits.iter().enumerate() {
            if v == 0 {
                violations.push(Violation::Unreachable { node: id });
            }
        }

        let mut seen_classes = vec![false; k];
        let (mut leaves, mut internals) = (0, 0);
        for node in &self.nodes {
            let id = node.id;
            match node.children.len() {
                0 => {
                    leaves += 1;
                    match node.class {
                        None => violations.push(Violation::LeafWithoutClass { node: id }),
                        Some(c) if c >= k => {
                            violations.push(Violation::ClassOutOfRange { node: id, class: c })
                        }
                        Some(c) => {
                            if seen_classes[c] {
                                violations.push(Violation::DuplicateClass { class: c });
                            }
                            seen_classes[c] = true;
                            if node.label_set != [c] {
                                violations.push(Violation::LeafLabelSet { node: id });
                            }
                        }
                    }
                }
                2 => {
                    internals += 1;
                    if node.class.is_some() {
                        violations.push(Violation::InternalWithClass { node: id });
                    }
                    let (l, r) = (node.children[0], node.children[1]);
                    if l >= n || r >= n {
                        continue;
                    }
                    let (ls, rs) = (&self.nodes[l].label_set, &self.nodes[r].label_set);
                    let lset: BTreeSet<_> = ls.iter().collect();
                    if rs.iter().any(|c| lset.contains(c)) {
                        violations.push(Violation::LabelSetsNotDisjoint { node: id });
                    }
                    if node.label_set != sorted_union(ls, rs) {
                        violations.push(Violation::LabelSetNotUnion { node: id });
                    }
                    let sum = self.nodes[l].weight + self.nodes[r].weight;
                    if (node.weight - sum).abs() > WEIGHT_TOLERANCE {
                        violations.push(Violation::WeightNotAdditive { node: id });
                    }
                }
                children => violations.push(Violation::NotFullBinary { node: id, children }),
            }
        }
        if leaves != k {
            violations.push(Violation::LeafCount {
                expected: k,
                found: leaves,
            });
        }
        if internals + 1 != k {
            violations.push(Violation::InternalCount {
                expected: k.saturating_sub(1),
                found: internals,
            });
        }
        let root = &self.nodes[self.root];
        if root.label_set != (0..k).collect::<Vec<_>>() {
            violations.push(Violation::RootLabelSet);
        }
        if (root.weight - 1.0).abs() > WEIGHT_TOLERANCE {
            violations.push(Violation::RootWeight {
                weight: root.weight,
            });
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().map_err(Error::InvalidTree)
    }

    pub fn shape(&self) -> TreeShape {
        let mut depths = vec![0usize; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            for &child in &self.nodes[id].children {
                depths[child] = depths[id] + 1;
                stack.push(child);
            }
        }
        let leaf_depths: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| depths[n.id])
            .collect();
        let max_depth = leaf_depths.iter().copied().max().unwrap_or(0);
        let min_depth = leaf_depths.iter().copied().min().unwrap_or(0);
        let mean_leaf_depth =
            leaf_depths.iter().sum::<usize>() as f64 / leaf_depths.len().max(1) as f64;
        let skewed = self.nodes.iter().filter(|n| !n.is_leaf()).all(|n| {
            n.children.iter().any(|&c| self.nodes[c].is_leaf())
        });
        TreeShape {
            max_depth,
            min_depth,
            mean_leaf_depth,
            skewed,
        }
    }

    /// Nested-parentheses rendering, e.g. `((0 1) 2)`.
    pub fn to_nested(&self) -> String {
        fn render(tree: &DecompositionTree, id: NodeId, out: &mut String) {
            let node = &tree.nodes[id];
            match node.class {
                Some(c) if node.is_leaf() => out.push_str(&c.to_string()),
                _ => {
                    out.push('(');
                    render(tree, node.children[0], out);
                    out.push(' ');
                    render(tree, node.children[1], out);
                    out.push(')');
                }
            }
        }
        let mut out = String::new();
        render(self, self.root, &mut out);
        out
    }
}

struct NestedBuilder<'a> {
    tokens: Vec<String>,
    pos: usize,
    nodes: Vec<TreeNode>,
    priors: &'a Prior,
}

impl NestedBuilder<'_> {
    fn parse(&mut self) -> Result<NodeId> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Degenerate("unexpected end of tree expression".into()))?;
        self.pos += 1;
        if token == "(" {
            let left = self.parse()?;
            let right = self.parse()?;
            if self.tokens.get(self.pos).map(String::as_str) != Some(")") {
                return Err(Error::Degenerate(
                    "tree expression: expected `)` after two subtrees".into(),
                ));
            }
            self.pos += 1;
            let id = self.nodes.len();
            let (l, r) = (&self.nodes[left], &self.nodes[right]);
            let node = TreeNode {
                id,
                class: None,
                children: vec![left, right],
                label_set: sorted_union(&l.label_set, &r.label_set),
                weight: l.weight + r.weight,
                conditional: None,
            };
            self.nodes.push(node);
            Ok(id)
        } else {
            let class: ClassId = token.parse().map_err(|_| {
                Error::Degenerate(format!("tree expression: invalid class id `{token}`"))
            })?;
            if class >= self.priors.len() {
                return Err(Error::IndexOutOfRange {
                    index: class,
                    len: self.priors.len(),
                });
            }
            let id = self.nodes.len();
            self.nodes
                .push(TreeNode::leaf(id, class, self.priors.get(class)));
            Ok(id)
        }
    }
}

/// Depth statistics, to monitor how skewed selected trees are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeShape {
    pub max_depth: usize,
    pub min_depth: usize,
    pub mean_leaf_depth: f64,
    /// Every internal node has at least one leaf child.
    pub skewed: bool,
}

/// A candidate merger of forest trees `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeCandidate {
    pub i: usize,
    pub j: usize,
    pub js: f64,
    pub prob: f64,
}

/// A forest of partial decomposition trees sharing one node arena.
#[derive(Debug, Clone)]
pub struct Forest {
    nodes: Vec<TreeNode>,
    roots: Vec<NodeId>,
    num_classes: usize,
}

impl Forest {
    /// One single-leaf tree per class, in class order.
    pub fn new(priors: &Prior, conditionals: &[Multinomial]) -> Result<Self> {
        let k = priors.len();
        if conditionals.len() != k {
            return Err(Error::ArityMismatch {
                expected: k,
                found: conditionals.len(),
            });
        }
        if k < 2 {
            return Err(Error::TooFewClasses { needed: 2, found: k });
        }
        let dim = conditionals[0].dim();
        let mut nodes = Vec::with_capacity(2 * k - 1);
        for (class, cond) in conditionals.iter().enumerate() {
            if cond.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: cond.dim(),
                });
            }
            let mut leaf = TreeNode::leaf(class, class, priors.get(class));
            leaf.conditional = Some(cond.clone());
            nodes.push(leaf);
        }
        Ok(Forest {
            nodes,
            roots: (0..k).collect(),
            num_classes: k,
        })
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Root node of the tree at forest index `i`.
    pub fn tree(&self, i: usize) -> &TreeNode {
        &self.nodes[self.roots[i]]
    }

    fn pair_prior(&self, i: usize, j: usize) -> Prior {
        let (wi, wj) = (self.tree(i).weight, self.tree(j).weight);
        // Zero-weight pairs fall back to an even split.
        Prior::binary(wi, wj).unwrap_or_else(|_| Prior::uniform(2).expect("k = 2"))
    }

    fn conditional(&self, i: usize) -> &Multinomial {
        self.tree(i)
            .conditional
            .as_ref()
            .expect("forest nodes always carry conditionals")
    }

    /// Merges forest trees `i` and `j` under a new internal node (`i` on the
    /// left). Both are removed and the merged tree is appended at the end.
    pub fn merge(&mut self, i: usize, j: usize) -> Result<NodeId> {
        let len = self.roots.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        if i == j {
            return Err(Error::SelfMerge(i));
        }
        let prior = self.pair_prior(i, j);
        let conditional = mutual_source(
            &prior,
            &[self.conditional(i).clone(), self.conditional(j).clone()],
        )?;
        let (left, right) = (self.roots[i], self.roots[j]);
        let id = self.nodes.len();
        let node = TreeNode {
            id,
            class: None,
            children: vec![left, right],
            label_set: sorted_union(&self.nodes[left].label_set, &self.nodes[right].label_set),
            weight: self.nodes[left].weight + self.nodes[right].weight,
            conditional: Some(conditional),
        };
        self.nodes.push(node);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.roots.remove(hi);
        self.roots.remove(lo);
        self.roots.push(id);
        Ok(id)
    }

    /// Finishes a forest reduced to one tree.
    pub fn into_tree(self) -> Result<DecompositionTree> {
        if self.roots.len() != 1 {
            return Err(Error::Degenerate(format!(
                "forest still has {} trees",
                self.roots.len()
            )));
        }
        let tree = DecompositionTree::from_parts(self.nodes, self.roots[0], self.num_classes);
        tree.ensure_valid()?;
        Ok(tree)
    }
}

/// All unordered pairs `(i, j)`, `i < j`, in ascending order, with merge
/// probabilities proportional to `2^-JS(i, j)`.
pub fn pairwise_js(forest: &Forest) -> Result<Vec<MergeCandidate>> {
    let n = forest.len();
    if n < 2 {
        return Err(Error::TooFewClasses { needed: 2, found: n });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let divergences = pairs
        .iter()
        .map(|&(i, j)| {
            js_divergence(
                &forest.pair_prior(i, j),
                &[forest.conditional(i).clone(), forest.conditional(j).clone()],
            )
        })
        .collect::<Result<Vec<f64>>>()?;
    let scores: Vec<f64> = divergences.iter().map(|&js| (-js).exp2()).collect();
    let total: f64 = scores.iter().sum();
    Ok(pairs
        .into_iter()
        .zip(divergences)
        .zip(scores)
        .map(|(((i, j), js), score)| MergeCandidate {
            i,
            j,
            js,
            prob: score / total,
        })
        .collect())
}

/// Draws one candidate by inverse CDF over the list order using a single
/// uniform draw from `rng`.
pub fn sample_merge<R: Rng + ?Sized>(
    candidates: &[MergeCandidate],
    rng: &mut R,
) -> Result<(usize, usize)> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for c in candidates {
        cumulative += c.prob;
        if u < cumulative {
            return Ok((c.i, c.j));
        }
    }
    // Rounding left u past the last cumulative sum.
    let last = candidates
        .iter()
        .rev()
        .find(|c| c.prob > 0.0)
        .unwrap_or(&candidates[candidates.len() - 1]);
    Ok((last.i, last.j))
}

/// The minimum-divergence candidate, first in list order on ties.
pub fn greedy_merge(candidates: &[MergeCandidate]) -> Result<(usize, usize)> {
    let mut best: Option<&MergeCandidate> = None;
    for c in candidates {
        if best.is_none_or(|b| c.js < b.js) {
            best = Some(c);
        }
    }
    best.map(|c| (c.i, c.j)).ok_or(Error::EmptyCandidates)
}

/// One randomized agglomerative run: `k - 1` sampled mergers.
pub fn build_tree<R: Rng + ?Sized>(
    priors: &Prior,
    conditionals: &[Multinomial],
    rng: &mut R,
) -> Result<DecompositionTree> {
    let mut forest = Forest::new(priors, conditionals)?;
    while forest.len() > 1 {
        let candidates = pairwise_js(&forest)?;
        let (i, j) = sample_merge(&candidates, rng)?;
        forest.merge(i, j)?;
    }
    forest.into_tree()
}

/// Deterministic variant that always merges the closest pair.
pub fn build_tree_greedy(priors: &Prior, conditionals: &[Multinomial]) -> Result<DecompositionTree> {
    let mut forest = Forest::new(priors, conditionals)?;
    while forest.len() > 1 {
        let candidates = pairwise_js(&forest)?;
        let (i, j) = greedy_merge(&candidates)?;
        forest.merge(i, j)?;
    }
    forest.into_tree()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Randomized,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub runs: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub leaf_weight: LeafWeight,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            runs: 10,
            seed: 0,
            strategy: Strategy::Randomized,
            leaf_weight: LeafWeight::Prior,
        }
    }
}

/// The tree of `runs` independent randomized runs maximizing `Q(T)`.
/// Run `r` uses seed `seed + r`; ties go to the earliest run.
pub fn best_of_runs(
    priors: &Prior,
    conditionals: &[Multinomial],
    runs: usize,
    seed: u64,
) -> Result<(DecompositionTree, TreeBoundReport)> {
    best_of_runs_with(
        priors,
        conditionals,
        &BuildOptions {
            runs,
            seed,
            ..BuildOptions::default()
        },
    )
}

pub fn best_of_runs_with(
    priors: &Prior,
    conditionals: &[Multinomial],
    options: &BuildOptions,
) -> Result<(DecompositionTree, TreeBoundReport)> {
    if options.runs == 0 {
        return Err(Error::Degenerate("runs must be at least 1".into()));
    }
    let runs = match options.strategy {
        Strategy::Greedy => 1,
        Strategy::Randomized => options.runs,
    };
    let results = (0..runs)
        .into_par_iter()
        .map(|run| {
            let tree = match options.strategy {
                Strategy::Randomized => {
                    let mut rng = seeded(derive_seed(options.seed, run as u64));
                    build_tree(priors, conditionals, &mut rng)?
                }
                Strategy::Greedy => build_tree_greedy(priors, conditionals)?,
            };
            let report = tree_bounds(&tree, priors, conditionals, options.leaf_weight)?;
            Ok((tree, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(DecompositionTree, TreeBoundReport)> = None;
    for (tree, report) in results {
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.q_total > b.q_total)
        {
            best = Some((tree, report));
        }
    }
    Ok(best.expect("runs >= 1"))
}

/// The serialized form of a selected tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema: String,
    pub seed: u64,
    pub runs: usize,
    pub strategy: Strategy,
    pub leaf_weight: LeafWeight,
    #[serde(default)]
    pub class_names: Vec<String>,
    pub tree: DecompositionTree,
    pub shape: TreeShape,
    pub bounds: TreeBoundReport,
}

impl TreeDocument {
    pub fn new(
        tree: DecompositionTree,
        bounds: TreeBoundReport,
        options: &BuildOptions,
        class_names: Vec<String>,
    ) -> Self {
        let tree = tree.without_conditionals();
        TreeDocument {
            schema: TREE_SCHEMA.to_owned(),
            seed: options.seed,
            runs: options.runs,
            strategy: options.strategy,
            leaf_weight: options.leaf_weight,
            class_names,
            shape: tree.shape(),
            tree,
            bounds,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut out = serde_json::to_string_pretty(self)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDocument = serde_json::from_str(text)?;
        if doc.schema != TREE_SCHEMA {
            return Err(Error::Degenerate(format!(
                "unsupported tree schema `{}`",
                doc.schema
            )));
        }
        doc.tree.ensure_valid()?;
        Ok(doc)
    }
}
