use hierclass::bounds::{
    brute_force_bayes_error, multiclass_js_bounds, tree_bounds, LeafWeight,
};
use hierclass::classify::{BinaryScorer, HierarchicalClassifier};
use hierclass::corpus::{
    chunk_lengths, chunk_paragraphs, extract_features, fit_vocabulary, project, tokenize, Chunk,
};
use hierclass::decomposition::{build_tree, pairwise_js, Branch, DecompositionTree, Forest};
use hierclass::multinomial::{
    estimate_ml, js_divergence, js_divergence_kl, kl_divergence, mutual_source,
};
use hierclass::rng::seeded;
use hierclass::{CountVector, Multinomial, Prior};
use proptest::prelude::*;
use rand::Rng;

fn weights(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], dim)
        .prop_filter("positive mass", |w| w.iter().sum::<f64>() > 0.0)
}

/// `(prior, conditionals)` with `k` classes over `dim` symbols.
fn problem(k: std::ops::Range<usize>, dim: std::ops::Range<usize>) -> impl Strategy<Value = (Prior, Vec<Multinomial>)> {
    (k, dim).prop_flat_map(|(k, dim)| {
        (
            prop::collection::vec(0.05f64..1.0, k),
            prop::collection::vec(weights(dim), k),
        )
            .prop_map(|(p, ds)| {
                (
                    Prior::new(normalize(&p)).unwrap(),
                    ds.iter().map(|w| Multinomial::from_weights(w).unwrap()).collect(),
                )
            })
    })
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// A random full binary tree over the problem's classes.
fn random_tree(priors: &Prior, conds: &[Multinomial], seed: u64) -> DecompositionTree {
    let mut rng = seeded(seed);
    let mut forest = Forest::new(priors, conds).unwrap();
    while forest.len() > 1 {
        let i = rng.random_range(0..forest.len());
        let mut j = rng.random_range(0..forest.len() - 1);
        if j >= i {
            j += 1;
        }
        forest.merge(i, j).unwrap();
    }
    forest.into_tree().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn js_forms_agree((prior, dists) in problem(2..7, 1..12)) {
        let a = js_divergence(&prior, &dists).unwrap();
        let b = js_divergence_kl(&prior, &dists).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }

    #[test]
    fn js_is_bounded_and_symmetric((prior, dists) in problem(2..7, 1..12), rot in 0usize..7) {
        let js = js_divergence(&prior, &dists).unwrap();
        prop_assert!(js >= 0.0 && js <= prior.entropy() + 1e-12);
        let k = dists.len();
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        let prior2 = Prior::new(perm.iter().map(|&i| prior.get(i)).collect()).unwrap();
        let dists2: Vec<Multinomial> = perm.iter().map(|&i| dists[i].clone()).collect();
        let js2 = js_divergence(&prior2, &dists2).unwrap();
        prop_assert!((js - js2).abs() <= 1e-12);
    }

    #[test]
    fn smoothing_moves_toward_uniform(
        counts in prop::collection::vec(0u64..50, 1..15),
        a1 in 0.0f64..5.0,
        step in 0.0f64..5.0,
    ) {
        prop_assume!(counts.iter().sum::<u64>() > 0 || a1 > 0.0);
        let cv = CountVector::from_dense(&counts);
        let dim = counts.len();
        let lo = estimate_ml(&cv, dim, a1).unwrap();
        let hi = estimate_ml(&cv, dim, a1 + step).unwrap();
        let u = 1.0 / dim as f64;
        for i in 0..dim {
            prop_assert!((hi.get(i) - u).abs() <= (lo.get(i) - u).abs() + 1e-15);
        }
    }

    #[test]
    fn multiclass_sandwich((prior, dists) in problem(2..6, 1..10)) {
        let r = multiclass_js_bounds(&prior, &dists).unwrap();
        let e = brute_force_bayes_error(&prior, &dists).unwrap();
        prop_assert!(r.lower - 1e-9 <= e && e <= r.upper + 1e-9, "{} <= {e} <= {}", r.lower, r.upper);
    }

    #[test]
    fn mutual_source_minimizes_weighted_kl(
        (prior, dists) in problem(2..5, 2..8),
        noise in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let m = mutual_source(&prior, &dists).unwrap();
        let objective = |q: &Multinomial| -> f64 {
            dists
                .iter()
                .enumerate()
                .map(|(i, p)| prior.get(i) * kl_divergence(p, q).unwrap())
                .sum()
        };
        let perturbed: Vec<f64> = m
            .probs()
            .iter()
            .zip(&noise)
            .map(|(p, n)| p * n.exp() + 1e-6)
            .collect();
        let q = Multinomial::from_weights(&perturbed).unwrap();
        prop_assert!(objective(&m) <= objective(&q) + 1e-12);
    }

    #[test]
    fn recurrence_matches_path_products((prior, dists) in problem(2..9, 2..8), seed in any::<u64>()) {
        let tree = random_tree(&prior, &dists, seed);
        let report = tree_bounds(&tree, &prior, &dists, LeafWeight::Prior).unwrap();
        let q: std::collections::BTreeMap<usize, (f64, f64)> = report
            .per_node
            .iter()
            .map(|b| (b.node, (b.q, b.q_prime)))
            .collect();
        let (mut q_sum, mut qp_sum) = (0.0, 0.0);
        for class in 0..prior.len() {
            let path = tree.path_to(class);
            q_sum += prior.get(class) * path.iter().map(|(v, _)| q[v].0).product::<f64>();
            qp_sum += prior.get(class) * path.iter().map(|(v, _)| q[v].1).product::<f64>();
        }
        prop_assert!((report.q_total - q_sum).abs() <= 1e-12);
        prop_assert!((report.q_prime_total - qp_sum).abs() <= 1e-12);
    }

    #[test]
    fn merge_probability_decreases_with_divergence((prior, dists) in problem(3..7, 2..8)) {
        let forest = Forest::new(&prior, &dists).unwrap();
        let cands = pairwise_js(&forest).unwrap();
        let total: f64 = cands.iter().map(|c| c.prob).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
        for a in &cands {
            for b in &cands {
                if a.js < b.js {
                    prop_assert!(a.prob >= b.prob);
                }
            }
        }
    }

    #[test]
    fn node_conditional_is_class_mixture((prior, dists) in problem(2..8, 2..8), seed in any::<u64>()) {
        let tree = build_tree(&prior, &dists, &mut seeded(seed)).unwrap();
        for node in tree.nodes() {
            let mass: f64 = node.label_set.iter().map(|&c| prior.get(c)).sum();
            prop_assert!((node.weight - mass).abs() <= 1e-9);
            let cond = node.conditional.as_ref().unwrap();
            for x in 0..cond.dim() {
                let mix: f64 = node
                    .label_set
                    .iter()
                    .map(|&c| prior.get(c) * dists[c].get(x))
                    .sum::<f64>()
                    / mass;
                prop_assert!((cond.get(x) - mix).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn build_is_deterministic_and_valid((prior, dists) in problem(2..9, 2..8), seed in any::<u64>()) {
        let a = build_tree(&prior, &dists, &mut seeded(seed)).unwrap();
        let b = build_tree(&prior, &dists, &mut seeded(seed)).unwrap();
        prop_assert!(a.validate().is_ok());
        prop_assert_eq!(a.nodes().len(), 2 * prior.len() - 1);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn soft_paths_sum_to_one(
        (prior, dists) in problem(2..8, 2..8),
        seed in any::<u64>(),
        x in prop::collection::vec(0u64..4, 8),
    ) {
        let tree = random_tree(&prior, &dists, seed);
        let clf = HierarchicalClassifier::from_exact(tree.clone(), &prior, &dists).unwrap();
        let dim = dists[0].dim();
        let x = CountVector::from_dense(&x[..dim]);
        let (class, probs) = clf.decode_soft(&x);
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(probs.iter().all(|&p| p <= probs[class]));
        prop_assert!(probs[..class].iter().all(|&p| p < probs[class]));
        // Hard decoding follows the branch chosen at every node.
        let hard = clf.decode_hard(&x);
        prop_assert!(hard < prior.len());
        for (node, branch) in tree.path_to(hard) {
            let p = clf.models[&node].predict_proba(&x);
            prop_assert_eq!(branch == Branch::Right, p >= 0.5);
        }
    }

    #[test]
    fn tokenize_is_idempotent(text in "[a-zA-Z0-9 .;,:?!'()\"/\\\\\\-_#é\n\t]{0,80}") {
        let once = tokenize(&text);
        let twice = tokenize(&once.join(" "));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn chunks_conserve_tokens(n in 0usize..5000, size in 2usize..1500) {
        let tokens: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let chunks = chunk_paragraphs(tokens.clone(), size, "d", 0);
        let joined: Vec<String> = chunks.iter().flat_map(|c| c.tokens.clone()).collect();
        prop_assert_eq!(joined, tokens);
        prop_assert_eq!(
            chunks.iter().map(|c| c.tokens.len()).collect::<Vec<_>>(),
            chunk_lengths(n, size)
        );
        for (i, c) in chunks.iter().enumerate() {
            prop_assert_eq!(c.index, i);
        }
    }

    #[test]
    fn chunk_law_at_default_size(n in 500usize..20_000) {
        for len in chunk_lengths(n, 1000) {
            prop_assert!((500..=1499).contains(&len), "n = {n}: {len}");
        }
    }

    #[test]
    fn projection_is_subsequence_and_counts_add_up(
        words in prop::collection::vec(0usize..30, 0..300),
        top_k in 1usize..25,
    ) {
        let chunk = Chunk {
            doc_id: "d".into(),
            class_id: 0,
            index: 0,
            tokens: words.iter().map(|w| format!("w{w}")).collect(),
            flagged: false,
        };
        let vocab = fit_vocabulary(&[&chunk], top_k).unwrap().vocabulary;
        let projected = project(&chunk, &vocab);
        // Subsequence of the original tokens.
        let mut it = chunk.tokens.iter();
        for &id in &projected {
            let t = &vocab.tokens()[id];
            prop_assert!(it.any(|x| x == t));
        }
        let in_vocab = chunk.tokens.iter().filter(|t| vocab.id(t).is_some()).count();
        prop_assert_eq!(projected.len(), in_vocab);
        let f = extract_features(&projected, &vocab);
        let uni: u64 = f.entries().iter().filter(|(i, _)| *i < vocab.unigram_count()).map(|e| e.1).sum();
        let bi: u64 = f.entries().iter().filter(|(i, _)| *i >= vocab.unigram_count()).map(|e| e.1).sum();
        prop_assert_eq!(uni as usize, projected.len());
        prop_assert_eq!(bi as usize, projected.len().saturating_sub(1));
        prop_assert!(f.entries().iter().all(|(i, _)| *i < vocab.dim()));
    }
}

#[test]
fn js_extremes() {
    let half = Prior::uniform(2).unwrap();
    let p = Multinomial::point(2, 0).unwrap();
    let q = Multinomial::point(2, 1).unwrap();
    assert!((js_divergence(&half, &[p.clone(), q]).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(js_divergence(&half, &[p.clone(), p]).unwrap(), 0.0);
}
