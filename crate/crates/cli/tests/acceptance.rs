//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Runs without the
//! libtest harness; the process exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hierclass::bounds::{
    binary_js_bounds, brute_force_bayes_error, multiclass_js_bounds, tree_bayes_error,
    tree_bounds, LeafWeight,
};
use hierclass::classify::{
    cross_validate, train_all_pairs, train_hierarchy, CvConfig, Decoder, HierarchicalClassifier,
    Hyperparams, LearnerKind, Scheme,
};
use hierclass::corpus::{
    chunk_corpus, draw_tokens, load_manifest, render_text, synth_conditionals, synth_corpus,
    SynthConfig,
};
use hierclass::decomposition::{build_tree, DecompositionTree, Forest};
use hierclass::multinomial::{js_divergence, js_divergence_kl, kl_divergence, mutual_source};
use hierclass::rng::{seeded, SeededRng};
use hierclass::{CountVector, Multinomial, Prior};
use rand::Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn random_prior(k: usize, rng: &mut SeededRng) -> Prior {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    Prior::new(w.iter().map(|x| x / total).collect()).unwrap()
}

/// Random distribution with occasional zero entries; one instance in ten
/// is a point mass.
fn random_dist(dim: usize, rng: &mut SeededRng) -> Multinomial {
    if rng.random_bool(0.1) {
        return Multinomial::point(dim, rng.random_range(0..dim)).unwrap();
    }
    loop {
        let w: Vec<f64> = (0..dim)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
            .collect();
        if w.iter().sum::<f64>() > 0.0 {
            return Multinomial::from_weights(&w).unwrap();
        }
    }
}

fn random_problem(k: usize, dim: usize, rng: &mut SeededRng) -> (Prior, Vec<Multinomial>) {
    (random_prior(k, rng), (0..k).map(|_| random_dist(dim, rng)).collect())
}

fn random_tree(prior: &Prior, dists: &[Multinomial], rng: &mut SeededRng) -> DecompositionTree {
    let mut forest = Forest::new(prior, dists).unwrap();
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

fn c1_bound_sandwich() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut rng = seeded(101);
    for k in [2, 3, 4, 6] {
        for _ in 0..1000 {
            let dim = rng.random_range(1..=20);
            let (prior, dists) = random_problem(k, dim, &mut rng);
            let r = multiclass_js_bounds(&prior, &dists).unwrap();
            let e = brute_force_bayes_error(&prior, &dists).unwrap();
            let lower = r.j_value * r.j_value / (4.0 * (k as f64 - 1.0));
            let upper = r.j_value / 2.0;
            checked += 1;
            if !(lower - 1e-9 <= e && e <= upper + 1e-9) {
                violations.push(format!("k={k} dim={dim}: {lower} <= {e} <= {upper}"));
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        id: "C1",
        title: "bound sandwich",
        pass: violations.is_empty() && elapsed < Duration::from_secs(10),
        detail: format!(
            "{}/{checked} problems within [J^2/(4(k-1)) - 1e-9, J/2 + 1e-9], k in {{2,3,4,6}}, runtime {:.2}s (limit 10s){}",
            checked - violations.len(),
            elapsed.as_secs_f64(),
            violations.first().map(|v| format!("; first violation {v}")).unwrap_or_default()
        ),
    }
}

fn c2_js_forms() -> Outcome {
    let mut rng = seeded(202);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(2..=8);
        let dim = rng.random_range(1..=30);
        let (prior, dists) = random_problem(k, dim, &mut rng);
        let a = js_divergence(&prior, &dists).unwrap();
        let b = js_divergence_kl(&prior, &dists).unwrap();
        worst = worst.max((a - b).abs());
    }
    Outcome {
        id: "C2",
        title: "JS entropy form = KL form",
        pass: worst <= 1e-10,
        detail: format!("1000 instances, max |difference| {worst:.3e} (tolerance 1e-10)"),
    }
}

fn c3_recurrence() -> Outcome {
    let mut rng = seeded(303);
    let (mut worst_q, mut worst_qp): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let k = rng.random_range(2..=10);
        let dim = rng.random_range(2..=12);
        let (prior, dists) = random_problem(k, dim, &mut rng);
        let tree = random_tree(&prior, &dists, &mut rng);
        let report = tree_bounds(&tree, &prior, &dists, LeafWeight::Prior).unwrap();
        let node: BTreeMap<usize, (f64, f64)> =
            report.per_node.iter().map(|b| (b.node, (b.q, b.q_prime))).collect();
        let (mut q, mut qp) = (0.0, 0.0);
        for class in 0..k {
            let path = tree.path_to(class);
            q += prior.get(class) * path.iter().map(|(v, _)| node[v].0).product::<f64>();
            qp += prior.get(class) * path.iter().map(|(v, _)| node[v].1).product::<f64>();
        }
        worst_q = worst_q.max((q - report.q_total).abs());
        worst_qp = worst_qp.max((qp - report.q_prime_total).abs());
    }
    // k = 2: the one-node tree gives back the binary bounds.
    let mut worst_k2: f64 = 0.0;
    for _ in 0..200 {
        let dim = rng.random_range(1..=12);
        let (prior, dists) = random_problem(2, dim, &mut rng);
        let tree = DecompositionTree::parse_nested("(0 1)", &prior).unwrap();
        let t = tree_bounds(&tree, &prior, &dists, LeafWeight::Prior).unwrap();
        let b = binary_js_bounds(&prior, &dists[0], &dists[1]).unwrap();
        worst_k2 = worst_k2
            .max((t.upper_raw - b.upper_raw).abs())
            .max((t.lower_raw - b.lower_raw).abs());
    }
    Outcome {
        id: "C3",
        title: "tree recurrence = path-product enumeration",
        pass: worst_q <= 1e-12 && worst_qp <= 1e-12 && worst_k2 <= 1e-15,
        detail: format!(
            "200 random trees (k <= 10): max |dQ| {worst_q:.3e}, max |dQ'| {worst_qp:.3e} (tolerance 1e-12); \
             k = 2 vs J/2 and J^2/4: max |difference| {worst_k2:.3e} (floating-point rounding only, tolerance 1e-15)"
        ),
    }
}

fn c4_mutual_source() -> Outcome {
    let mut rng = seeded(404);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let (mut trials, mut wins) = (0, 0);
    let mut smallest_gap = f64::INFINITY;
    for _ in 0..200 {
        let k = rng.random_range(2..=6);
        let dim = rng.random_range(2..=15);
        let (prior, dists) = random_problem(k, dim, &mut rng);
        let m = mutual_source(&prior, &dists).unwrap();
        let objective = |q: &Multinomial| -> f64 {
            dists
                .iter()
                .enumerate()
                .map(|(i, p)| prior.get(i) * kl_divergence(p, q).unwrap())
                .sum()
        };
        let base = objective(&m);
        for _ in 0..100 {
            // Multiplicative noise alone cannot move a point mass, so a
            // little uniform mass is mixed in as well.
            let w: Vec<f64> = m
                .probs()
                .iter()
                .map(|&p| p * f64::exp(noise.sample(&mut rng)))
                .collect();
            let total: f64 = w.iter().sum();
            let eps = rng.random_range(0.001..0.1);
            let w: Vec<f64> = w.iter().map(|x| (1.0 - eps) * x / total + eps / dim as f64).collect();
            let q = Multinomial::from_weights(&w).unwrap();
            trials += 1;
            let gap = objective(&q) - base;
            smallest_gap = smallest_gap.min(gap);
            if gap > 0.0 {
                wins += 1;
            }
        }
    }
    Outcome {
        id: "C4",
        title: "mutual source minimizes weighted KL",
        pass: wins == trials,
        detail: format!(
            "mixture strictly better in {wins}/{trials} perturbation trials (200 instances x 100), smallest gap {smallest_gap:.3e}"
        ),
    }
}

fn c5_decoding_coincidence() -> Outcome {
    let mut rng = seeded(505);
    let corpus = synth_corpus(
        &SynthConfig {
            k: 2,
            dim: 30,
            tokens_per_chunk: 40,
            chunks_per_class: 100,
            separation: 0.3,
        },
        &mut rng,
    )
    .unwrap();
    let data = &corpus.dataset;
    let tree = build_tree(&data.priors().unwrap(), &data.class_conditionals(0.01).unwrap(), &mut rng).unwrap();
    let mut disagreements = 0;
    let mut worst_sum: f64 = 0.0;
    let mut total = 0;
    for kind in [LearnerKind::Generative, LearnerKind::Linear] {
        let hyper = Hyperparams::default();
        let h = train_hierarchy(&tree, data, kind, &hyper).unwrap();
        let ap = train_all_pairs(data, kind, &hyper).unwrap();
        for _ in 0..1000 {
            let class = rng.random_range(0..2);
            let n = rng.random_range(1..=60);
            let x = CountVector::from_ids(draw_tokens(&corpus.conditionals[class], n, &mut rng));
            let (soft, probs) = h.decode_soft(&x);
            worst_sum = worst_sum.max((probs.iter().sum::<f64>() - 1.0).abs());
            let hard = h.decode_hard(&x);
            let pair = ap.decode(&x);
            total += 1;
            if !(hard == soft && soft == pair) {
                disagreements += 1;
            }
        }
    }
    Outcome {
        id: "C5",
        title: "k = 2 decoding coincidence",
        pass: disagreements == 0 && worst_sum <= 1e-9,
        detail: format!(
            "hard/soft/all-pairs identical on {}/{total} samples (generative and linear learners); max |sum of path probabilities - 1| {worst_sum:.3e} (tolerance 1e-9)",
            total - disagreements
        ),
    }
}

fn c6_bayes_equivalence() -> Outcome {
    let mut rng = seeded(606);
    let (mut points, mut matches, mut skipped) = (0, 0, 0);
    for _ in 0..100 {
        let k = rng.random_range(3..=6);
        let dim = rng.random_range(2..=8);
        let (prior, dists) = random_problem(k, dim, &mut rng);
        let tree = build_tree(&prior, &dists, &mut rng).unwrap();
        let clf = HierarchicalClassifier::from_exact(tree, &prior, &dists).unwrap();
        for x in 0..dim {
            let mut joint: Vec<(f64, usize)> =
                (0..k).map(|i| (prior.get(i) * dists[i].get(x), i)).collect();
            joint.sort_by(|a, b| b.0.total_cmp(&a.0));
            if joint[0].0 - joint[1].0 <= 1e-12 * joint[0].0.max(1e-300) {
                skipped += 1;
                continue;
            }
            points += 1;
            let (soft, _) = clf.decode_soft(&CountVector::from_ids([x]));
            if soft == joint[0].1 {
                matches += 1;
            }
        }
    }
    Outcome {
        id: "C6",
        title: "exact generative nodes reproduce the Bayes rule",
        pass: matches == points && points > 0,
        detail: format!(
            "decode_soft = argmax pi_i P_i(x) on {matches}/{points} points with a unique argmax over 100 problems ({skipped} tied points skipped)"
        ),
    }
}

/// Separation levels of the synthetic corpora. At the moderate level
/// all-pairs accuracy sits near 85-90%; at the high level every scheme
/// saturates.
const MODERATE_SEPARATION: f64 = 0.05;
const HIGH_SEPARATION: f64 = 1.0;
const C7_SEEDS: u64 = 3;

/// Mean CV accuracies (soft, hard, all-pairs), averaged over seeds.
fn cv_means(k: usize, separation: f64, learner: LearnerKind, seed: u64) -> [f64; 3] {
    let mut sums = [0.0; 3];
    for s in seed..seed + C7_SEEDS {
        let corpus = synth_corpus(
            &SynthConfig {
                k,
                dim: 200,
                tokens_per_chunk: 200,
                chunks_per_class: 60,
                separation,
            },
            &mut seeded(s),
        )
        .unwrap();
        let config = CvConfig {
            seed: s,
            learner,
            ..CvConfig::default()
        };
        let report =
            cross_validate(&corpus.dataset, &[Scheme::Hierarchical, Scheme::AllPairs], &config).unwrap();
        for (sum, d) in sums
            .iter_mut()
            .zip([Decoder::HierarchicalSoft, Decoder::HierarchicalHard, Decoder::AllPairs])
        {
            *sum += report.mean_accuracy(d).unwrap();
        }
    }
    sums.map(|x| x / C7_SEEDS as f64)
}

fn percentages(a: [f64; 3]) -> String {
    format!(
        "soft {:.1}% hard {:.1}% all-pairs {:.1}%",
        100.0 * a[0],
        100.0 * a[1],
        100.0 * a[2]
    )
}

/// Asserted with the discriminative learner; the generative numbers are
/// printed alongside for reference.
fn c7_synthetic_reproduction() -> (Outcome, String) {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut reference = Vec::new();
    for (i, k) in [3usize, 5, 8].into_iter().enumerate() {
        let seed = 700 + 10 * i as u64;
        let moderate = cv_means(k, MODERATE_SEPARATION, LearnerKind::Linear, seed);
        let ok = moderate[0] >= moderate[2] - 0.02;
        pass &= ok;
        parts.push(format!(
            "k={k} moderate: {}{}",
            percentages(moderate),
            if ok { "" } else { " (soft below all-pairs - 2 points)" }
        ));
        let high = cv_means(k, HIGH_SEPARATION, LearnerKind::Linear, seed + 100);
        let ok = high[0] >= 0.9 && high[2] >= 0.9;
        pass &= ok;
        parts.push(format!(
            "k={k} high: {}{}",
            percentages(high),
            if ok { "" } else { " (below 90%)" }
        ));
        reference.push(format!(
            "k={k} moderate: {}",
            percentages(cv_means(k, MODERATE_SEPARATION, LearnerKind::Generative, seed))
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(120);
    let outcome = Outcome {
        id: "C7",
        title: "synthetic hierarchical vs all-pairs",
        pass,
        detail: format!(
            "linear learner, 60 chunks/class, 3-fold CV, {C7_SEEDS} seeds per cell, separation {MODERATE_SEPARATION} (moderate) / {HIGH_SEPARATION} (high); {}; runtime {:.1}s (limit 120s)",
            parts.join("; "),
            elapsed.as_secs_f64()
        ),
    };
    let info = format!(
        "[INFO] C7 generative learner at moderate separation (not asserted): {}",
        reference.join("; ")
    );
    (outcome, info)
}

fn run_cli(args: &[&str]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hierclass"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.success(), out.stdout)
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    files
}

/// Writes a rendered synthetic corpus with uneven document lengths.
fn write_corpus(dir: &Path) -> std::path::PathBuf {
    let mut rng = seeded(808);
    let conds = synth_conditionals(3, 300, 1.0, &mut rng).unwrap();
    let mut manifest = String::new();
    for class in 0..3 {
        for d in 0..4 {
            let n = rng.random_range(0..6000);
            let text = render_text(&draw_tokens(&conds[class], n, &mut rng));
            let name = format!("c{class}d{d}.txt");
            fs::write(dir.join(&name), text).unwrap();
            manifest.push_str(&format!("c{class}d{d}\tauthor{class}\t{name}\n"));
        }
    }
    let path = dir.join("manifest.tsv");
    fs::write(&path, manifest).unwrap();
    path
}

fn c8_determinism_and_chunk_law() -> Outcome {
    let corpus = tempfile::tempdir().unwrap();
    let manifest = write_corpus(corpus.path());
    let m = manifest.to_str().unwrap();
    let mut runs: Vec<(BTreeMap<String, Vec<u8>>, Vec<Vec<u8>>)> = Vec::new();
    let mut all_ok = true;
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        let o = |name: &str| out.path().join(name).to_str().unwrap().to_owned();
        fs::write(
            o("problem.txt"),
            "prior 0.2 0.3 0.5\n0.1 0.2 0.3 0.4\n0.4 0.3 0.2 0.1\n0.25 0.25 0.25 0.25\ntree ((0 1) 2)\n",
        )
        .unwrap();
        let commands: Vec<Vec<String>> = vec![
            vec!["preprocess".into(), "--manifest".into(), m.into(), "--out-dir".into(), o("pre"), "--top-k".into(), "200".into(), "--seed".into(), "5".into()],
            vec!["build-tree".into(), "--features".into(), o("pre/features.txt"), "--out".into(), o("tree.json"), "--seed".into(), "5".into()],
            vec!["train".into(), "--features".into(), o("pre/features.txt"), "--tree".into(), o("tree.json"), "--out".into(), o("model.json"), "--seed".into(), "5".into()],
            vec!["train".into(), "--features".into(), o("pre/features.txt"), "--scheme".into(), "all-pairs".into(), "--learner".into(), "linear".into(), "--out".into(), o("pairs.json"), "--seed".into(), "5".into()],
            vec!["evaluate".into(), "--model".into(), o("model.json"), "--features".into(), o("pre/features.txt"), "--out".into(), o("eval.csv")],
            vec!["compare".into(), "--features".into(), o("pre/features.txt"), "--out".into(), o("compare.csv"), "--seed".into(), "5".into()],
            vec!["compare".into(), "--manifest".into(), m.into(), "--top-k".into(), "200".into(), "--out".into(), o("compare-fold.csv"), "--seed".into(), "5".into()],
            vec!["bounds".into(), "--problem".into(), o("problem.txt"), "--out".into(), o("bounds.csv")],
        ];
        let mut stdouts = Vec::new();
        for c in &commands {
            let args: Vec<&str> = c.iter().map(String::as_str).collect();
            let (ok, stdout) = run_cli(&args);
            all_ok &= ok;
            stdouts.push(stdout);
        }
        runs.push((snapshot(out.path()), stdouts));
    }
    let identical = runs[0] == runs[1];
    let artifacts = runs[0].0.len();

    let loaded = load_manifest(&manifest).unwrap();
    let chunks = chunk_corpus(&loaded.documents, 1000, false);
    let regular: Vec<usize> = chunks.iter().filter(|c| !c.flagged).map(|c| c.tokens.len()).collect();
    let law = regular.iter().all(|n| (500..=1499).contains(n));
    let (lo, hi) = (
        regular.iter().min().copied().unwrap_or(0),
        regular.iter().max().copied().unwrap_or(0),
    );
    Outcome {
        id: "C8",
        title: "pipeline determinism and chunk law",
        pass: all_ok && identical && law && !regular.is_empty(),
        detail: format!(
            "8 commands run twice: all succeeded {all_ok}, {artifacts} artifacts + stdout byte-identical {identical}; \
             {} non-flagged chunks at size 1000 with lengths in [{lo}, {hi}] (required [500, 1499])",
            regular.len()
        ),
    }
}

/// Not asserted: how the tree bounds relate to the exact tree error.
fn c9_tree_bounds_report() -> String {
    let mut rng = seeded(909);
    let (mut n, mut tree_within, mut bayes_below_upper) = (0, 0, 0);
    for _ in 0..500 {
        let k = rng.random_range(3..=6);
        let dim = rng.random_range(2..=10);
        let (prior, dists) = random_problem(k, dim, &mut rng);
        let tree = random_tree(&prior, &dists, &mut rng);
        let r = tree_bounds(&tree, &prior, &dists, LeafWeight::Prior).unwrap();
        let e_tree = tree_bayes_error(&tree, &prior, &dists).unwrap();
        let e_bayes = brute_force_bayes_error(&prior, &dists).unwrap();
        n += 1;
        tree_within += (r.lower - 1e-9 <= e_tree && e_tree <= r.upper + 1e-9) as usize;
        bayes_below_upper += (e_bayes <= r.upper + 1e-9) as usize;
    }
    format!(
        "[INFO] C9 not reproducible at desk scale: absolute accuracies need the unreleased corpus and an SVM learner. \
         Tree bounds for k >= 3 (reported, not asserted): exact tree error within [1 - Q', 1 - Q] on {tree_within}/{n} random trees; \
         multiclass Bayes error <= 1 - Q on {bayes_below_upper}/{n}"
    )
}

fn main() {
    let outcomes = vec![
        c1_bound_sandwich(),
        c2_js_forms(),
        c3_recurrence(),
        c4_mutual_source(),
        c5_decoding_coincidence(),
        c6_bayes_equivalence(),
    ];
    let (c7, c7_info) = c7_synthetic_reproduction();
    let mut outcomes = outcomes;
    outcomes.push(c7);
    outcomes.push(c8_determinism_and_chunk_law());
    for o in &outcomes {
        println!(
            "[{}] {} {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.detail
        );
    }
    println!("{c7_info}");
    println!("{}", c9_tree_bounds_report());
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
