use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hierclass::bounds::{
    multiclass_js_bounds, tree_bayes_error, tree_bounds, REPORT_COLUMNS,
};
use hierclass::classify::{
    cross_validate, cross_validate_with, train_all_pairs, train_hierarchy, CvConfig, CvReport,
    Dataset, Hyperparams, Scheme,
};
use hierclass::corpus::{
    chunk_corpus, featurize_chunks, fit_vocabulary, load_manifest, Chunk, FeatureMatrix, RowInfo,
};
use hierclass::decomposition::{best_of_runs_with, BuildOptions, TreeDocument};
use hierclass::Error;

use crate::model::{ModelDocument, TrainedClassifier, MODEL_SCHEMA};
use crate::problem::parse_problem;
use crate::{
    BoundsArgs, BuildTreeArgs, CompareArgs, EvaluateArgs, PreprocessArgs, RunConfig, TrainArgs,
    VocabScope,
};

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// CSV to `out`, or standard output.
fn emit_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    let text = String::from_utf8(bytes).expect("CSV of UTF-8 fields");
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::read(path).with_context(|| format!("loading features {}", path.display()))
}

fn build_options(config: &RunConfig) -> BuildOptions {
    BuildOptions {
        runs: config.runs,
        seed: config.seed,
        strategy: config.strategy,
        leaf_weight: config.leaf_weight,
    }
}

fn hyperparams(config: &RunConfig) -> Hyperparams {
    Hyperparams {
        smoothing: config.smoothing,
        ..Hyperparams::default()
    }
}

/// Best-of-runs tree over a dataset in which every class has samples.
fn select_tree(data: &Dataset, config: &RunConfig) -> Result<TreeDocument> {
    if data.num_classes < 2 {
        bail!("need at least 2 classes, found {}", data.num_classes);
    }
    for (class, &n) in data.class_counts().iter().enumerate() {
        if n == 0 {
            bail!("class {class} (`{}`) has no samples", data.class_names[class]);
        }
    }
    let priors = data.priors()?;
    let conditionals = data.class_conditionals(config.smoothing)?;
    let options = build_options(config);
    let (tree, report) = best_of_runs_with(&priors, &conditionals, &options)?;
    Ok(TreeDocument::new(tree, report, &options, data.class_names.clone()))
}

pub fn preprocess(args: &PreprocessArgs) -> Result<()> {
    let config = RunConfig {
        seed: args.seed,
        top_k: args.top_k,
        chunk_size: args.chunk_size,
        ..RunConfig::default()
    };
    config.validate()?;
    let manifest = load_manifest(&args.manifest)?;
    let chunks = chunk_corpus(&manifest.documents, config.chunk_size, args.strict);
    if chunks.is_empty() {
        bail!("{}: corpus produced no chunks", args.manifest.display());
    }
    let refs: Vec<&Chunk> = chunks.iter().collect();
    let build = fit_vocabulary(&refs, config.top_k)?;
    let vocab = build.vocabulary;
    let k = manifest.class_names.len();
    let dataset = featurize_chunks(&refs, &vocab, k)?.with_class_names(manifest.class_names.clone());
    let matrix = FeatureMatrix {
        seed: config.seed,
        unigrams: vocab.unigram_count(),
        dataset,
        rows: chunks
            .iter()
            .map(|c| RowInfo {
                doc_id: c.doc_id.clone(),
                chunk: c.index,
                flagged: c.flagged,
            })
            .collect(),
    };
    let seed_line = format!("# seed\t{}\n", config.seed);
    write_file(&args.out_dir.join("features.txt"), &matrix.to_text())?;
    write_file(
        &args.out_dir.join("vocab.txt"),
        &(seed_line.clone() + &vocab.unigram_lines()),
    )?;
    write_file(
        &args.out_dir.join("bigrams.txt"),
        &(seed_line + &vocab.bigram_lines()),
    )?;

    let counts = matrix.dataset.class_counts();
    let flagged = chunks.iter().filter(|c| c.flagged).count();
    let per_class: Vec<String> = manifest
        .class_names
        .iter()
        .zip(&counts)
        .map(|(name, n)| format!("{name}={n}"))
        .collect();
    println!(
        "classes={k} chunks={} flagged={flagged} unigrams={} bigrams={} seed={} per-class: {}",
        chunks.len(),
        vocab.unigram_count(),
        vocab.bigram_count(),
        config.seed,
        per_class.join(" ")
    );
    if build.short {
        eprintln!(
            "warning: corpus has only {} distinct tokens (top-k {})",
            vocab.unigram_count(),
            config.top_k
        );
    }
    Ok(())
}

fn tree_summary(doc: &TreeDocument) -> String {
    let b = &doc.bounds;
    let s = &doc.shape;
    let mut out = String::new();
    let _ = writeln!(out, "tree {}", doc.tree.to_nested());
    let _ = writeln!(
        out,
        "Q={} Q'={} upper={} lower={} leaf-weight={:?}",
        b.q_total, b.q_prime_total, b.upper, b.lower, doc.leaf_weight
    );
    let _ = writeln!(
        out,
        "depth max={} min={} mean={:.4} skewed={}",
        s.max_depth, s.min_depth, s.mean_leaf_depth, s.skewed
    );
    for n in &b.per_node {
        let node = doc.tree.node(n.node);
        let side = |id: usize| format!("{:?}", doc.tree.node(id).label_set);
        let _ = writeln!(
            out,
            "node {} {} vs {} J={} q={} q'={}",
            n.node,
            side(node.children[0]),
            side(node.children[1]),
            n.j_value,
            n.q,
            n.q_prime
        );
    }
    let _ = write!(out, "seed={} runs={} strategy={:?}", doc.seed, doc.runs, doc.strategy);
    out
}

pub fn build_tree(args: &BuildTreeArgs) -> Result<()> {
    let config = RunConfig::default().with_build(&args.build);
    config.validate()?;
    let matrix = read_features(&args.features)?;
    let doc = select_tree(&matrix.dataset, &config)
        .with_context(|| format!("building a tree for {}", args.features.display()))?;
    write_file(&args.out, &doc.to_json()?)?;
    println!("{}", tree_summary(&doc));
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let config = RunConfig {
        learner: args.learner.into(),
        ..RunConfig::default().with_build(&args.build)
    };
    config.validate()?;
    let matrix = read_features(&args.features)?;
    let data = &matrix.dataset;
    let hyper = hyperparams(&config);
    let classifier = match Scheme::from(args.scheme) {
        Scheme::Hierarchical => {
            let doc = match &args.tree {
                Some(path) => TreeDocument::from_json(&read_file(path)?)
                    .with_context(|| format!("loading tree {}", path.display()))?,
                None => select_tree(data, &config)?,
            };
            if doc.tree.num_classes() != data.num_classes {
                bail!(
                    "tree covers {} classes but {} has {}",
                    doc.tree.num_classes(),
                    args.features.display(),
                    data.num_classes
                );
            }
            TrainedClassifier::Hierarchical(train_hierarchy(&doc.tree, data, config.learner, &hyper)?)
        }
        Scheme::AllPairs => TrainedClassifier::AllPairs(train_all_pairs(data, config.learner, &hyper)?),
    };
    let doc = ModelDocument {
        schema: MODEL_SCHEMA.to_owned(),
        seed: config.seed,
        learner: config.learner,
        hyperparams: hyper,
        dim: data.dim,
        class_names: data.class_names.clone(),
        classifier,
    };
    write_file(&args.out, &doc.to_json()?)?;
    println!(
        "trained {:?} scheme on {} samples, {} classes, seed={}",
        args.scheme,
        data.len(),
        data.num_classes,
        config.seed
    );
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let model = ModelDocument::from_json(&read_file(&args.model)?)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let matrix = read_features(&args.features)?;
    let data = &matrix.dataset;
    if data.dim != model.dim || data.num_classes != model.class_names.len() {
        bail!(
            "{} has {} features and {} classes; the model expects {} and {}",
            args.features.display(),
            data.dim,
            data.num_classes,
            model.dim,
            model.class_names.len()
        );
    }
    let mut tallies: Vec<(&str, usize)> = Vec::new();
    match &model.classifier {
        TrainedClassifier::Hierarchical(clf) => {
            let (mut hard, mut soft) = (0, 0);
            for s in &data.samples {
                hard += (clf.decode_hard(&s.features) == s.label) as usize;
                soft += (clf.decode_soft(&s.features).0 == s.label) as usize;
            }
            tallies.push(("hierarchical-hard", hard));
            tallies.push(("hierarchical-soft", soft));
        }
        TrainedClassifier::AllPairs(clf) => {
            let correct = data
                .samples
                .iter()
                .filter(|s| clf.decode(&s.features) == s.label)
                .count();
            tallies.push(("all-pairs", correct));
        }
    }
    let total = data.len();
    let rows: Vec<Vec<String>> = tallies
        .iter()
        .map(|&(scheme, correct)| {
            vec![
                scheme.to_owned(),
                data.num_classes.to_string(),
                accuracy(correct, total).to_string(),
                model.seed.to_string(),
                correct.to_string(),
                total.to_string(),
            ]
        })
        .collect();
    emit_csv(
        args.out.as_deref(),
        &["scheme", "k", "accuracy", "seed", "correct", "total"],
        &rows,
    )
}

fn accuracy(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

pub const COMPARE_COLUMNS: [&str; 7] = ["fold", "scheme", "k", "accuracy", "seed", "correct", "total"];

/// Per-fold rows followed by one `mean` row per decoder.
fn compare_rows(report: &CvReport) -> Vec<Vec<String>> {
    let k = report.num_classes.to_string();
    let seed = report.seed.to_string();
    let mut rows = Vec::new();
    for decoder in report.decoders() {
        let scores: Vec<_> = report.scores.iter().filter(|s| s.decoder == decoder).collect();
        for s in &scores {
            rows.push(vec![
                s.fold.to_string(),
                decoder.as_str().to_owned(),
                k.clone(),
                s.accuracy.to_string(),
                seed.clone(),
                s.correct.to_string(),
                s.total.to_string(),
            ]);
        }
        let correct: usize = scores.iter().map(|s| s.correct).sum();
        let total: usize = scores.iter().map(|s| s.total).sum();
        rows.push(vec![
            "mean".to_owned(),
            decoder.as_str().to_owned(),
            k.clone(),
            report
                .mean_accuracy(decoder)
                .expect("decoder has scores")
                .to_string(),
            seed.clone(),
            correct.to_string(),
            total.to_string(),
        ]);
    }
    rows
}

fn stratification_context(e: Error, names: &[String]) -> anyhow::Error {
    match e {
        Error::Stratification { class, count, folds } => anyhow::anyhow!(
            "class {class} (`{}`) has {count} samples, fewer than {folds} folds",
            names.get(class).map(String::as_str).unwrap_or("?")
        ),
        other => other.into(),
    }
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let config = RunConfig {
        top_k: args.top_k,
        chunk_size: args.chunk_size,
        folds: args.folds,
        learner: args.learner.into(),
        ..RunConfig::default().with_build(&args.build)
    };
    config.validate()?;
    let cv = CvConfig {
        folds: config.folds,
        seed: config.seed,
        learner: config.learner,
        hyper: hyperparams(&config),
        build: build_options(&config),
    };
    let schemes = &config.schemes;
    let report = match (&args.features, &args.manifest) {
        (Some(path), _) => {
            let matrix = read_features(path)?;
            let data = &matrix.dataset;
            cross_validate(data, schemes, &cv).map_err(|e| stratification_context(e, &data.class_names))?
        }
        (None, Some(path)) => {
            let manifest = load_manifest(path)?;
            let chunks = chunk_corpus(&manifest.documents, config.chunk_size, args.strict);
            let refs: Vec<&Chunk> = chunks.iter().collect();
            let k = manifest.class_names.len();
            let names = &manifest.class_names;
            match args.vocab_scope {
                VocabScope::Global => {
                    let vocab = fit_vocabulary(&refs, config.top_k)?.vocabulary;
                    let data = featurize_chunks(&refs, &vocab, k)?.with_class_names(names.clone());
                    cross_validate(&data, schemes, &cv).map_err(|e| stratification_context(e, names))?
                }
                VocabScope::Fold => {
                    let labels: Vec<usize> = chunks.iter().map(|c| c.class_id).collect();
                    cross_validate_with(&labels, k, schemes, &cv, |_, train, test| {
                        let pick = |idx: &[usize]| idx.iter().map(|&i| refs[i]).collect::<Vec<_>>();
                        let (train, test) = (pick(train), pick(test));
                        let vocab = fit_vocabulary(&train, config.top_k)?.vocabulary;
                        Ok((
                            featurize_chunks(&train, &vocab, k)?.with_class_names(names.clone()),
                            featurize_chunks(&test, &vocab, k)?.with_class_names(names.clone()),
                        ))
                    })
                    .map_err(|e| stratification_context(e, names))?
                }
            }
        }
        (None, None) => bail!("either --features or --manifest is required"),
    };
    emit_csv(args.out.as_deref(), &COMPARE_COLUMNS, &compare_rows(&report))?;
    if args.out.is_some() {
        for t in &report.trees {
            println!("fold {} tree {} Q={}", t.fold, t.nested, t.q_total);
        }
        for decoder in report.decoders() {
            println!(
                "{} mean accuracy {}",
                decoder.as_str(),
                report.mean_accuracy(decoder).expect("decoder has scores")
            );
        }
    }
    Ok(())
}

pub fn bounds(args: &BoundsArgs) -> Result<()> {
    let problem = parse_problem(&read_file(&args.problem)?, &args.problem)?;
    let (prior, dists) = (&problem.prior, &problem.conditionals);
    let k = dists.len();
    let mut report = multiclass_js_bounds(prior, dists)?;
    match report.clone().with_oracle(prior, dists) {
        Ok(r) => report = r,
        Err(Error::EnumerationGuard { dim, limit }) => {
            eprintln!("warning: alphabet of {dim} symbols exceeds the oracle guard {limit}")
        }
        Err(e) => return Err(e.into()),
    }
    let record = if k == 2 { "binary" } else { "multiclass" };
    let mut rows = vec![report.csv_row(record)];
    if let Some(tree) = &problem.tree {
        let tree_report = tree_bounds(tree, prior, dists, args.leaf_weight.into())?;
        let error = tree_bayes_error(tree, prior, dists).ok();
        rows.extend(tree_report.csv_rows(k, error));
    }
    for row in &mut rows {
        row.push(args.seed.to_string());
    }
    let mut header: Vec<&str> = REPORT_COLUMNS.to_vec();
    header.push("seed");
    emit_csv(args.out.as_deref(), &header, &rows)
}
