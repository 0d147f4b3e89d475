//! Explicit problem files for the `bounds` command.
//!
//! ```text
//! # two classes over three symbols
//! prior 0.25 0.75
//! 0.5 0.5 0
//! 0 0.5 0.5
//! tree (0 1)
//! ```
//!
//! One class-conditional distribution per line, in class order. The `prior`
//! line is optional (uniform when absent) and so is the `tree` line.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use hierclass::decomposition::DecompositionTree;
use hierclass::{Multinomial, Prior};

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub prior: Prior,
    pub conditionals: Vec<Multinomial>,
    pub tree: Option<DecompositionTree>,
}

fn numbers<'a>(fields: impl Iterator<Item = &'a str>) -> Result<Vec<f64>, String> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("invalid number `{f}`"))
        })
        .collect()
}

pub fn parse_problem(text: &str, path: &Path) -> Result<Problem> {
    let at = |line: usize, msg: String| anyhow!("{}:{line}: {msg}", path.display());
    let mut prior: Option<(usize, Vec<f64>)> = None;
    let mut tree: Option<(usize, String)> = None;
    let mut conditionals = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.clone().next() {
            Some("prior") => {
                fields.next();
                if prior.is_some() {
                    return Err(at(line_no, "second `prior` line".into()));
                }
                prior = Some((line_no, numbers(fields).map_err(|m| at(line_no, m))?));
            }
            Some("tree") => {
                if tree.is_some() {
                    return Err(at(line_no, "second `tree` line".into()));
                }
                tree = Some((line_no, line["tree".len()..].trim().to_owned()));
            }
            _ => {
                let probs = numbers(fields).map_err(|m| at(line_no, m))?;
                if *dim.get_or_insert(probs.len()) != probs.len() {
                    return Err(at(
                        line_no,
                        format!("expected {} probabilities, found {}", dim.unwrap_or(0), probs.len()),
                    ));
                }
                conditionals.push(Multinomial::new(probs).map_err(|e| at(line_no, e.to_string()))?);
            }
        }
    }
    if conditionals.len() < 2 {
        bail!(
            "{}: need at least 2 distributions, found {}",
            path.display(),
            conditionals.len()
        );
    }
    let prior = match prior {
        Some((line_no, weights)) => {
            if weights.len() != conditionals.len() {
                return Err(at(
                    line_no,
                    format!(
                        "prior has {} entries for {} distributions",
                        weights.len(),
                        conditionals.len()
                    ),
                ));
            }
            Prior::new(weights).map_err(|e| at(line_no, e.to_string()))?
        }
        None => Prior::uniform(conditionals.len())?,
    };
    let tree = match tree {
        Some((line_no, expr)) => {
            let t = DecompositionTree::parse_nested(&expr, &prior)
                .map_err(|e| at(line_no, e.to_string()))?;
            if t.num_classes() != conditionals.len() {
                return Err(at(
                    line_no,
                    format!(
                        "tree covers {} classes, problem has {}",
                        t.num_classes(),
                        conditionals.len()
                    ),
                ));
            }
            Some(t)
        }
        None => None,
    };
    Ok(Problem {
        prior,
        conditionals,
        tree,
    })
}
