//! Sparse feature matrix text format.
//!
//! ```text
//! %hierclass-features v1
//! %seed<TAB>42
//! %dim<TAB>5123
//! %unigrams<TAB>5000
//! %class<TAB>0<TAB>alice
//! %row<TAB>0<TAB>0<TAB>doc-1<TAB>0<TAB>0      row, class, doc, chunk, flagged
//! 0 17 3                                      row, feature, count
//! ```
//!
//! Metadata lines come first; triplets are sorted by row, then feature.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::classify::{Dataset, Sample};
use crate::error::{Error, Result};
use crate::multinomial::CountVector;

pub const FEATURES_HEADER: &str = "%hierclass-features v1";

#[derive(Debug, Clone, PartialEq)]
pub struct RowInfo {
    pub doc_id: String,
    pub chunk: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub seed: u64,
    /// Number of unigram features; the rest are bigrams.
    pub unigrams: usize,
    pub dataset: Dataset,
    pub rows: Vec<RowInfo>,
}

impl FeatureMatrix {
    pub fn to_text(&self) -> String {
        let d = &self.dataset;
        let mut out = String::new();
        out.push_str(FEATURES_HEADER);
        out.push('\n');
        let _ = writeln!(out, "%seed\t{}", self.seed);
        let _ = writeln!(out, "%dim\t{}", d.dim);
        let _ = writeln!(out, "%unigrams\t{}", self.unigrams);
        for (id, name) in d.class_names.iter().enumerate() {
            let _ = writeln!(out, "%class\t{id}\t{name}");
        }
        for (row, (s, info)) in d.samples.iter().zip(&self.rows).enumerate() {
            let _ = writeln!(
                out,
                "%row\t{row}\t{}\t{}\t{}\t{}",
                s.label, info.doc_id, info.chunk, info.flagged as u8
            );
        }
        for (row, s) in d.samples.iter().enumerate() {
            for &(feature, count) in s.features.entries() {
                let _ = writeln!(out, "{row} {feature} {count}");
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(path, line, msg);
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == FEATURES_HEADER => {}
            _ => return Err(err(1, format!("missing `{FEATURES_HEADER}` header"))),
        }
        let (mut seed, mut dim, mut unigrams) = (None, None, None);
        let mut class_names = Vec::new();
        let mut rows: Vec<(usize, RowInfo)> = Vec::new();
        let mut triplets: Vec<Vec<(usize, u64)>> = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.is_empty() {
                continue;
            }
            let int = |s: &str| -> Result<u64> {
                s.parse()
                    .map_err(|_| err(line_no, format!("invalid integer `{s}`")))
            };
            if let Some(meta) = line.strip_prefix('%') {
                let fields: Vec<&str> = meta.split('\t').collect();
                match (fields[0], fields.len()) {
                    ("seed", 2) => seed = Some(int(fields[1])?),
                    ("dim", 2) => dim = Some(int(fields[1])? as usize),
                    ("unigrams", 2) => unigrams = Some(int(fields[1])? as usize),
                    ("class", 3) => {
                        if int(fields[1])? as usize != class_names.len() {
                            return Err(err(line_no, "class ids must be dense and ordered".into()));
                        }
                        class_names.push(fields[2].to_owned());
                    }
                    ("row", 6) => {
                        if int(fields[1])? as usize != rows.len() {
                            return Err(err(line_no, "row ids must be dense and ordered".into()));
                        }
                        rows.push((
                            int(fields[2])? as usize,
                            RowInfo {
                                doc_id: fields[3].to_owned(),
                                chunk: int(fields[4])? as usize,
                                flagged: int(fields[5])? != 0,
                            },
                        ));
                        triplets.push(Vec::new());
                    }
                    _ => return Err(err(line_no, format!("unrecognized metadata `{line}`"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 3 {
                return Err(err(line_no, "expected `row feature count`".into()));
            }
            let row = int(fields[0])? as usize;
            let feature = int(fields[1])? as usize;
            let count = int(fields[2])?;
            let target = triplets
                .get_mut(row)
                .ok_or_else(|| err(line_no, format!("undeclared row {row}")))?;
            target.push((feature, count));
        }
        let dim = dim.ok_or_else(|| err(0, "missing %dim".into()))?;
        let samples = rows
            .iter()
            .zip(triplets)
            .map(|((label, _), t)| Sample::new(CountVector::from_pairs(t), *label))
            .collect();
        let dataset = Dataset::new(dim, class_names.len(), samples)
            .map_err(|e| err(0, e.to_string()))?
            .with_class_names(class_names);
        Ok(FeatureMatrix {
            seed: seed.unwrap_or(0),
            unigrams: unigrams.unwrap_or(dim),
            dataset,
            rows: rows.into_iter().map(|(_, info)| info).collect(),
        })
    }
}
