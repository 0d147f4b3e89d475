use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::text::{chunk_paragraphs, tokenize, Chunk};
use crate::decomposition::ClassId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub class_id: ClassId,
    pub path: PathBuf,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// Class labels in first-appearance order; the position is the class id.
    pub class_names: Vec<String>,
    pub documents: Vec<Document>,
}

/// Reads a manifest of `doc_id<TAB>class<TAB>path` lines and every file it
/// names. Relative paths resolve against the manifest's directory. Blank
/// lines and lines starting with `#` are skipped.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut class_ids: HashMap<String, ClassId> = HashMap::new();
    let mut class_names = Vec::new();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (doc_id, label, file) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
        if doc_id.is_empty() || label.is_empty() || file.is_empty() {
            return Err(Error::parse(path, line_no, "empty field"));
        }
        if !seen.insert(doc_id.to_owned()) {
            return Err(Error::parse(path, line_no, format!("duplicate doc_id `{doc_id}`")));
        }
        let class_id = *class_ids.entry(label.to_owned()).or_insert_with(|| {
            class_names.push(label.to_owned());
            class_names.len() - 1
        });
        entries.push((line_no, doc_id.to_owned(), class_id, base.join(file)));
    }
    if entries.is_empty() {
        return Err(Error::parse(path, 0, "manifest lists no documents"));
    }
    let documents = entries
        .into_iter()
        .map(|(line_no, doc_id, class_id, file)| {
            let text = fs::read_to_string(&file).map_err(|e| {
                Error::parse(path, line_no, format!("cannot read {}: {e}", file.display()))
            })?;
            Ok(Document {
                doc_id,
                class_id,
                path: file,
                text,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Manifest {
        class_names,
        documents,
    })
}

/// Tokenizes and chunks every document, in manifest order. In strict mode
/// flagged (undersized) chunks are dropped.
pub fn chunk_corpus(documents: &[Document], chunk_size: usize, strict: bool) -> Vec<Chunk> {
    let per_doc: Vec<Vec<Chunk>> = documents
        .par_iter()
        .map(|d| chunk_paragraphs(tokenize(&d.text), chunk_size, &d.doc_id, d.class_id))
        .collect();
    per_doc
        .into_iter()
        .flatten()
        .filter(|c| !(strict && c.flagged))
        .collect()
}
