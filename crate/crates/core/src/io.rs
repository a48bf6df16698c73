//! Line-oriented file helpers: JSON-lines records, TSV tables and word lists.
//!
//! Files produced by the pipeline may start with `#` comment lines (the
//! provenance header); every reader here skips them along with blank lines.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::text::normalize_key;

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Iterates `(line_number, line)` over content lines, 1-based.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Reads a JSON-lines file. Any malformed line is a hard error.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = read_to_string(path)?;
    content_lines(&text)
        .map(|(n, line)| serde_json::from_str(line).map_err(|e| Error::parse(path, n, e.to_string())))
        .collect()
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Splits a TSV file into rows of exactly `columns` fields.
pub fn read_tsv(path: &Path, columns: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let text = read_to_string(path)?;
    parse_tsv(&text, columns).map_err(|(n, msg)| Error::parse(path, n, msg))
}

/// Numbered rows, or the line number and message of the first bad row.
pub type TsvRows = std::result::Result<Vec<(usize, Vec<String>)>, (usize, String)>;

pub fn parse_tsv(text: &str, columns: usize) -> TsvRows {
    content_lines(text)
        .map(|(n, line)| {
            let fields: Vec<String> = line.split('\t').map(str::to_string).collect();
            if fields.len() != columns {
                Err((n, format!("expected {columns} tab-separated fields, found {}", fields.len())))
            } else {
                Ok((n, fields))
            }
        })
        .collect()
}

/// Reads a one-entry-per-line word or phrase list into key form.
pub fn read_word_set(path: &Path) -> Result<HashSet<String>> {
    let text = read_to_string(path)?;
    Ok(parse_word_set(&text))
}

pub fn parse_word_set(text: &str) -> HashSet<String> {
    content_lines(text)
        .map(|(_, l)| normalize_key(l))
        .filter(|w| !w.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_rejects_wrong_arity() {
        let rows = parse_tsv("a\tb\n# skip\n\nc\td\n", 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].0, 4);
        let err = parse_tsv("a\tb\tc\n", 2).unwrap_err();
        assert_eq!(err.0, 1);
    }

    #[test]
    fn word_sets_are_normalized() {
        let set = parse_word_set("Paris\n  DSLR \n\n");
        assert!(set.contains("paris"));
        assert!(set.contains("dslr"));
        assert_eq!(set.len(), 2);
    }
}
