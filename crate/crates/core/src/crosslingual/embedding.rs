use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::text::normalize_key;

/// Pretrained word vectors in the word2vec text layout.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    pub dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector for {word:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("vector for {word:?} has non-finite components")));
        }
        self.vectors.entry(normalize_key(word)).or_insert(vector);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vectors.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Unweighted mean of the in-vocabulary word vectors; `None` when no
    /// word has a vector.
    pub fn phrase_vector<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for w in words {
            if let Some(v) = self.get(w) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }

    /// Parses `word v1 ... vd` lines with an optional `count dim` header.
    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut store: Option<EmbeddingStore> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
                store = Some(EmbeddingStore::new(fields[1].parse().unwrap()));
                continue;
            }
            let values: Vec<f64> = fields[1..]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| (n, format!("bad component {v:?}"))))
                .collect::<std::result::Result<_, _>>()?;
            if values.is_empty() {
                return Err((n, format!("no vector for {:?}", fields[0])));
            }
            let s = store.get_or_insert_with(|| EmbeddingStore::new(values.len()));
            s.insert(fields[0], values).map_err(|e| (n, e.to_string()))?;
        }
        store.ok_or((0, "empty embedding file".to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?).map_err(|(n, m)| Error::parse(path, n, m))
    }
}
