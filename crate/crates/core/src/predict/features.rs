use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 8] = b"MVSOFEAT";
pub const FEATURE_VERSION: u32 = 1;
const ID_WIDTH: usize = 64;
const KEY_WIDTH: usize = 64;
const LANG_WIDTH: usize = 8;

/// Key joining a pair to its feature rows.
pub fn anp_key(adj: &str, noun: &str) -> String {
    format!("{adj}_{noun}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub anp_key: String,
    pub lang: String,
    pub vector: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureSet {
    pub dim: usize,
    pub rows: BTreeMap<String, FeatureRow>,
}

impl FeatureSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        Ok(FeatureSet { dim, rows: BTreeMap::new() })
    }

    pub fn insert(&mut self, image_id: &str, anp_key: &str, lang: &str, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "feature for {image_id} has length {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("feature for {image_id} has a non-finite value")));
        }
        if self.rows.contains_key(image_id) {
            return Err(Error::invalid(format!("duplicate image id {image_id}")));
        }
        self.rows.insert(
            image_id.to_string(),
            FeatureRow { anp_key: anp_key.to_string(), lang: lang.to_string(), vector },
        );
        Ok(())
    }

    pub fn get(&self, image_id: &str) -> Option<&FeatureRow> {
        self.rows.get(image_id)
    }

    /// Text form: `image_id anp_key lang v1 ... vd` per line.
    pub fn parse_text(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut set: Option<FeatureSet> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err((line_no, "expected image_id, anp_key, lang and at least one value".into()));
            }
            let vector = fields[3..]
                .iter()
                .map(|v| v.parse::<f32>().map_err(|e| (line_no, format!("bad value {v:?}: {e}"))))
                .collect::<std::result::Result<Vec<f32>, _>>()?;
            let set = set.get_or_insert_with(|| FeatureSet { dim: vector.len(), rows: BTreeMap::new() });
            set.insert(fields[0], fields[1], fields[2], vector).map_err(|e| (line_no, e.to_string()))?;
        }
        set.ok_or((0, "feature file has no rows".into()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, row) in &self.rows {
            out.push_str(&format!("{id} {} {}", row.anp_key, row.lang));
            for v in &row.vector {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(16 + self.rows.len() * (136 + 4 * self.dim));
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for (id, row) in &self.rows {
            put_fixed(&mut out, id, ID_WIDTH)?;
            put_fixed(&mut out, &row.anp_key, KEY_WIDTH)?;
            put_fixed(&mut out, &row.lang, LANG_WIDTH)?;
            for v in &row.vector {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..8] != FEATURE_MAGIC {
            return Err(Error::invalid("not a binary feature file (bad magic)"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FEATURE_VERSION {
            return Err(Error::invalid(format!("unsupported feature file version {version}")));
        }
        let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let mut set = FeatureSet::new(dim)?;
        let width = ID_WIDTH + KEY_WIDTH + LANG_WIDTH + 4 * dim;
        let body = &bytes[16..];
        if !body.len().is_multiple_of(width) {
            return Err(Error::invalid("truncated binary feature file"));
        }
        for rec in body.chunks_exact(width) {
            let id = get_fixed(&rec[..ID_WIDTH])?;
            let key = get_fixed(&rec[ID_WIDTH..ID_WIDTH + KEY_WIDTH])?;
            let lang = get_fixed(&rec[ID_WIDTH + KEY_WIDTH..ID_WIDTH + KEY_WIDTH + LANG_WIDTH])?;
            let vector = rec[ID_WIDTH + KEY_WIDTH + LANG_WIDTH..]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            set.insert(&id, &key, &lang, vector)?;
        }
        Ok(set)
    }

    /// Reads either form, detected by the magic bytes.
    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(FEATURE_MAGIC) {
            return Self::from_binary(&bytes);
        }
        let text = String::from_utf8(bytes).map_err(|_| Error::parse(path, 0, "feature file is neither binary nor UTF-8"))?;
        Self::parse_text(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let bytes = self.to_binary()?;
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(&bytes))
            .map_err(|e| Error::io(path, e))
    }
}

fn put_fixed(out: &mut Vec<u8>, s: &str, width: usize) -> Result<()> {
    let b = s.as_bytes();
    if b.len() > width || b.contains(&0) {
        return Err(Error::invalid(format!("field {s:?} does not fit in {width} bytes")));
    }
    out.extend_from_slice(b);
    out.resize(out.len() + width - b.len(), 0);
    Ok(())
}

fn get_fixed(b: &[u8]) -> Result<String> {
    let end = b.iter().position(|&c| c == 0).unwrap_or(b.len());
    String::from_utf8(b[..end].to_vec()).map_err(|_| Error::invalid("non-UTF-8 field in feature record"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureSet {
        let mut s = FeatureSet::new(3).unwrap();
        s.insert("img1", "cute_dog", "en", vec![0.5, -1.0, 2.25]).unwrap();
        s.insert("img2", "dark_night", "en", vec![0.0, 0.1, 1e-3]).unwrap();
        s
    }

    #[test]
    fn text_round_trip() {
        let s = sample();
        assert_eq!(FeatureSet::parse_text(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let s = sample();
        let b = s.to_binary().unwrap();
        assert_eq!(&b[..8], b"MVSOFEAT");
        assert_eq!(b.len(), 16 + 2 * (64 + 64 + 8 + 12));
        assert_eq!(FeatureSet::from_binary(&b).unwrap(), s);
        assert!(FeatureSet::from_binary(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(FeatureSet::parse_text("a k en 1 2\nb k en 1\n").is_err());
        assert!(FeatureSet::parse_text("a k en x\n").is_err());
        assert!(FeatureSet::parse_text("a k en 1\na k en 2\n").is_err());
        let mut s = FeatureSet::new(1).unwrap();
        assert!(s.insert(&"x".repeat(65), "k", "en", vec![1.0]).is_ok());
        assert!(s.to_binary().is_err());
    }

    #[test]
    fn load_detects_format() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        let bin = dir.path().join("f.bin");
        s.save_binary(&bin).unwrap();
        assert_eq!(FeatureSet::load(&bin).unwrap(), s);
        let txt = dir.path().join("f.txt");
        std::fs::write(&txt, s.to_text()).unwrap();
        assert_eq!(FeatureSet::load(&txt).unwrap(), s);
    }
}
