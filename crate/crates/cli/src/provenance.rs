//! Provenance headers: `#` comment lines at the top of every output naming
//! the tool version, stage, seed, options and a SHA-256 of each input.
//! Readers of the pipeline's line formats already skip `#` lines.

use std::fmt::Write as _;
use std::path::{Component, Path};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub stage: &'static str,
    pub lang: Option<String>,
    pub seed: Option<u64>,
    pub options: String,
    pub inputs: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Slash-separated form of a relative path, stable across platforms.
pub fn portable(p: &Path) -> String {
    p.components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            Component::ParentDir => Some("..".into()),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("/")
}

impl Provenance {
    pub fn new(stage: &'static str, lang: Option<&str>, seed: Option<u64>) -> Self {
        Provenance {
            stage,
            lang: lang.map(str::to_string),
            seed,
            options: String::new(),
            inputs: Vec::new(),
        }
    }

    pub fn with_options<T: Serialize>(mut self, options: &T) -> Self {
        self.options = serde_json::to_string(options).expect("options serialize");
        self
    }

    /// Records an input file under a display label. Repeats are ignored.
    pub fn input(&mut self, label: String, path: &Path) -> CliResult<()> {
        if self.inputs.iter().any(|(l, _)| *l == label) {
            return Ok(());
        }
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push((label, sha256_hex(&bytes)));
        Ok(())
    }

    pub fn header(&self) -> String {
        let mut h = format!("# anpkit {VERSION}\n# stage: {}\n", self.stage);
        if let Some(lang) = &self.lang {
            let _ = writeln!(h, "# lang: {lang}");
        }
        match self.seed {
            Some(s) => {
                let _ = writeln!(h, "# seed: {s}");
            }
            None => h.push_str("# seed: none\n"),
        }
        if !self.options.is_empty() {
            let _ = writeln!(h, "# options: {}", self.options);
        }
        for (label, hash) in &self.inputs {
            let _ = writeln!(h, "# input: {label} sha256:{hash}");
        }
        h
    }

    /// Writes `body` under this header, creating parent directories.
    pub fn write(&self, path: &Path, body: &str) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        let mut text = self.header();
        text.push_str(body);
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn header_layout() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("in.txt");
        std::fs::write(&f, "abc").unwrap();
        let mut p = Provenance::new("filter", Some("en"), None).with_options(&[1, 2]);
        p.input("in.txt".into(), &f).unwrap();
        p.input("in.txt".into(), &f).unwrap();
        assert_eq!(
            p.header(),
            "# anpkit 0.1.0\n# stage: filter\n# lang: en\n# seed: none\n# options: [1,2]\n\
             # input: in.txt sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\n"
        );
        let seeded = Provenance::new("cluster", None, Some(7));
        assert!(seeded.header().contains("# seed: 7\n"));
    }

    #[test]
    fn missing_input_is_io() {
        let mut p = Provenance::new("x", None, None);
        let err = p.input("nope".into(), Path::new("/definitely/not/here")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn portable_paths_use_slashes() {
        assert_eq!(portable(Path::new("a/b/../c")), "a/b/../c");
        assert_eq!(portable(Path::new("./x/y.tsv")), "x/y.tsv");
    }
}
