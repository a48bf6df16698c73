#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../sample")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn anpkit(out: &Path, args: &[&str]) -> Output {
    let manifest = sample_dir().join("anpkit.toml");
    Command::new(env!("CARGO_BIN_EXE_anpkit"))
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn ok(out: &Path, args: &[&str]) {
    let o = anpkit(out, args);
    assert!(
        o.status.success(),
        "anpkit {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

/// Runs every stage over the sample corpus in pipeline order.
pub fn run_pipeline(out: &Path) {
    let csv = sample_dir().join("judgments/en.csv");
    let csv = csv.to_str().unwrap();
    ok(out, &["discover"]);
    ok(out, &["filter"]);
    ok(out, &["--lang", "en", "import-judgments", "--csv", csv]);
    ok(out, &["--lang", "en", "export"]);
    ok(out, &["analyze"]);
    ok(out, &["--lang", "en", "analyze", "--post-crowd"]);
    ok(out, &["--lang", "en", "compare"]);
    ok(out, &["cluster"]);
    ok(out, &["predict"]);
}

/// Stage outputs by path relative to `out`, leaving out the service store.
pub fn outputs(out: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![out.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            let rel = p.strip_prefix(out).unwrap().to_string_lossy().replace('\\', "/");
            if rel == "valsvc" {
                continue;
            }
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(rel, std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

pub fn strip_header(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

/// Asserts two output trees are byte-identical, naming the first file that
/// is not.
pub fn assert_same_outputs(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) {
    let names_a: Vec<_> = a.keys().collect();
    let names_b: Vec<_> = b.keys().collect();
    assert_eq!(names_a, names_b);
    for (rel, bytes) in a {
        assert!(b[rel] == *bytes, "{rel} differs");
    }
}
