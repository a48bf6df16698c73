#![allow(dead_code)]

use std::path::PathBuf;

use anpkit_core::{AnpRecord, AnpStatus};
use anpkit_valsvc::{JobSpec, TestQuestion};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn record(adj: &str, noun: &str) -> AnpRecord {
    AnpRecord {
        adj: adj.into(),
        noun: noun.into(),
        lang: "en".into(),
        sentiment: 0.4,
        adj_sentiment: 0.4,
        noun_sentiment: 0.0,
        tag_frequency: 40,
        image_ids: Default::default(),
        uploaders: Default::default(),
        emotion_cooccur: Vec::new(),
        status: AnpStatus::PreCrowd,
        filter_trace: Vec::new(),
    }
}

pub fn test_questions() -> Vec<TestQuestion> {
    serde_json::from_str(&std::fs::read_to_string(fixture("test_questions.json")).unwrap()).unwrap()
}

pub fn spec(pairs: &[(&str, &str)]) -> JobSpec {
    JobSpec::new("en", pairs.iter().map(|(a, n)| record(a, n)).collect(), test_questions())
}

pub fn numbered_spec(n: usize, noun: &str) -> JobSpec {
    let adjs: Vec<String> = (0..n).map(|i| format!("adj{i:02}")).collect();
    let pairs: Vec<(&str, &str)> = adjs.iter().map(|a| (a.as_str(), noun)).collect();
    spec(&pairs)
}
