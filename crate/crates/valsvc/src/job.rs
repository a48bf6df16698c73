use std::collections::HashMap;

use anpkit_core::{AnpRecord, AnpStatus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{SvcError, SvcResult};

pub const DEFAULT_MIN_JUDGMENTS: usize = 3;
pub const DEFAULT_PAGE_SIZE: usize = 5;
pub const DEFAULT_QUIZ_PASS_THRESHOLD: usize = 7;
pub const DEFAULT_TRACKING_FLOOR: f64 = 0.7;
/// One hidden test question every this many pages.
pub const DEFAULT_HIDDEN_TEST_EVERY: u64 = 2;
pub const QUIZ_SIZE: usize = 10;
/// Minimum number of test questions per class.
pub const MIN_TESTS_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestQuestion {
    pub adj: String,
    pub noun: String,
    /// Whether the pair is a valid adjective-noun pair.
    pub ground_truth: bool,
}

fn d_min_judgments() -> usize {
    DEFAULT_MIN_JUDGMENTS
}
fn d_page_size() -> usize {
    DEFAULT_PAGE_SIZE
}
fn d_quiz() -> usize {
    DEFAULT_QUIZ_PASS_THRESHOLD
}
fn d_floor() -> f64 {
    DEFAULT_TRACKING_FLOOR
}
fn d_every() -> u64 {
    DEFAULT_HIDDEN_TEST_EVERY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub lang: String,
    pub anps: Vec<AnpRecord>,
    pub test_questions: Vec<TestQuestion>,
    #[serde(default = "d_min_judgments")]
    pub min_judgments: usize,
    #[serde(default = "d_page_size")]
    pub page_size: usize,
    #[serde(default = "d_quiz")]
    pub quiz_pass_threshold: usize,
    #[serde(default = "d_floor")]
    pub tracking_accuracy_floor: f64,
    #[serde(default = "d_every")]
    pub hidden_test_every: u64,
    /// Countries whose workers may take the quiz; empty allows all.
    #[serde(default)]
    pub allowed_countries: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

impl JobSpec {
    /// Spec with default settings.
    pub fn new(lang: &str, anps: Vec<AnpRecord>, test_questions: Vec<TestQuestion>) -> Self {
        JobSpec {
            lang: lang.to_string(),
            anps,
            test_questions,
            min_judgments: DEFAULT_MIN_JUDGMENTS,
            page_size: DEFAULT_PAGE_SIZE,
            quiz_pass_threshold: DEFAULT_QUIZ_PASS_THRESHOLD,
            tracking_accuracy_floor: DEFAULT_TRACKING_FLOOR,
            hidden_test_every: DEFAULT_HIDDEN_TEST_EVERY,
            allowed_countries: Vec::new(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> SvcResult<()> {
        let bad = |m: String| Err(SvcError::Invalid(m));
        if self.anps.is_empty() {
            return bad("job has no pairs".into());
        }
        if let Some(r) = self.anps.iter().find(|r| r.status != AnpStatus::PreCrowd) {
            return bad(format!("pair {} has status {}, expected PRE_CROWD", r.phrase(), r.status));
        }
        if let Some(r) = self.anps.iter().find(|r| r.lang != self.lang) {
            return bad(format!("pair {} is in {}, job is {}", r.phrase(), r.lang, self.lang));
        }
        let correct = self.test_questions.iter().filter(|t| t.ground_truth).count();
        let incorrect = self.test_questions.len() - correct;
        if correct != incorrect || correct < MIN_TESTS_PER_CLASS {
            return bad(format!(
                "test questions must be balanced with at least {MIN_TESTS_PER_CLASS} per class, got {correct} correct and {incorrect} incorrect"
            ));
        }
        if self.page_size == 0 || self.min_judgments == 0 || self.hidden_test_every == 0 {
            return bad("page_size, min_judgments and hidden_test_every must be at least 1".into());
        }
        if self.quiz_pass_threshold > QUIZ_SIZE {
            return bad(format!("quiz threshold {} exceeds {QUIZ_SIZE}", self.quiz_pass_threshold));
        }
        if !(0.0..=1.0).contains(&self.tracking_accuracy_floor) {
            return bad("tracking accuracy floor must lie in [0, 1]".into());
        }
        let mut seen = std::collections::HashSet::new();
        for key in self.anps.iter().map(|r| (&r.adj, &r.noun)) {
            if !seen.insert(key) {
                return bad(format!("duplicate pair {} {}", key.0, key.1));
            }
        }
        Ok(())
    }

    /// Content hash of the spec; identical specs get identical ids.
    pub fn job_id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        hex_prefix(&Sha256::digest(&bytes), 16)
    }
}

fn hex_prefix(bytes: &[u8], n: usize) -> String {
    bytes[..n].iter().map(|b| format!("{b:02x}")).collect()
}

/// What a served item refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemRef {
    Anp(usize),
    Test(usize),
}

/// A validated spec with lookup tables.
#[derive(Debug, Clone)]
pub struct Job {
    pub id: String,
    pub spec: JobSpec,
    anp_index: HashMap<(String, String), usize>,
    test_index: HashMap<(String, String), usize>,
}

impl Job {
    pub fn new(spec: JobSpec) -> SvcResult<Self> {
        spec.validate()?;
        let anp_index = spec
            .anps
            .iter()
            .enumerate()
            .map(|(i, r)| ((r.adj.clone(), r.noun.clone()), i))
            .collect();
        let test_index = spec
            .test_questions
            .iter()
            .enumerate()
            .map(|(i, t)| ((t.adj.clone(), t.noun.clone()), i))
            .collect();
        Ok(Job { id: spec.job_id(), spec, anp_index, test_index })
    }

    /// Resolves a pair, checking test questions first when `is_test` is set.
    pub fn lookup(&self, adj: &str, noun: &str, is_test: bool) -> Option<ItemRef> {
        let key = (adj.to_string(), noun.to_string());
        if is_test {
            self.test_index.get(&key).map(|&i| ItemRef::Test(i))
        } else {
            self.anp_index.get(&key).map(|&i| ItemRef::Anp(i))
        }
    }

    pub fn words(&self, item: ItemRef) -> (&str, &str) {
        match item {
            ItemRef::Anp(i) => (&self.spec.anps[i].adj, &self.spec.anps[i].noun),
            ItemRef::Test(i) => (&self.spec.test_questions[i].adj, &self.spec.test_questions[i].noun),
        }
    }

    /// Opaque per-worker id; pairs and test questions look alike.
    pub fn item_id(&self, worker: &str, item: ItemRef) -> String {
        let (kind, i) = match item {
            ItemRef::Anp(i) => ("a", i),
            ItemRef::Test(i) => ("t", i),
        };
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        h.update([0]);
        h.update(worker.as_bytes());
        h.update([0]);
        h.update(format!("{kind}{i}").as_bytes());
        hex_prefix(&h.finalize(), 8)
    }

    /// Seed for a worker-specific random stream.
    pub fn stream_seed(&self, worker: &str, purpose: &str, index: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(self.spec.seed.to_le_bytes());
        h.update(worker.as_bytes());
        h.update([0]);
        h.update(purpose.as_bytes());
        h.update(index.to_le_bytes());
        u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn balanced_tests_required() {
        assert!(spec(50).validate().is_ok());
        let mut s = spec(50);
        s.test_questions = tests(9, 10);
        assert!(matches!(s.validate(), Err(SvcError::Invalid(_))));
        s.test_questions = tests(12, 12);
        assert!(s.validate().is_ok());
        assert!(spec(0).validate().is_err());
    }

    #[test]
    fn content_hash_is_stable() {
        assert_eq!(spec(5).job_id(), spec(5).job_id());
        assert_ne!(spec(5).job_id(), spec(6).job_id());
    }

    #[test]
    fn rejects_non_pre_crowd_pairs() {
        let mut s = spec(3);
        s.anps[1].status = AnpStatus::Accepted;
        assert!(s.validate().is_err());
    }

    #[test]
    fn item_ids_are_opaque_and_per_worker() {
        let job = Job::new(spec(3)).unwrap();
        let a = job.item_id("w1", ItemRef::Anp(0));
        assert_eq!(a.len(), 16);
        assert_ne!(a, job.item_id("w2", ItemRef::Anp(0)));
        assert_ne!(a, job.item_id("w1", ItemRef::Test(0)));
    }
}
