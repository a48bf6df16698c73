use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::job::{ItemRef, Job};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub job_id: String,
    pub worker_id: String,
    pub adj: String,
    pub noun: String,
    /// Yes means the pair is a valid adjective-noun pair.
    pub verdict: bool,
    pub is_hidden_test: bool,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WorkerState {
    pub worker_id: String,
    pub quiz_taken: bool,
    pub quiz_passed: bool,
    pub hidden_test_correct: u64,
    pub hidden_test_seen: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    /// Admitted through an offline judgment import instead of the quiz.
    pub imported: bool,
    pub pages_served: u64,
    /// Item id -> item, for everything ever served.
    pub served: BTreeMap<String, ItemRef>,
    pub judged: BTreeSet<ItemRef>,
    /// Item ids of the latest page not yet judged.
    pub pending: Vec<String>,
}

impl WorkerState {
    pub fn new(worker_id: &str) -> Self {
        WorkerState { worker_id: worker_id.to_string(), ..Default::default() }
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.hidden_test_seen > 0).then(|| self.hidden_test_correct as f64 / self.hidden_test_seen as f64)
    }

    pub fn is_active(&self, floor: f64) -> bool {
        self.quiz_passed && self.accuracy().is_none_or(|a| a >= floor)
    }

    pub fn was_served(&self, item: ItemRef) -> bool {
        self.served.values().any(|&r| r == item)
    }
}

/// Everything that changes job state. The event log is replayed through
/// [`JobState::apply`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Quiz {
        worker: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        country: Option<String>,
        correct: usize,
        passed: bool,
    },
    Admitted {
        worker: String,
    },
    Served {
        worker: String,
        items: Vec<(String, ItemRef)>,
    },
    Judged {
        item: ItemRef,
        judgment: Judgment,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JobState {
    pub workers: BTreeMap<String, WorkerState>,
    /// Non-test judgments in arrival order.
    pub judgments: Vec<Judgment>,
    /// Hidden test answers in arrival order.
    #[serde(default)]
    pub test_judgments: Vec<Judgment>,
    /// Per pair index: (yes, no).
    pub votes: BTreeMap<usize, (u64, u64)>,
    pub events_applied: u64,
}

impl JobState {
    /// Applies an already validated event.
    pub fn apply(&mut self, job: &Job, event: &Event) {
        self.events_applied += 1;
        match event {
            Event::Quiz { worker, country, passed, .. } => {
                let w = self.worker_mut(worker);
                w.quiz_taken = true;
                w.quiz_passed = *passed;
                w.country = country.clone();
            }
            Event::Admitted { worker } => {
                let w = self.worker_mut(worker);
                w.quiz_passed = true;
                w.imported = true;
            }
            Event::Served { worker, items } => {
                let w = self.worker_mut(worker);
                w.pages_served += 1;
                w.pending = items.iter().map(|(id, _)| id.clone()).collect();
                w.served.extend(items.iter().cloned());
            }
            Event::Judged { item, judgment } => {
                let w = self.worker_mut(&judgment.worker_id);
                w.judged.insert(*item);
                let served_id = w.served.iter().find(|(_, &r)| r == *item).map(|(id, _)| id.clone());
                if let Some(id) = served_id {
                    w.pending.retain(|p| *p != id);
                }
                match *item {
                    ItemRef::Test(t) => {
                        w.hidden_test_seen += 1;
                        if judgment.verdict == job.spec.test_questions[t].ground_truth {
                            w.hidden_test_correct += 1;
                        }
                        self.test_judgments.push(judgment.clone());
                    }
                    ItemRef::Anp(a) => {
                        let v = self.votes.entry(a).or_default();
                        if judgment.verdict {
                            v.0 += 1;
                        } else {
                            v.1 += 1;
                        }
                        self.judgments.push(judgment.clone());
                    }
                }
            }
        }
    }

    fn worker_mut(&mut self, worker: &str) -> &mut WorkerState {
        self.workers.entry(worker.to_string()).or_insert_with(|| WorkerState::new(worker))
    }

    pub fn votes(&self, anp: usize) -> (u64, u64) {
        self.votes.get(&anp).copied().unwrap_or((0, 0))
    }

    /// A pair still needs judgments while below the minimum or tied.
    pub fn is_open(&self, job: &Job, anp: usize) -> bool {
        let (y, n) = self.votes(anp);
        (y + n) < job.spec.min_judgments as u64 || y == n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::fixtures::spec;

    fn judged(job: &Job, worker: &str, item: ItemRef, verdict: bool) -> Event {
        let (adj, noun) = job.words(item);
        Event::Judged {
            item,
            judgment: Judgment {
                job_id: job.id.clone(),
                worker_id: worker.into(),
                adj: adj.into(),
                noun: noun.into(),
                verdict,
                is_hidden_test: matches!(item, ItemRef::Test(_)),
                timestamp: 0,
            },
        }
    }

    #[test]
    fn hidden_tests_only_touch_worker_accuracy() {
        let job = Job::new(spec(3)).unwrap();
        let mut s = JobState::default();
        s.apply(&job, &Event::Admitted { worker: "w".into() });
        // test 10 is a negative exemplar, so "yes" is wrong
        s.apply(&job, &judged(&job, "w", ItemRef::Test(10), true));
        assert!(s.judgments.is_empty());
        assert!(s.votes.is_empty());
        let w = &s.workers["w"];
        assert_eq!((w.hidden_test_correct, w.hidden_test_seen), (0, 1));
        assert!(!w.is_active(0.7));
        assert!(w.hidden_test_correct <= w.hidden_test_seen);
    }

    #[test]
    fn ties_and_minimums_keep_pairs_open() {
        let job = Job::new(spec(1)).unwrap();
        let mut s = JobState::default();
        for (w, v) in [("a", true), ("b", false)] {
            s.apply(&job, &judged(&job, w, ItemRef::Anp(0), v));
        }
        assert!(s.is_open(&job, 0));
        s.apply(&job, &judged(&job, "c", ItemRef::Anp(0), true));
        assert!(!s.is_open(&job, 0));
        s.apply(&job, &judged(&job, "d", ItemRef::Anp(0), false));
        assert!(s.is_open(&job, 0));
    }

    #[test]
    fn active_rule() {
        let mut w = WorkerState::new("w");
        assert!(!w.is_active(0.7));
        w.quiz_passed = true;
        assert!(w.is_active(0.7));
        w.hidden_test_seen = 10;
        w.hidden_test_correct = 7;
        assert!(w.is_active(0.7));
        w.hidden_test_correct = 6;
        assert!(!w.is_active(0.7));
    }
}
