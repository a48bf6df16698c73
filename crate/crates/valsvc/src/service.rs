use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, export_records, AggregateResult};
use crate::error::{SvcError, SvcResult};
use crate::job::{ItemRef, Job, JobSpec, QUIZ_SIZE};
use crate::state::{Event, JobState, Judgment, WorkerState};
use crate::store::JobStore;
use anpkit_core::AnpRecord;

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

fn system_clock() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageItem {
    pub item_id: String,
    pub adj: String,
    pub noun: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    /// Pairs with enough judgments and a decided majority.
    pub judged: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub items: Vec<PageItem>,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizOutcome {
    pub passed: bool,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub item_id: String,
    pub verdict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitAck {
    pub accepted: usize,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub job_id: String,
    pub lang: String,
    pub n_anps: usize,
    pub n_judgments: usize,
    pub n_workers: usize,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerView {
    #[serde(flatten)]
    pub state: WorkerState,
    pub active: bool,
}

/// Row of an offline judgment import.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportRow {
    pub worker: String,
    pub adj: String,
    pub noun: String,
    pub verdict: bool,
    pub is_test: bool,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ImportReport {
    pub accepted: usize,
    /// `(row number, reason)` for rows that were not recorded.
    pub rejected: Vec<(usize, String)>,
}

pub(crate) struct JobHandle {
    pub job: Job,
    pub state: JobState,
    store: Option<JobStore>,
}

impl JobHandle {
    fn commit(&mut self, events: Vec<Event>) -> SvcResult<()> {
        for event in &events {
            if let Some(store) = self.store.as_mut() {
                store.append(event)?;
            }
            self.state.apply(&self.job, event);
        }
        if let Some(store) = self.store.as_mut() {
            store.maybe_snapshot(&self.state)?;
        }
        Ok(())
    }

    fn progress(&self) -> Progress {
        let total = self.job.spec.anps.len();
        let open = (0..total).filter(|&i| self.state.is_open(&self.job, i)).count();
        Progress { judged: total - open, total }
    }

    fn active_worker(&self, worker: &str) -> SvcResult<&WorkerState> {
        let w = self
            .state
            .workers
            .get(worker)
            .ok_or_else(|| SvcError::Forbidden(format!("worker {worker} has not passed the quiz")))?;
        if !w.is_active(self.job.spec.tracking_accuracy_floor) {
            return Err(SvcError::Forbidden(format!("worker {worker} is not active")));
        }
        Ok(w)
    }

    fn judgment(&self, worker: &str, item: ItemRef, verdict: bool, timestamp: u64) -> Event {
        let (adj, noun) = self.job.words(item);
        Event::Judged {
            item,
            judgment: Judgment {
                job_id: self.job.id.clone(),
                worker_id: worker.to_string(),
                adj: adj.to_string(),
                noun: noun.to_string(),
                verdict,
                is_hidden_test: matches!(item, ItemRef::Test(_)),
                timestamp,
            },
        }
    }
}

/// The validation service. Each job sits behind its own mutex, which
/// serializes its mutations; different jobs proceed independently.
pub struct Service {
    data_dir: Option<PathBuf>,
    jobs: RwLock<BTreeMap<String, Arc<Mutex<JobHandle>>>>,
    clock: Clock,
}

impl Service {
    /// Service without persistence.
    pub fn in_memory() -> Self {
        Service { data_dir: None, jobs: RwLock::default(), clock: Arc::new(system_clock) }
    }

    /// Opens (or initializes) a data directory and replays every job in it.
    pub fn open(data_dir: impl Into<PathBuf>) -> SvcResult<Self> {
        let data_dir = data_dir.into();
        std::fs::create_dir_all(&data_dir).map_err(|e| SvcError::io(&data_dir, e))?;
        let mut jobs = BTreeMap::new();
        for (job, state, store) in JobStore::load_all(&data_dir)? {
            jobs.insert(job.id.clone(), Arc::new(Mutex::new(JobHandle { job, state, store: Some(store) })));
        }
        Ok(Service { data_dir: Some(data_dir), jobs: RwLock::new(jobs), clock: Arc::new(system_clock) })
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    fn handle(&self, job_id: &str) -> SvcResult<Arc<Mutex<JobHandle>>> {
        self.jobs
            .read()
            .expect("job table poisoned")
            .get(job_id)
            .cloned()
            .ok_or_else(|| SvcError::NotFound(format!("job {job_id}")))
    }

    fn with_job<T>(&self, job_id: &str, f: impl FnOnce(&mut JobHandle) -> SvcResult<T>) -> SvcResult<T> {
        let h = self.handle(job_id)?;
        let mut guard = h.lock().expect("job lock poisoned");
        f(&mut guard)
    }

    /// Returns the job id and whether the job was newly created.
    pub fn create_job(&self, spec: JobSpec) -> SvcResult<(String, bool)> {
        let job = Job::new(spec)?;
        let mut jobs = self.jobs.write().expect("job table poisoned");
        if jobs.contains_key(&job.id) {
            return Ok((job.id, false));
        }
        let store = match &self.data_dir {
            Some(dir) => Some(JobStore::create(dir, &job)?),
            None => None,
        };
        let id = job.id.clone();
        jobs.insert(id.clone(), Arc::new(Mutex::new(JobHandle { job, state: JobState::default(), store })));
        Ok((id, true))
    }

    pub fn job_ids(&self) -> Vec<String> {
        self.jobs.read().expect("job table poisoned").keys().cloned().collect()
    }

    pub fn status(&self, job_id: &str) -> SvcResult<JobStatus> {
        self.with_job(job_id, |h| {
            Ok(JobStatus {
                job_id: h.job.id.clone(),
                lang: h.job.spec.lang.clone(),
                n_anps: h.job.spec.anps.len(),
                n_judgments: h.state.judgments.len(),
                n_workers: h.state.workers.len(),
                progress: h.progress(),
            })
        })
    }

    /// Full state, for inspection and replay checks.
    pub fn state(&self, job_id: &str) -> SvcResult<JobState> {
        self.with_job(job_id, |h| Ok(h.state.clone()))
    }

    pub fn worker(&self, job_id: &str, worker: &str) -> SvcResult<WorkerView> {
        self.with_job(job_id, |h| {
            let state = h
                .state
                .workers
                .get(worker)
                .cloned()
                .ok_or_else(|| SvcError::NotFound(format!("worker {worker}")))?;
            let active = state.is_active(h.job.spec.tracking_accuracy_floor);
            Ok(WorkerView { state, active })
        })
    }

    fn quiz_refs(job: &Job, worker: &str) -> Vec<ItemRef> {
        let mut idx: Vec<usize> = (0..job.spec.test_questions.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(job.stream_seed(worker, "quiz", 0));
        idx.shuffle(&mut rng);
        idx.truncate(QUIZ_SIZE);
        idx.into_iter().map(ItemRef::Test).collect()
    }

    /// The worker's ten quiz questions, in answer order.
    pub fn quiz(&self, job_id: &str, worker: &str) -> SvcResult<Vec<PageItem>> {
        self.with_job(job_id, |h| {
            Ok(Self::quiz_refs(&h.job, worker)
                .into_iter()
                .map(|r| {
                    let (adj, noun) = h.job.words(r);
                    PageItem { item_id: h.job.item_id(worker, r), adj: adj.into(), noun: noun.into() }
                })
                .collect())
        })
    }

    /// Grades the quiz. Each worker gets one attempt.
    pub fn take_quiz(&self, job_id: &str, worker: &str, answers: &[bool], country: Option<&str>) -> SvcResult<QuizOutcome> {
        self.with_job(job_id, |h| {
            if answers.len() != QUIZ_SIZE {
                return Err(SvcError::Invalid(format!("expected {QUIZ_SIZE} answers, got {}", answers.len())));
            }
            if let Some(w) = h.state.workers.get(worker) {
                if w.quiz_taken || w.quiz_passed {
                    return Err(SvcError::Conflict(format!("worker {worker} already took the quiz")));
                }
            }
            let allowed = &h.job.spec.allowed_countries;
            if !allowed.is_empty() && !country.is_some_and(|c| allowed.iter().any(|a| a.eq_ignore_ascii_case(c))) {
                return Err(SvcError::Forbidden(format!("worker {worker} is not in an allowed country")));
            }
            let correct = Self::quiz_refs(&h.job, worker)
                .into_iter()
                .zip(answers)
                .filter(|(r, &a)| matches!(r, ItemRef::Test(t) if h.job.spec.test_questions[*t].ground_truth == a))
                .count();
            let passed = correct >= h.job.spec.quiz_pass_threshold;
            h.commit(vec![Event::Quiz {
                worker: worker.to_string(),
                country: country.map(str::to_string),
                correct,
                passed,
            }])?;
            Ok(QuizOutcome { passed, correct })
        })
    }

    /// Serves up to `page_size` items the worker has not seen. Unjudged
    /// items of the previous page are served again first.
    pub fn next_page(&self, job_id: &str, worker: &str) -> SvcResult<Page> {
        self.with_job(job_id, |h| {
            let w = h.active_worker(worker)?;
            let to_item = |h: &JobHandle, id: &str, r: ItemRef| {
                let (adj, noun) = h.job.words(r);
                PageItem { item_id: id.to_string(), adj: adj.into(), noun: noun.into() }
            };
            if !w.pending.is_empty() {
                let items = w.pending.iter().map(|id| to_item(h, id, w.served[id])).collect();
                return Ok(Page { items, progress: h.progress() });
            }

            let spec = &h.job.spec;
            let page_index = w.pages_served;
            let seen: BTreeSet<ItemRef> = w.served.values().copied().chain(w.judged.iter().copied()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(h.job.stream_seed(worker, "page", page_index));

            let mut open: Vec<usize> = (0..spec.anps.len())
                .filter(|&i| h.state.is_open(&h.job, i) && !seen.contains(&ItemRef::Anp(i)))
                .collect();
            open.shuffle(&mut rng);
            open.sort_by_key(|&i| {
                let (y, n) = h.state.votes(i);
                y + n
            });

            let quiz: BTreeSet<ItemRef> = Self::quiz_refs(&h.job, worker).into_iter().collect();
            let unused: Vec<ItemRef> = (0..spec.test_questions.len())
                .map(ItemRef::Test)
                .filter(|r| !seen.contains(r))
                .collect();
            let fresh: Vec<ItemRef> = unused.iter().copied().filter(|r| !quiz.contains(r)).collect();
            let test_pool = if fresh.is_empty() { unused } else { fresh };
            let with_test = page_index % spec.hidden_test_every == 0 && spec.page_size >= 2 && !test_pool.is_empty();

            let n_anps = spec.page_size - usize::from(with_test);
            let mut refs: Vec<ItemRef> = open.into_iter().take(n_anps).map(ItemRef::Anp).collect();
            if refs.is_empty() {
                return Ok(Page { items: Vec::new(), progress: h.progress() });
            }
            if with_test {
                let t = test_pool[rng.random_range(0..test_pool.len())];
                let pos = rng.random_range(0..=refs.len());
                refs.insert(pos, t);
            }
            let served: Vec<(String, ItemRef)> = refs.iter().map(|&r| (h.job.item_id(worker, r), r)).collect();
            let items = served.iter().map(|(id, r)| to_item(h, id, *r)).collect();
            h.commit(vec![Event::Served { worker: worker.to_string(), items: served }])?;
            Ok(Page { items, progress: h.progress() })
        })
    }

    /// Records verdicts for served items. The submission is all or nothing.
    pub fn submit_judgments(&self, job_id: &str, worker: &str, verdicts: &[Verdict]) -> SvcResult<SubmitAck> {
        let now = (self.clock)();
        self.with_job(job_id, |h| {
            let w = h.active_worker(worker)?;
            let mut batch = BTreeSet::new();
            let mut resolved = Vec::with_capacity(verdicts.len());
            for v in verdicts {
                let &item = w
                    .served
                    .get(&v.item_id)
                    .ok_or_else(|| SvcError::Invalid(format!("item {} was not served to {worker}", v.item_id)))?;
                if w.judged.contains(&item) || !batch.insert(item) {
                    return Err(SvcError::Conflict(format!("item {} already judged by {worker}", v.item_id)));
                }
                resolved.push((item, v.verdict));
            }
            let events = resolved.into_iter().map(|(item, v)| h.judgment(worker, item, v, now)).collect();
            h.commit(events)?;
            let active = h.state.workers[worker].is_active(h.job.spec.tracking_accuracy_floor);
            Ok(SubmitAck { accepted: verdicts.len(), active })
        })
    }

    /// Offline judgments from an external platform. Workers are admitted
    /// without the quiz; test rows update worker accuracy only. Rows that
    /// break a rule are reported and skipped.
    pub fn import_judgments(&self, job_id: &str, rows: &[ImportRow]) -> SvcResult<ImportReport> {
        self.with_job(job_id, |h| {
            let mut report = ImportReport::default();
            for (i, row) in rows.iter().enumerate() {
                let line = i + 1;
                let Some(item) = h.job.lookup(&row.adj, &row.noun, row.is_test) else {
                    let kind = if row.is_test { "test question" } else { "pair" };
                    report.rejected.push((line, format!("unknown {kind} {} {}", row.adj, row.noun)));
                    continue;
                };
                let mut events = Vec::new();
                match h.state.workers.get(&row.worker) {
                    None => events.push(Event::Admitted { worker: row.worker.clone() }),
                    Some(w) if w.judged.contains(&item) => {
                        report.rejected.push((line, format!("duplicate judgment by {}", row.worker)));
                        continue;
                    }
                    Some(w) if !w.is_active(h.job.spec.tracking_accuracy_floor) => {
                        report.rejected.push((line, format!("worker {} is not active", row.worker)));
                        continue;
                    }
                    Some(_) => {}
                }
                events.push(h.judgment(&row.worker, item, row.verdict, row.timestamp));
                h.commit(events)?;
                report.accepted += 1;
            }
            Ok(report)
        })
    }

    pub fn aggregate(&self, job_id: &str) -> SvcResult<AggregateResult> {
        self.with_job(job_id, |h| Ok(aggregate(&h.job, &h.state)))
    }

    pub fn export(&self, job_id: &str) -> SvcResult<Vec<AnpRecord>> {
        self.with_job(job_id, |h| Ok(export_records(&h.job, &aggregate(&h.job, &h.state))))
    }

    /// Writes snapshots for every persisted job.
    pub fn snapshot_all(&self) -> SvcResult<()> {
        let handles: Vec<_> = self.jobs.read().expect("job table poisoned").values().cloned().collect();
        for h in handles {
            let mut g = h.lock().expect("job lock poisoned");
            let JobHandle { state, store, .. } = &mut *g;
            if let Some(store) = store.as_mut() {
                store.snapshot(state)?;
            }
        }
        Ok(())
    }
}
