//! On-disk layout, one directory per job:
//!
//! ```text
//! <root>/jobs/<job_id>/job.json        spec, written once
//! <root>/jobs/<job_id>/events.jsonl    append-only event log
//! <root>/jobs/<job_id>/snapshot.json   state after the first N events
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{SvcError, SvcResult};
use crate::job::{Job, JobSpec};
use crate::state::{Event, JobState};

pub const SNAPSHOT_EVERY: u64 = 64;

#[derive(Debug)]
pub(crate) struct JobStore {
    dir: PathBuf,
    log: File,
    since_snapshot: u64,
}

fn jobs_dir(root: &Path) -> PathBuf {
    root.join("jobs")
}

impl JobStore {
    pub fn create(root: &Path, job: &Job) -> SvcResult<Self> {
        let dir = jobs_dir(root).join(&job.id);
        fs::create_dir_all(&dir).map_err(|e| SvcError::io(&dir, e))?;
        let spec_path = dir.join("job.json");
        let body = serde_json::to_vec_pretty(&job.spec).expect("spec serializes");
        write_atomic(&spec_path, &body)?;
        Self::open_log(dir)
    }

    fn open_log(dir: PathBuf) -> SvcResult<Self> {
        let path = dir.join("events.jsonl");
        let log = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| SvcError::io(&path, e))?;
        Ok(JobStore { dir, log, since_snapshot: 0 })
    }

    /// Appends one event and syncs it before returning.
    pub fn append(&mut self, event: &Event) -> SvcResult<()> {
        let mut line = serde_json::to_vec(event).expect("event serializes");
        line.push(b'\n');
        let path = self.dir.join("events.jsonl");
        self.log.write_all(&line).map_err(|e| SvcError::io(&path, e))?;
        self.log.sync_data().map_err(|e| SvcError::io(&path, e))?;
        self.since_snapshot += 1;
        Ok(())
    }

    pub fn maybe_snapshot(&mut self, state: &JobState) -> SvcResult<()> {
        if self.since_snapshot >= SNAPSHOT_EVERY {
            self.snapshot(state)?;
        }
        Ok(())
    }

    pub fn snapshot(&mut self, state: &JobState) -> SvcResult<()> {
        let body = serde_json::to_vec(state).expect("state serializes");
        write_atomic(&self.dir.join("snapshot.json"), &body)?;
        self.since_snapshot = 0;
        Ok(())
    }

    /// Loads every job under `root`, replaying logged events past the
    /// snapshot. A torn final line (crash mid-append) is cut off.
    pub fn load_all(root: &Path) -> SvcResult<Vec<(Job, JobState, JobStore)>> {
        let dir = jobs_dir(root);
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| SvcError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("job.json").is_file())
            .collect();
        entries.sort();
        entries.into_iter().map(Self::load_one).collect()
    }

    fn load_one(dir: PathBuf) -> SvcResult<(Job, JobState, JobStore)> {
        let spec_path = dir.join("job.json");
        let text = fs::read_to_string(&spec_path).map_err(|e| SvcError::io(&spec_path, e))?;
        let spec: JobSpec = serde_json::from_str(&text)
            .map_err(|e| SvcError::Corrupt { path: spec_path.clone(), message: e.to_string() })?;
        let job = Job::new(spec)?;

        let snap_path = dir.join("snapshot.json");
        let mut state = if snap_path.exists() {
            let text = fs::read_to_string(&snap_path).map_err(|e| SvcError::io(&snap_path, e))?;
            serde_json::from_str(&text).map_err(|e| SvcError::Corrupt { path: snap_path.clone(), message: e.to_string() })?
        } else {
            JobState::default()
        };

        let log_path = dir.join("events.jsonl");
        let raw = fs::read(&log_path).unwrap_or_default();
        let mut good_len = 0usize;
        let mut index = 0u64;
        let mut replayed = 0u64;
        for chunk in raw.split_inclusive(|&b| b == b'\n') {
            let complete = chunk.ends_with(b"\n");
            let parsed: Option<Event> = serde_json::from_slice(chunk).ok();
            match (parsed, complete) {
                (Some(event), true) => {
                    if index >= state.events_applied {
                        state.apply(&job, &event);
                        replayed += 1;
                    }
                    index += 1;
                    good_len += chunk.len();
                }
                (_, false) => break,
                (None, true) => {
                    return Err(SvcError::Corrupt {
                        path: log_path,
                        message: format!("unreadable event at line {}", index + 1),
                    })
                }
            }
        }
        if index < state.events_applied {
            return Err(SvcError::Corrupt {
                path: log_path,
                message: format!("snapshot covers {} events, log has {index}", state.events_applied),
            });
        }
        if good_len < raw.len() {
            let f = OpenOptions::new().write(true).open(&log_path).map_err(|e| SvcError::io(&log_path, e))?;
            f.set_len(good_len as u64).map_err(|e| SvcError::io(&log_path, e))?;
        }
        let mut store = Self::open_log(dir)?;
        store.since_snapshot = replayed;
        Ok((job, state, store))
    }
}

fn write_atomic(path: &Path, body: &[u8]) -> SvcResult<()> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| SvcError::io(&tmp, e))?;
    f.write_all(body).and_then(|_| f.sync_data()).map_err(|e| SvcError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| SvcError::io(path, e))
}
