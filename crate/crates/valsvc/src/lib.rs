//! Crowd validation of candidate adjective-noun pairs: quiz-gated workers
//! judge pages of pairs, hidden test questions track their accuracy, and
//! majority votes decide which pairs enter the ontology.
//!
//! State is event-sourced. Every mutation is appended to a per-job log
//! before it is applied, and restarting the service replays the log on top
//! of the latest snapshot.

mod aggregate;
mod error;
pub mod http;
mod job;
mod service;
mod state;
mod store;

pub use aggregate::{agreement, majority, AggregateResult, AnpAggregate, Majority};
pub use error::{SvcError, SvcResult};
pub use job::{
    ItemRef, JobSpec, TestQuestion, DEFAULT_HIDDEN_TEST_EVERY, DEFAULT_MIN_JUDGMENTS, DEFAULT_PAGE_SIZE,
    DEFAULT_QUIZ_PASS_THRESHOLD, DEFAULT_TRACKING_FLOOR, MIN_TESTS_PER_CLASS, QUIZ_SIZE,
};
pub use service::{
    Clock, ImportReport, ImportRow, JobStatus, Page, PageItem, Progress, QuizOutcome, Service, SubmitAck, Verdict,
    WorkerView,
};
pub use state::{Event, JobState, Judgment, WorkerState};
pub use store::SNAPSHOT_EVERY;

/// Parses judgment CSV with columns `worker,adj,noun,verdict,is_test,timestamp`.
/// A header row is optional. Booleans accept `yes/no`, `true/false`, `1/0`.
pub fn parse_judgment_csv(text: &str) -> std::result::Result<Vec<ImportRow>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| (line, e.to_string()))?;
        if i == 0 && rec.get(0) == Some("worker") {
            continue;
        }
        if rec.len() != 6 {
            return Err((line, format!("expected 6 columns, got {}", rec.len())));
        }
        let flag = |s: &str| match s.to_ascii_lowercase().as_str() {
            "yes" | "true" | "1" | "y" => Ok(true),
            "no" | "false" | "0" | "n" => Ok(false),
            other => Err((line, format!("not a boolean: {other:?}"))),
        };
        rows.push(ImportRow {
            worker: rec[0].to_string(),
            adj: rec[1].to_string(),
            noun: rec[2].to_string(),
            verdict: flag(&rec[3])?,
            is_test: flag(&rec[4])?,
            timestamp: rec[5].parse().map_err(|e| (line, format!("bad timestamp: {e}")))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let rows = parse_judgment_csv("worker,adj,noun,verdict,is_test,timestamp\nw1,cute,dog,yes,0,12\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].verdict && !rows[0].is_test);
        assert_eq!(parse_judgment_csv("w1,cute,dog,no,true,3\n").unwrap()[0].timestamp, 3);
        assert_eq!(parse_judgment_csv("w1,cute,dog,maybe,0,1\n").unwrap_err().0, 1);
        assert!(parse_judgment_csv("w1,cute,dog\n").is_err());
    }
}
