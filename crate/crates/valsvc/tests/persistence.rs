mod common;

use std::sync::Arc;

use anpkit_valsvc::{parse_judgment_csv, Service, Verdict, SNAPSHOT_EVERY};
use common::*;

fn drive(svc: &Service, id: &str, workers: &[&str], pages: usize) {
    for w in workers {
        let quiz = svc.quiz(id, w).unwrap();
        let truth: Vec<bool> = quiz
            .iter()
            .map(|q| test_questions().iter().find(|t| t.adj == q.adj && t.noun == q.noun).unwrap().ground_truth)
            .collect();
        assert!(svc.take_quiz(id, w, &truth, None).unwrap().passed);
    }
    for _ in 0..pages {
        for w in workers {
            let page = svc.next_page(id, w).unwrap();
            let verdicts: Vec<Verdict> = page
                .items
                .iter()
                .map(|it| Verdict {
                    item_id: it.item_id.clone(),
                    verdict: test_questions()
                        .iter()
                        .find(|t| t.adj == it.adj && t.noun == it.noun)
                        .map_or(it.adj.len() % 2 == 0, |t| t.ground_truth),
                })
                .collect();
            svc.submit_judgments(id, w, &verdicts).unwrap();
        }
    }
}

#[test]
fn restart_replays_to_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let clock: anpkit_valsvc::Clock = Arc::new(|| 42);
    let svc = Service::open(dir.path()).unwrap().with_clock(clock.clone());
    let (id, _) = svc.create_job(numbered_spec(30, "street")).unwrap();
    drive(&svc, &id, &["ann", "bo", "cy"], 3);
    // leave a page pending across the restart
    let pending = svc.next_page(&id, "ann").unwrap();
    let before = svc.state(&id).unwrap();
    let results_before = svc.aggregate(&id).unwrap();
    // no orderly shutdown: the process just goes away
    drop(svc);

    let svc = Service::open(dir.path()).unwrap().with_clock(clock);
    assert_eq!(svc.job_ids(), std::slice::from_ref(&id));
    assert_eq!(svc.state(&id).unwrap(), before);
    assert_eq!(svc.aggregate(&id).unwrap(), results_before);
    assert_eq!(svc.next_page(&id, "ann").unwrap(), pending);
}

#[test]
fn snapshots_and_torn_tail() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Service::open(dir.path()).unwrap();
    let (id, _) = svc.create_job(numbered_spec(40, "park")).unwrap();
    let rows = parse_judgment_csv(
        &(0..40)
            .flat_map(|i| (0..3).map(move |w| format!("w{w},adj{i:02},park,yes,0,{i}\n")))
            .collect::<String>(),
    )
    .unwrap();
    svc.import_judgments(&id, &rows).unwrap();
    let before = svc.state(&id).unwrap();
    assert!(before.events_applied > SNAPSHOT_EVERY);
    drop(svc);

    let job_dir = dir.path().join("jobs").join(&id);
    assert!(job_dir.join("snapshot.json").exists());
    // simulate a crash in the middle of an append
    let log = job_dir.join("events.jsonl");
    let mut bytes = std::fs::read(&log).unwrap();
    bytes.extend_from_slice(b"{\"event\":\"judged\",\"item\":");
    std::fs::write(&log, &bytes).unwrap();

    let svc = Service::open(dir.path()).unwrap();
    assert_eq!(svc.state(&id).unwrap(), before);
    // the torn line is gone and new events append cleanly
    let more = parse_judgment_csv("w9,adj00,park,no,0,99\n").unwrap();
    assert_eq!(svc.import_judgments(&id, &more).unwrap().accepted, 1);
    drop(svc);
    let svc = Service::open(dir.path()).unwrap();
    assert_eq!(svc.aggregate(&id).unwrap().anps[0].no, 1);
}

#[test]
fn identical_spec_reuses_job_after_restart() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Service::open(dir.path()).unwrap();
    let (id, created) = svc.create_job(numbered_spec(5, "cat")).unwrap();
    assert!(created);
    drop(svc);
    let svc = Service::open(dir.path()).unwrap();
    assert_eq!(svc.create_job(numbered_spec(5, "cat")).unwrap(), (id, false));
}
