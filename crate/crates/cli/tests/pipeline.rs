mod common;

use std::collections::BTreeSet;
use std::fs;

use common::*;

#[test]
fn full_pipeline_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let got = outputs(dir.path());
    let golden = golden_dir();
    if std::env::var_os("ANPKIT_BLESS").is_some() {
        let _ = fs::remove_dir_all(&golden);
        for (rel, bytes) in &got {
            let p = golden.join(rel);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, bytes).unwrap();
        }
    }
    let want = outputs(&golden);
    let got_names: BTreeSet<_> = got.keys().collect();
    let want_names: BTreeSet<_> = want.keys().collect();
    assert_eq!(got_names, want_names);
    for (rel, bytes) in &want {
        assert!(got[rel] == *bytes, "{rel} differs from the golden copy");
    }
}

#[test]
fn two_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(a.path());
    run_pipeline(b.path());
    assert_same_outputs(&outputs(a.path()), &outputs(b.path()));
}

#[test]
fn rerunning_in_place_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let first = outputs(dir.path());
    run_pipeline(dir.path());
    assert_same_outputs(&first, &outputs(dir.path()));
}

#[test]
fn filter_without_discover_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = anpkit(dir.path(), &["filter"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run `anpkit discover` first"), "{err}");
}

#[test]
fn downstream_stages_name_their_prerequisites() {
    let dir = tempfile::tempdir().unwrap();
    for (args, stage) in [
        (vec!["analyze"], "filter"),
        (vec!["cluster"], "filter"),
        (vec!["predict"], "filter"),
        (vec!["--lang", "en", "export"], "filter"),
    ] {
        let o = anpkit(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(&format!("run `anpkit {stage}` first")), "{args:?}: {err}");
    }
    ok(dir.path(), &["discover"]);
    ok(dir.path(), &["filter"]);
    let o = anpkit(dir.path(), &["--lang", "en", "export"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run `anpkit import-judgments` first"));
    let o = anpkit(dir.path(), &["analyze", "--post-crowd"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run `anpkit export` first"));
}

#[test]
fn every_output_has_a_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    for (rel, bytes) in outputs(dir.path()) {
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("# anpkit "), "{rel}");
        assert!(text.contains("\n# stage: "), "{rel}");
        assert!(text.contains("\n# seed: "), "{rel}");
        assert!(text.contains("\n# input: "), "{rel}");
    }
    let tree = fs::read_to_string(dir.path().join("cluster/tree.json")).unwrap();
    assert!(tree.contains("# seed: 7\n"));
    let v: serde_json::Value = serde_json::from_str(&strip_header(&tree)).unwrap();
    assert!(v.is_object());
}

#[test]
fn seed_flag_overrides_the_stage_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["discover"]);
    ok(dir.path(), &["filter"]);
    ok(dir.path(), &["--seed", "99", "predict"]);
    let acc = fs::read_to_string(dir.path().join("predict/accuracy.tsv")).unwrap();
    assert!(acc.contains("# seed: 99\n"));
}

#[test]
fn lang_flag_restricts_stages() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--lang", "de", "discover"]);
    assert!(dir.path().join("candidates/de.jsonl").is_file());
    assert!(!dir.path().join("candidates/en.jsonl").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_anpkit");
    let run = |args: &[&str]| std::process::Command::new(bin).args(args).output().unwrap();

    // unreadable manifest is an I/O error
    let missing = dir.path().join("nope.toml");
    let o = run(&["--manifest", missing.to_str().unwrap(), "discover"]);
    assert_eq!(o.status.code(), Some(2));

    // a manifest naming a missing file fails validation
    let text = fs::read_to_string(sample_dir().join("anpkit.toml")).unwrap();
    let broken = dir.path().join("broken.toml");
    fs::write(&broken, text.replace("seeds.json", "no-such-seeds.json")).unwrap();
    let o = run(&["--manifest", broken.to_str().unwrap(), "discover"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-seeds.json"));

    // usage errors
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = anpkit(dir.path(), &["--lang", "xx", "discover"]);
    assert_eq!(o.status.code(), Some(1));
    let o = anpkit(dir.path(), &["export"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lang"));

    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn import_report_lists_rejected_rows() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let report = fs::read_to_string(dir.path().join("validation/en.import.tsv")).unwrap();
    let body = strip_header(&report);
    let rejected: Vec<&str> = body.lines().filter(|l| l.contains("\trejected\t")).collect();
    assert!(rejected.iter().any(|l| l.contains("purple\tmoon") && l.contains("unknown pair")));
    // every planted violation was filtered before the crowd saw it
    assert!(rejected.iter().any(|l| l.contains("\tsad\tdog\t")));
    let post = fs::read_to_string(dir.path().join("ontology/en.post.jsonl")).unwrap();
    let old_house = post.lines().find(|l| l.contains("\"adj\":\"old\",\"noun\":\"house\"")).unwrap();
    assert!(old_house.contains("\"status\":\"REJECTED\""));
}

fn statuses(path: &std::path::Path) -> std::collections::BTreeMap<String, String> {
    strip_header(&fs::read_to_string(path).unwrap())
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (
                format!("{} {}", v["adj"].as_str().unwrap(), v["noun"].as_str().unwrap()),
                v["status"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn sample_filters_catch_each_planted_violation() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["discover"]);
    ok(dir.path(), &["filter"]);
    let en = statuses(&dir.path().join("ontology/en.all.jsonl"));
    let de = statuses(&dir.path().join("ontology/de.all.jsonl"));
    let expect = [
        (&en, "beautiful paris", "FILTERED(semantics)"),
        (&en, "sad iphone", "FILTERED(semantics)"),
        (&en, "wooden table", "FILTERED(sentiment)"),
        (&en, "happy cat", "FILTERED(frequency)"),
        (&en, "sad dog", "FILTERED(diversity)"),
        (&en, "dark house", "FILTERED(subsampling)"),
        (&de, "happy hund", "FILTERED(language)"),
        (&de, "schön berlin", "FILTERED(semantics)"),
        (&de, "alt tisch", "FILTERED(sentiment)"),
        (&de, "dunkel wald", "FILTERED(diversity)"),
        (&de, "schöne blume", "FILTERED(stem_unification)"),
    ];
    for (map, phrase, status) in expect {
        assert_eq!(map[phrase], status, "{phrase}");
    }
    let kept = |m: &std::collections::BTreeMap<String, String>| m.values().filter(|s| *s == "PRE_CROWD").count();
    assert_eq!(kept(&en), 12);
    assert_eq!(kept(&de), 7);
}

#[test]
fn serve_exposes_the_job_and_ui() {
    use std::io::{Read, Write};
    use std::net::{TcpListener, TcpStream};
    use std::time::{Duration, Instant};

    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["discover"]);
    ok(dir.path(), &["filter"]);
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let addr = format!("127.0.0.1:{port}");
    let mut child = std::process::Command::new(env!("CARGO_BIN_EXE_anpkit"))
        .arg("--manifest")
        .arg(sample_dir().join("anpkit.toml"))
        .arg("--out")
        .arg(dir.path())
        .args(["serve", "--addr", &addr])
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let get = |path: &str| -> Option<String> {
        let mut s = TcpStream::connect(&addr).ok()?;
        write!(s, "GET {path} HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").ok()?;
        let mut buf = String::new();
        s.read_to_string(&mut buf).ok()?;
        Some(buf)
    };
    let deadline = Instant::now() + Duration::from_secs(20);
    let ui = loop {
        if let Some(r) = get("/ui") {
            break r;
        }
        assert!(Instant::now() < deadline, "service did not start");
        std::thread::sleep(Duration::from_millis(50));
    };
    let jobs = fs::read_dir(dir.path().join("valsvc/jobs")).unwrap().count();
    let job_id = fs::read_dir(dir.path().join("valsvc/jobs"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .file_name()
        .into_string()
        .unwrap();
    let status = get(&format!("/jobs/{job_id}")).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(ui.starts_with("HTTP/1.1 200"), "{ui}");
    assert!(ui.contains("not built"));
    assert_eq!(jobs, 1);
    assert!(status.starts_with("HTTP/1.1 200"), "{status}");
    assert!(status.contains("\"lang\":\"en\""));
}
