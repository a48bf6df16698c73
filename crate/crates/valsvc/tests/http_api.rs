mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use anpkit_valsvc::{http::router, Service};
use common::*;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()));
    (status, value)
}

fn truth(adj: &str, noun: &str) -> Option<bool> {
    test_questions().into_iter().find(|t| t.adj == adj && t.noun == noun).map(|t| t.ground_truth)
}

async fn pass_quiz(app: &Router, id: &str, worker: &str, n_correct: usize) -> StatusCode {
    let (_, quiz) = call(app, Method::GET, &format!("/jobs/{id}/quiz?worker={worker}"), None).await;
    let answers: Vec<bool> = quiz["items"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, it)| {
            let t = truth(it["adj"].as_str().unwrap(), it["noun"].as_str().unwrap()).unwrap();
            if i < n_correct { t } else { !t }
        })
        .collect();
    let (status, body) =
        call(app, Method::POST, &format!("/jobs/{id}/quiz?worker={worker}"), Some(json!({ "answers": answers }))).await;
    assert_eq!(body["passed"], json!(n_correct >= 7));
    status
}

fn app() -> Router {
    router(Arc::new(Service::in_memory()), None)
}

#[tokio::test]
async fn job_lifecycle_over_http() {
    let app = app();
    let spec = serde_json::to_value(numbered_spec(12, "road")).unwrap();
    let (status, created) = call(&app, Method::POST, "/jobs", Some(spec.clone())).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["job_id"].as_str().unwrap().to_string();
    let (status, again) = call(&app, Method::POST, "/jobs", Some(spec)).await;
    assert_eq!((status, again["job_id"].as_str()), (StatusCode::OK, Some(id.as_str())));

    let (status, st) = call(&app, Method::GET, &format!("/jobs/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(st["n_anps"], 12);

    // gate: not yet passed
    let (status, _) = call(&app, Method::GET, &format!("/jobs/{id}/next?worker=w"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(pass_quiz(&app, &id, "w", 7).await, StatusCode::OK);
    assert_eq!(pass_quiz(&app, &id, "loser", 6).await, StatusCode::OK);
    let (status, _) = call(&app, Method::GET, &format!("/jobs/{id}/next?worker=loser"), None).await;
    assert_eq!(status, StatusCode::FORBIDDEN);

    let (status, page) = call(&app, Method::GET, &format!("/jobs/{id}/next?worker=w"), None).await;
    assert_eq!(status, StatusCode::OK);
    let items = page["items"].as_array().unwrap();
    assert_eq!(items.len(), 5);
    assert_eq!(page["progress"]["total"], 12);
    // pairs and hidden tests carry the same fields
    for it in items {
        let keys: Vec<&String> = it.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["adj", "item_id", "noun"]);
    }
    let verdicts: Vec<Value> = items
        .iter()
        .map(|it| {
            let v = truth(it["adj"].as_str().unwrap(), it["noun"].as_str().unwrap()).unwrap_or(true);
            json!({ "item_id": it["item_id"], "verdict": v })
        })
        .collect();
    let uri = format!("/jobs/{id}/judgments?worker=w");
    let (status, ack) = call(&app, Method::POST, &uri, Some(json!({ "verdicts": verdicts.clone() }))).await;
    assert_eq!(status, StatusCode::OK, "{ack}");
    let (status, _) = call(&app, Method::POST, &uri, Some(json!({ "verdicts": verdicts }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) =
        call(&app, Method::POST, &uri, Some(json!({ "verdicts": [{ "item_id": "ffff", "verdict": true }] }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, results) = call(&app, Method::GET, &format!("/jobs/{id}/results"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(results["anps"].as_array().unwrap().len(), 12);
    assert_eq!(results["n_complete"], 0);

    let (status, export) = call(&app, Method::GET, &format!("/jobs/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    let lines: Vec<&str> = export.as_str().map(|s| s.lines().collect()).unwrap_or_default();
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().all(|l| l.contains("\"status\":\"PRE_CROWD\"")));
}

#[tokio::test]
async fn completed_job_reports_full_progress() {
    let app = app();
    let (_, created) = call(&app, Method::POST, "/jobs", Some(serde_json::to_value(numbered_spec(4, "tree")).unwrap())).await;
    let id = created["job_id"].as_str().unwrap().to_string();
    for w in ["a", "b", "c"] {
        pass_quiz(&app, &id, w, 10).await;
        loop {
            let (_, page) = call(&app, Method::GET, &format!("/jobs/{id}/next?worker={w}"), None).await;
            let items = page["items"].as_array().unwrap().clone();
            if items.is_empty() {
                break;
            }
            let verdicts: Vec<Value> = items
                .iter()
                .map(|it| {
                    let v = truth(it["adj"].as_str().unwrap(), it["noun"].as_str().unwrap()).unwrap_or(true);
                    json!({ "item_id": it["item_id"], "verdict": v })
                })
                .collect();
            let (status, _) =
                call(&app, Method::POST, &format!("/jobs/{id}/judgments?worker={w}"), Some(json!({ "verdicts": verdicts }))).await;
            assert_eq!(status, StatusCode::OK);
        }
    }
    let (_, st) = call(&app, Method::GET, &format!("/jobs/{id}"), None).await;
    assert_eq!(st["progress"], json!({ "judged": 4, "total": 4 }));
    let (_, results) = call(&app, Method::GET, &format!("/jobs/{id}/results"), None).await;
    assert_eq!(results["percent_correct"], json!(1.0));
    assert_eq!(results["mean_agreement"], json!(1.0));
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let app = app();
    let mut spec = numbered_spec(3, "x");
    spec.test_questions.pop();
    let (status, body) = call(&app, Method::POST, "/jobs", Some(serde_json::to_value(spec).unwrap())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("balanced"));
    let (status, _) = call(&app, Method::GET, "/jobs/missing/results", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn serves_static_ui() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>annotate</html>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let app = router(Arc::new(Service::in_memory()), Some(dir.path().to_path_buf()));
    let (status, body) = call(&app, Method::GET, "/ui/", None).await;
    assert_eq!((status, body.as_str()), (StatusCode::OK, Some("<html>annotate</html>")));
    let (status, _) = call(&app, Method::GET, "/ui/app.js", None).await;
    assert_eq!(status, StatusCode::OK);

    let (status, body) = call(&app_without_ui(), Method::GET, "/ui", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("not built"));
}

fn app_without_ui() -> Router {
    app()
}
