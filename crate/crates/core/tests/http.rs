use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use paretoir::data::{save_dataset, DatasetFormat, FeatureDataset};
use paretoir::eval::BridgeBenchmark;
use paretoir::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn post(uri: &str, body: Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

async fn bench_model(dir: &Path) -> (Router, String, std::path::PathBuf) {
    let data = dir.join("bench.bin");
    let (ds, labels) = BridgeBenchmark::default().generate(0).unwrap();
    save_dataset(&data, DatasetFormat::Binary, &ds, Some(&labels)).unwrap();
    let app = router(AppState::new(dir.join("store")));
    let (status, body) = call(&app, post("/models", json!({"dataset_path": data, "seed": 1}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    (app, body["model_id"].as_str().unwrap().to_owned(), data)
}

#[tokio::test]
async fn retrieval_contract_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (app, id, _) = bench_model(dir.path()).await;

    let req = json!({"model_id": id, "query_ids": ["a0", "b0"], "k": 20, "method": "pfm"});
    let (status, body) = call(&app, post("/retrieve", req.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let fronts = body["fronts"].as_array().unwrap();
    let total: usize = fronts.iter().map(|f| f.as_array().unwrap().len()).sum();
    assert_eq!(total, 20);
    for (f, front) in fronts.iter().enumerate() {
        for it in front.as_array().unwrap() {
            assert_eq!(it["front"], f + 1);
            assert_eq!(it["coords"].as_array().unwrap().len(), 2);
        }
    }
    // Replays are identical apart from timing.
    let (_, again) = call(&app, post("/retrieve", req)).await;
    assert_eq!(without_timing(body), without_timing(again));

    let scalar = json!({"model_id": id, "query_ids": ["a0", "b0"], "k": 5, "method": "scalarized", "weights": [1, 3]});
    let (status, body) = call(&app, post("/retrieve", scalar)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["fronts"].as_array().unwrap().len(), 1);
    assert!(body["fronts"][0][0]["front"].is_null());

    let cases = [
        (json!({"model_id": id, "query_ids": ["a0"], "k": 0}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"model_id": id, "query_ids": ["nope"], "k": 3}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"model_id": id, "query_ids": ["a0", "a0"], "k": 3}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"model_id": id, "query_ids": ["a0"], "k": 3, "method": "borda"}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"model_id": id, "query_ids": ["a0"]}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"model_id": "missing", "query_ids": ["a0"], "k": 3}), StatusCode::NOT_FOUND),
    ];
    for (req, want) in cases {
        let (status, body) = call(&app, post("/retrieve", req.clone())).await;
        assert_eq!(status, want, "{req}");
        assert!(body["error"]["code"].is_string(), "{body}");
    }
    let (status, _) = call(&app, post("/models", json!({"dataset_path": "/no/such/file"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn concurrent_requests_match_serial_ones() {
    let dir = tempfile::tempdir().unwrap();
    let (app, id, _) = bench_model(dir.path()).await;
    let requests: Vec<Value> = ["a1", "a2", "b5", "c3", "ab4", "a9", "b1", "c7"]
        .iter()
        .zip(["b0", "c1", "ab2", "a4", "b9", "b3", "c0", "a8"])
        .map(|(a, b)| json!({"model_id": id, "query_ids": [a, b], "k": 15}))
        .collect();
    let mut serial = Vec::new();
    for r in &requests {
        serial.push(without_timing(call(&app, post("/retrieve", r.clone())).await.1));
    }
    let handles: Vec<_> = requests
        .iter()
        .cloned()
        .map(|r| {
            let app = app.clone();
            tokio::spawn(async move { without_timing(call(&app, post("/retrieve", r)).await.1) })
        })
        .collect();
    for (h, want) in handles.into_iter().zip(serial) {
        assert_eq!(h.await.unwrap(), want);
    }
}

#[tokio::test]
async fn fronts_items_and_fingerprints() {
    let dir = tempfile::tempdir().unwrap();
    let (app, id, data) = bench_model(dir.path()).await;

    let (status, body) = call(&app, get(&format!("/fronts/{id}?queries=a0,b0&depth=3"))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["fronts"].as_array().unwrap().len(), 3);
    assert!(body["available_depth"].as_u64().unwrap() >= 3);
    let (status, _) = call(&app, get(&format!("/fronts/{id}?queries=a0,b0&depth=0"))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, get("/fronts/unknown?queries=a0,b0")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let mut sidecar = data.as_os_str().to_owned();
    sidecar.push(".thumbnails.csv");
    std::fs::write(&sidecar, "item_id,thumbnail\nab3,thumbs/ab3.png\n").unwrap();
    let (status, item) = call(&app, get("/items/ab3")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(item["labels"], json!(["label_a", "label_b"]));
    assert_eq!(item["thumbnail"], "thumbs/ab3.png");
    let (_, item) = call(&app, get(&format!("/items/c0?model_id={id}"))).await;
    assert_eq!(item["labels"], json!(["label_c"]));
    assert!(item["thumbnail"].is_null());
    let (status, _) = call(&app, get("/items/zzz")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // Changing the dataset under a registered model is refused.
    let (ds, labels) = BridgeBenchmark::default().generate(5).unwrap();
    save_dataset(&data, DatasetFormat::Binary, &ds, Some(&labels)).unwrap();
    let req = json!({"model_id": id, "query_ids": ["a0", "b0"], "k": 5});
    let (status, body) = call(&app, post("/retrieve", req)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "fingerprint_mismatch");
}

#[tokio::test]
async fn anti_diagonal_is_a_single_front() {
    let dir = tempfile::tempdir().unwrap();
    // Items on a line between the two queries: closer to one end means
    // farther from the other, so no item dominates another.
    let rows: Vec<Vec<f64>> = (0..=40).map(|i| vec![i as f64]).collect();
    let ds = FeatureDataset::from_rows(&rows).unwrap();
    let data = dir.path().join("line.bin");
    save_dataset(&data, DatasetFormat::Binary, &ds, None).unwrap();
    let app = router(AppState::new(dir.path().join("store")));
    let config = json!({"anchor_count": 41, "nearest_anchors": 3});
    let (_, body) = call(&app, post("/models", json!({"dataset_path": data, "config": config}))).await;
    let id = body["model_id"].as_str().unwrap();
    let (status, body) = call(&app, get(&format!("/fronts/{id}?queries=0,40&depth=1"))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let front = body["fronts"][0].as_array().unwrap();
    assert_eq!(front.len(), 39);
    let mut pts: Vec<(f64, f64)> = front
        .iter()
        .map(|it| (it["coords"][0].as_f64().unwrap(), it["coords"][1].as_f64().unwrap()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(pts.windows(2).all(|w| w[0].1 > w[1].1));
}
