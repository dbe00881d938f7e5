//! Drives the HTTP API in-process: register a model, retrieve, browse
//! fronts and look up an item.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use paretoir::data::{save_dataset, DatasetFormat};
use paretoir::eval::BridgeBenchmark;
use paretoir::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.expect("router is infallible");
    let status = resp.status();
    let bytes = resp.into_body().collect().await.expect("body").to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn post(uri: &str, body: Value) -> Request<Body> {
    Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .expect("valid request")
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("bench.bin");
    let (ds, labels) = BridgeBenchmark::default().generate(0)?;
    save_dataset(&data, DatasetFormat::Binary, &ds, Some(&labels))?;
    let app = router(AppState::new(dir.path().join("registry")));

    let (_, created) = call(&app, post("/models", json!({"dataset_path": data, "seed": 3}))).await;
    let id = created["model_id"].as_str().expect("model id").to_owned();
    println!("model {id}");

    let (_, resp) = call(
        &app,
        post("/retrieve", json!({"model_id": id, "query_ids": ["a0", "b0"], "k": 8})),
    )
    .await;
    for (f, front) in resp["fronts"].as_array().into_iter().flatten().enumerate() {
        let ids: Vec<&str> = front.as_array().into_iter().flatten().filter_map(|it| it["item_id"].as_str()).collect();
        println!("front {}: {}", f + 1, ids.join(" "));
    }

    let uri = format!("/fronts/{id}?queries=a0,b0&depth=3");
    let (_, fronts) = call(&app, Request::get(uri).body(Body::empty())?).await;
    println!("available depth {}", fronts["available_depth"]);

    let (_, item) = call(&app, Request::get("/items/ab0").body(Body::empty())?).await;
    println!("item {}", item);

    let (status, err) = call(
        &app,
        post("/retrieve", json!({"model_id": id, "query_ids": ["a0"], "k": 0})),
    )
    .await;
    println!("k=0 -> {status} {}", err["error"]["code"]);
    Ok(())
}
