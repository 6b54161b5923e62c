// Drives the judgment HTTP API in-process: two assessors grade a pool,
// one resolves a tie and an admin exports the qrels. `tetun-ir
// judge-serve --config judge.toml` serves the same router over TCP.

use std::error::Error;
use std::path::Path;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tetun_ir::corpus::{read_documents_file, read_topics_file};
use tetun_ir::index::{Field, InvertedIndex};
use tetun_ir::judge::server::{router, AppState, AssessorConfig};
use tetun_ir::judge::{Collection, ExclusionRule, JudgeSettings, JudgeStore};
use tetun_ir::pool::{build_pools, PoolConfig};
use tetun_ir::textnorm::NormConfig;

async fn call(app: &axum::Router, method: &str, uri: &str, token: &str, body: Option<Value>) -> Result<(u16, Value), Box<dyn Error>> {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("authorization", format!("Bearer {token}"))
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))?;
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes)?))
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let docs = read_documents_file(fixtures.join("docs.xml"))?;
    let topics = read_topics_file(fixtures.join("topics.xml"))?;
    let ix = InvertedIndex::build(&docs, Field::Content, &NormConfig::default())?;
    let pools = build_pools(&topics[..1], &ix, &PoolConfig { depth: 4, ..PoolConfig::default() })?;

    let data = tempfile::tempdir()?;
    let settings = JudgeSettings {
        assessors_per_pair: 2,
        second_round_votes: 1,
        snapshot_every: 10,
    };
    let store = JudgeStore::open(data.path(), Collection::new(pools, topics, docs)?, settings)?;
    let assessors = vec![
        AssessorConfig { id: "ana".into(), token: "ana-secret-1".into(), admin: true },
        AssessorConfig { id: "jose".into(), token: "jose-secret-1".into(), admin: false },
    ];
    let rule = ExclusionRule { min_relevant: 1, max_relevant: 100 };
    let app = router(AppState::new(store, assessors, rule));

    tokio::runtime::Runtime::new()?.block_on(async {
        let (_, pool) = call(&app, "GET", "/topics/1/pool", "jose-secret-1", None).await?;
        let docnos: Vec<String> = pool["documents"]
            .as_array()
            .unwrap()
            .iter()
            .map(|d| d["docno"].as_str().unwrap().to_string())
            .collect();
        println!("topic 1 pool: {}", docnos.join(" "));

        for (token, first) in [("ana-secret-1", 3), ("jose-secret-1", 1)] {
            let judgments: Vec<Value> = docnos
                .iter()
                .enumerate()
                .map(|(i, d)| json!({ "docno": d, "grade": if i == 0 { first } else { 0 } }))
                .collect();
            let body = json!({ "judgments": judgments });
            let (status, _) = call(&app, "POST", "/topics/1/judgments", token, Some(body.clone())).await?;
            println!("submit as {token}: {status}");
            let (again, _) = call(&app, "POST", "/topics/1/judgments", token, Some(body)).await?;
            println!("resubmit as {token}: {again} (topic locked)");
        }

        let (_, ties) = call(&app, "GET", "/ties", "jose-secret-1", None).await?;
        let tie = &ties["ties"][0];
        println!("tie on {} with options {}", tie["pair"], tie["options"]);
        let uri = format!("/ties/{}/resolution", tie["pair"].as_str().unwrap());
        let (status, ack) = call(&app, "POST", &uri, "jose-secret-1", Some(json!({ "grade": 3 }))).await?;
        println!("resolution {status}: {}", ack["ack"]["resolved"]);

        let (status, export) = call(&app, "GET", "/export/qrels", "ana-secret-1", None).await?;
        println!("export {status}:\n{}", export["qrels_text"].as_str().unwrap_or(""));
        Ok::<_, Box<dyn Error>>(())
    })?;
    Ok(())
}

fn main() {
    run_example().unwrap();
}
