//! Start the profile service on a pipeline run and walk the scrutability
//! loop over HTTP: read a profile, inject a preference, save an edit with
//! optimistic versioning, and request a prediction after each change.
//!
//! Run with: cargo run --example serve_api

use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;

use poi_profiler::pipeline::{run_full_pipeline, PipelineConfig};
use poi_profiler::service::{build_state, router, InjectRequest, PredictRequest, PredictResponse, VersionedProfile};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = PipelineConfig::golden(
        fixtures.join("checkins_20users.tsv"),
        Some(fixtures.join("boundary.geojson")),
        dir.path().join("out"),
    );
    println!("running pipeline into {} ...", cfg.output_dir.display());
    run_full_pipeline(&cfg)?;

    let state = Arc::new(build_state(&cfg)?);
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let base = format!("http://{}", listener.local_addr().unwrap());
    listener.set_nonblocking(true).unwrap();
    std::thread::spawn(move || {
        let runtime = tokio::runtime::Runtime::new().unwrap();
        runtime.block_on(async {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            axum::serve(listener, router(state)).await.unwrap();
        });
    });
    println!("serving on {base}\n");
    let http = reqwest::blocking::Client::new();

    let users: Vec<u64> = http.get(format!("{base}/users")).send().unwrap().json().unwrap();
    let uid = users[0];
    println!("GET /users -> {} users, picking {uid}", users.len());

    let stored: VersionedProfile = http
        .get(format!("{base}/users/{uid}/profile"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    println!(
        "GET /users/{uid}/profile -> version {}, summary {} chars",
        stored.version,
        stored.profile.summary.len()
    );

    let trajs: Vec<serde_json::Value> = http
        .get(format!("{base}/users/{uid}/trajectories"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    let traj_id = trajs[0]["traj_id"].as_u64().unwrap();
    println!("GET /users/{uid}/trajectories -> {} sessions, picking {traj_id}", trajs.len());

    let predict = |label: &str| {
        let resp: PredictResponse = http
            .post(format!("{base}/users/{uid}/predict"))
            .json(&PredictRequest { trajectory_id: traj_id })
            .send()
            .unwrap()
            .json()
            .unwrap();
        println!(
            "POST /users/{uid}/predict ({label}) -> POI {:?} ({})",
            resp.parsed_poi_id,
            resp.category_name.as_deref().unwrap_or("unparsed")
        );
    };
    predict("original profile");

    let injected: VersionedProfile = http
        .post(format!("{base}/users/{uid}/inject-preference"))
        .json(&InjectRequest { category: "Coffee Shop".into() })
        .send()
        .unwrap()
        .json()
        .unwrap();
    println!(
        "POST /users/{uid}/inject-preference -> version {}, summary now ends: \"...{}\"",
        injected.version,
        &injected.profile.summary[injected.profile.summary.len() - 58..]
    );
    predict("after injection");

    // Manual edit through PUT, guarded by the version we just read.
    let mut edit = injected.clone();
    edit.profile.summary.push_str(" They also avoid crowded places on weekends.");
    let resp = http
        .put(format!("{base}/users/{uid}/profile"))
        .json(&edit)
        .send()
        .unwrap();
    println!("PUT /users/{uid}/profile (edit on v{}) -> {}", edit.version, resp.status());
    predict("after manual edit");

    // A second writer using the stale version is rejected.
    let resp = http
        .put(format!("{base}/users/{uid}/profile"))
        .json(&injected)
        .send()
        .unwrap();
    println!("PUT /users/{uid}/profile (stale v{}) -> {}", injected.version, resp.status());
    Ok(())
}
