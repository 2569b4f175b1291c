//! Run next-POI predictions over held-out examples with a deterministic
//! mock model, compute top-1 accuracy, and break results down by user
//! activity to expose cold-start behavior.
//!
//! Run with: cargo run --example predict_and_evaluate

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockChatBackend;
use poi_profiler::eval::{
    accuracy_at_1, cold_start_report, cold_start_to_markdown, group_users_by_activity,
    run_predictions,
};
use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::profiler::{generate_profiles, GenOptions, UserProfile};
use poi_profiler::promptgen::{build_sft_dataset, ChatTemplate, SystemPromptConfig};
use poi_profiler::sessionize::{filter_sessions, sessionize, split, SplitSpec, Trajectory};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = parse_checkin_file(
        &fixtures.join("checkins_20users.tsv"),
        CheckinFormat::FoursquareTsv,
    )?
    .dataset;
    let spec = SplitSpec::default();
    let sessions = filter_sessions(&sessionize(&dataset.checkins, spec.delta_t_seconds), &spec);
    let splits = split(&sessions, &spec)?;

    let mut histories: BTreeMap<u64, Vec<Trajectory>> = BTreeMap::new();
    for t in &splits.train {
        histories.entry(t.user_id).or_default().push(t.clone());
    }
    let generated_at = Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap();
    let profiles: BTreeMap<u64, UserProfile> = generate_profiles(
        &histories,
        Arc::new(MockChatBackend::new(7).with_model("mock-profiler")),
        3,
        GenOptions::default(),
        generated_at,
        4,
    )?
    .into_iter()
    .map(|(p, _)| (p.user_id, p))
    .collect();

    let examples = build_sft_dataset(
        &splits.test,
        &profiles,
        &SystemPromptConfig::full(),
        dataset.m,
        ChatTemplate::Llama2Chat,
    )?;
    let predictor = MockChatBackend::new(9).with_model("mock-predictor");
    let records = run_predictions(&examples, &predictor, dataset.m)?;
    let acc = accuracy_at_1(&records)?;
    let correct = records.iter().filter(|r| r.correct).count();
    println!("Acc@1: {acc:.4} ({correct}/{} correct)", records.len());

    let sample = &records[0];
    println!("\nexample {}: expected POI {}, model said {:?}", sample.example_id, sample.expected_poi_id, sample.parsed_poi_id);
    println!("  raw: {}", sample.raw_output);

    // Activity groups come from train-split check-in volume: bottom 30%
    // inactive, top 30% very active, the rest normal.
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for t in &splits.train {
        *counts.entry(t.user_id).or_insert(0) += t.len();
    }
    let grouping = group_users_by_activity(&counts);
    let report = cold_start_report(&records, &grouping)?;
    println!("\n{}", cold_start_to_markdown(&report));
    Ok(())
}
