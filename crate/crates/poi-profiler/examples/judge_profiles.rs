//! Score generated profiles with two independent mock judges on the four
//! binary criteria (fluency, informativeness, conciseness, relevance) and
//! aggregate per judge.
//!
//! Run with: cargo run --example judge_profiles

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockChatBackend;
use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::judge::{aggregate_judge_scores, aggregates_to_markdown, judge_profile};
use poi_profiler::profiler::{generate_profiles, GenOptions};
use poi_profiler::sessionize::{filter_sessions, sessionize, SplitSpec, Trajectory};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = parse_checkin_file(
        &fixtures.join("checkins_20users.tsv"),
        CheckinFormat::FoursquareTsv,
    )?
    .dataset;
    let spec = SplitSpec::default();
    let sessions = filter_sessions(&sessionize(&dataset.checkins, spec.delta_t_seconds), &spec);
    let mut histories: BTreeMap<u64, Vec<Trajectory>> = BTreeMap::new();
    for t in sessions {
        histories.entry(t.user_id).or_default().push(t);
    }

    let generated_at = Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap();
    let profiles = generate_profiles(
        &histories,
        Arc::new(MockChatBackend::new(7).with_model("mock-profiler")),
        3,
        GenOptions::default(),
        generated_at,
        4,
    )?;

    let judges = [
        MockChatBackend::new(8).with_model("mock-judge-a"),
        MockChatBackend::new(21).with_model("mock-judge-b"),
    ];
    let mut scores = Vec::new();
    for judge in &judges {
        for (profile, _) in &profiles {
            scores.push(judge_profile(profile, judge, 3)?);
        }
    }
    println!("collected {} scores from {} judges", scores.len(), judges.len());

    let aggregates = aggregate_judge_scores(&scores)?;
    println!("\n{}", aggregates_to_markdown(&aggregates));
    Ok(())
}
