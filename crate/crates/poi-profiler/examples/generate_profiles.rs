//! Derive a natural-language profile per user from training trajectories
//! through a seeded mock chat backend, then summarize the trait and
//! attribute distributions across the cohort.
//!
//! Run with: cargo run --example generate_profiles

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockChatBackend;
use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::profiler::{
    generate_profiles, profile_distribution_report, GenOptions,
};
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

    let backend = Arc::new(MockChatBackend::new(7).with_model("mock-profiler"));
    let generated_at = Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap();
    let profiles = generate_profiles(
        &histories,
        backend.clone(),
        3,
        GenOptions::default(),
        generated_at,
        4,
    )?;
    println!(
        "generated {} profiles in {} backend calls",
        profiles.len(),
        backend.calls()
    );

    let (first, attempts) = &profiles[0];
    println!("\nuser {} (accepted on attempt {attempts}):", first.user_id);
    println!("  traits:     {}", first.traits.join(", "));
    println!("  attributes: {}", first.attributes.join(", "));
    println!("  summary:    {}...", &first.summary[..first.summary.len().min(120)]);

    let only_profiles: Vec<_> = profiles.iter().map(|(p, _)| p.clone()).collect();
    let report = profile_distribution_report(&only_profiles);
    println!("\n{}", report.to_markdown());
    Ok(())
}
