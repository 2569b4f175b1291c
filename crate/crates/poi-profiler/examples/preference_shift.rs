//! Append a short-term preference sentence to every profile, re-run
//! predictions without retraining, and count how often the preferred
//! category is predicted before and after the edit.
//!
//! Run with: cargo run --example preference_shift

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockChatBackend;
use poi_profiler::eval::{category_shift_report, run_predictions, shift_to_markdown};
use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::profiler::{generate_profiles, GenOptions, UserProfile};
use poi_profiler::promptgen::{
    build_sft_dataset, inject_preference, ChatTemplate, SystemPromptConfig,
};
use poi_profiler::sessionize::{filter_sessions, sessionize, split, SplitSpec, Trajectory};

fn main() -> poi_profiler::Result<()> {
    let category = "Coffee Shop";
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

    let prompt_cfg = SystemPromptConfig::full();
    let predictor = MockChatBackend::new(9).with_model("mock-predictor");

    let before_examples =
        build_sft_dataset(&splits.test, &profiles, &prompt_cfg, dataset.m, ChatTemplate::Llama2Chat)?;
    let before = run_predictions(&before_examples, &predictor, dataset.m)?;

    // Same trajectories, edited profiles: example ids line up one-to-one.
    let injected: BTreeMap<u64, UserProfile> = profiles
        .iter()
        .map(|(&uid, p)| Ok((uid, inject_preference(p, category)?)))
        .collect::<poi_profiler::Result<_>>()?;
    let sentence_suffix = format!("Today, this user really wants to visit a {category} place.");
    assert!(injected.values().all(|p| p.summary.ends_with(&sentence_suffix)));

    let after_examples =
        build_sft_dataset(&splits.test, &injected, &prompt_cfg, dataset.m, ChatTemplate::Llama2Chat)?;
    let after = run_predictions(&after_examples, &predictor, dataset.m)?;

    let report = category_shift_report(&before, &after, &dataset.poi_categories())?;
    println!("preference injected: \"{sentence_suffix}\"\n");
    println!("{}", shift_to_markdown(&report));
    let shift = report.categories.get(category).expect("category tallied");
    println!(
        "\n{category}: predicted {} times before, {} after (delta {:+})",
        shift.before, shift.after, shift.delta
    );
    Ok(())
}
