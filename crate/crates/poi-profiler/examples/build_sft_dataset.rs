//! Render question-answer fine-tuning examples from trajectories and
//! profiles: the system prompt carries the user profile, the input lists
//! the session's check-ins, and the target names the held-out next POI.
//!
//! Run with: cargo run --example build_sft_dataset

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockChatBackend;
use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::profiler::{generate_profiles, GenOptions, UserProfile};
use poi_profiler::promptgen::{
    build_sft_dataset, emit_sft_dataset, ChatTemplate, SystemPromptConfig,
};
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

    let full = SystemPromptConfig::full();
    let examples = build_sft_dataset(&splits.test, &profiles, &full, dataset.m, ChatTemplate::Llama2Chat)?;
    println!("built {} test examples (m = {})", examples.len(), dataset.m);

    let ex = &examples[0];
    println!("\nexample {} for user {}:", ex.example_id, ex.user_id);
    println!("  target: {}", ex.target);
    println!("  ~{} tokens, full chat-wrapped text:\n", ex.token_estimate);
    println!("{}\n", ex.text);

    // Ablation ladder: each extra profile component strictly lengthens the
    // system prompt.
    let ladder = [
        ("summary only", SystemPromptConfig::summary_only()),
        ("+ routines/preferences", SystemPromptConfig { include_routines_preferences: true, ..SystemPromptConfig::summary_only() }),
        ("full (attributes + traits)", full),
    ];
    for (label, cfg) in &ladder {
        let one = build_sft_dataset(&splits.test[..1], &profiles, cfg, dataset.m, ChatTemplate::Plain)?;
        println!("{label:>28}: system prompt {} chars", one[0].system_prompt.len());
    }

    let out = std::env::temp_dir().join("sft_demo.jsonl");
    emit_sft_dataset(&examples, &out)?;
    println!("\nwrote {}", out.display());
    Ok(())
}
