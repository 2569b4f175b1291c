//! Decide when a stored profile is stale: embed the old and freshly
//! regenerated summaries, and replace only when cosine similarity falls
//! below the threshold. Small drift keeps the stored version; a changed
//! routine triggers a rewrite.
//!
//! Run with: cargo run --example profile_update_policy

use std::sync::Arc;

use chrono::{TimeZone, Utc};
use poi_profiler::backend::MockEmbeddingBackend;
use poi_profiler::profiler::UserProfile;
use poi_profiler::trajsim::{maybe_update_profile, ProfileShiftPolicy, ShiftAction};

fn profile(user_id: u64, summary: &str) -> UserProfile {
    UserProfile {
        user_id,
        traits: vec!["introverted".into(), "agreeable".into(), "conscientious".into(),
                     "emotionally stable".into(), "open to experience".into()],
        attributes: vec!["adult".into(), "female".into(), "college & beyond".into(), "middle".into()],
        preferences: vec!["coffee before work".into()],
        routines: vec!["gym on weekday evenings".into()],
        summary: summary.into(),
        generated_at: Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap(),
        source_model: "mock-profiler".into(),
    }
}

fn main() -> poi_profiler::Result<()> {
    let policy = ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 0.85)?;

    let stored = profile(4, "User 4 commutes by subway, buys coffee near the office, \
                              and lifts weights three evenings a week.");

    // Same text, trivially identical embedding: keep.
    let unchanged = profile(4, &stored.summary.clone());
    let r = maybe_update_profile(&stored, &unchanged, &policy)?;
    println!("unchanged summary:  similarity {:.3} -> {:?}", r.similarity, r.action);
    assert_eq!(r.action, ShiftAction::Keep);

    // Different life, different text: the similarity collapses and the
    // candidate replaces the stored profile.
    let moved = profile(4, "User 4 now works from home in a different borough, \
                            hikes on weekends, and stopped going to the gym.");
    let r = maybe_update_profile(&stored, &moved, &policy)?;
    println!("rewritten summary:  similarity {:.3} -> {:?}", r.similarity, r.action);
    assert_eq!(r.action, ShiftAction::Replace);

    println!("\ndecision log ({} entries):", policy.decisions().len());
    for d in policy.decisions() {
        println!(
            "  user {}: similarity {:.3} vs threshold {:.2} -> {:?}",
            d.user_id, d.similarity, d.threshold, d.action
        );
    }
    Ok(())
}
