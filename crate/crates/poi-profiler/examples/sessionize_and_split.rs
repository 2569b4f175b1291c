//! Group check-ins into delta-t sessions, drop thin users and sessions,
//! and cut chronological train/validation/test splits whose validation and
//! test sets only contain users and POIs seen in training.
//!
//! Run with: cargo run --example sessionize_and_split

use std::collections::BTreeSet;
use std::path::Path;

use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::sessionize::{
    filter_sessions, sessionize, split, CapSampling, SplitProtocol, SplitSpec,
};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = parse_checkin_file(
        &fixtures.join("checkins_20users.tsv"),
        CheckinFormat::FoursquareTsv,
    )?
    .dataset;

    let spec = SplitSpec {
        protocol: SplitProtocol::Chrono701020,
        delta_t_seconds: 72 * 3600,
        min_sessions_per_user: 5,
        min_checkins_per_session: 4,
        test_user_session_range: Some((3, 50)),
        test_cap: Some(200),
        cap_sampling: CapSampling::Chronological,
    };

    let sessions = sessionize(&dataset.checkins, spec.delta_t_seconds);
    println!("sessionized into {} trajectories (delta-t 72 h)", sessions.len());

    let kept = filter_sessions(&sessions, &spec);
    println!("{} trajectories survive the per-user/per-session minimums", kept.len());

    let splits = split(&kept, &spec)?;
    let m = &splits.manifest;
    println!(
        "split {} -> {} train / {} validation / {} test",
        m.total, m.train, m.validation_final, m.test_final
    );
    println!(
        "prune trail: validation {} -> {}, test {} -> {} (unseen entities) -> {} (session range)",
        m.validation_sliced, m.validation_final, m.test_sliced, m.test_after_prune, m.test_after_range
    );

    // The invariant the pruning buys: evaluation never sees a user or POI
    // absent from training.
    let train_users: BTreeSet<u64> = splits.train.iter().map(|t| t.user_id).collect();
    let train_pois: BTreeSet<u64> = splits
        .train
        .iter()
        .flat_map(|t| t.checkins.iter().map(|c| c.poi_id))
        .collect();
    for t in splits.validation.iter().chain(&splits.test) {
        assert!(train_users.contains(&t.user_id));
        assert!(t.checkins.iter().all(|c| train_pois.contains(&c.poi_id)));
    }
    println!("checked: every held-out user and POI appears in train");
    Ok(())
}
