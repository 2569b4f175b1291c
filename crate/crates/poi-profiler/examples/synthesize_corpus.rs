//! Generate the bundled synthetic check-in corpus from scratch: 20 users
//! with favorite venues, session-shaped visit bursts, deliberate revisits,
//! and a few out-of-boundary venues for the geographic filter to cull.
//!
//! Run with: cargo run --example synthesize_corpus

use poi_profiler::ingest::{parse_checkin_file, CheckinFormat};
use poi_profiler::sessionize::sessionize;
use poi_profiler::synth::write_synthetic_foursquare_tsv;

fn main() -> poi_profiler::Result<()> {
    let path = std::env::temp_dir().join("synthetic_checkins.tsv");
    let rows = write_synthetic_foursquare_tsv(&path, 7)?;
    println!("wrote {rows} check-ins to {}", path.display());

    let content = std::fs::read_to_string(&path).expect("read back");
    println!("\nfirst rows:");
    for line in content.lines().take(3) {
        println!("  {line}");
    }

    let parsed = parse_checkin_file(&path, CheckinFormat::FoursquareTsv)?;
    println!(
        "\nround-trip: {} users, {} venues, {} categories",
        parsed.dataset.u,
        parsed.dataset.m,
        parsed.dataset.poi_categories().len()
    );

    // The generator spaces check-ins minutes apart inside a session and
    // leaves multi-day gaps between sessions, so sessionization recovers
    // the generated bursts under both common delta-t choices.
    for hours in [24, 72] {
        let sessions = sessionize(&parsed.dataset.checkins, hours * 3600);
        let lens: Vec<usize> = sessions.iter().map(|s| s.len()).collect();
        println!(
            "delta-t {hours:>2} h: {} sessions, lengths {}..{}",
            sessions.len(),
            lens.iter().min().unwrap(),
            lens.iter().max().unwrap()
        );
    }
    Ok(())
}
