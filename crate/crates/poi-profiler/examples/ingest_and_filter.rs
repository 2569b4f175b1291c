//! Parse a raw check-in TSV, inspect the parse report, and clip the
//! dataset to a GeoJSON boundary polygon.
//!
//! Run with: cargo run --example ingest_and_filter

use std::path::Path;

use poi_profiler::ingest::{filter_by_boundary, parse_checkin_file, BoundaryPolygon, CheckinFormat};

fn main() -> poi_profiler::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");

    let parsed = parse_checkin_file(
        &fixtures.join("checkins_20users.tsv"),
        CheckinFormat::FoursquareTsv,
    )?;
    let report = &parsed.report;
    println!(
        "parsed {} rows: {} kept, {} malformed",
        report.total_rows, report.parsed_rows, report.malformed_rows
    );
    println!(
        "dataset: {} users, {} POIs, {} categories",
        parsed.dataset.u,
        parsed.dataset.m,
        parsed.dataset.poi_categories().len()
    );

    // Venue ids are densified on parse: every POI id sits in 0..m.
    let max_poi = parsed.dataset.checkins.iter().map(|c| c.poi_id).max().unwrap();
    assert!(max_poi < parsed.dataset.m);

    let boundary = BoundaryPolygon::from_geojson_file(&fixtures.join("boundary.geojson"))?;
    let (min_lat, min_lon, max_lat, max_lon) = boundary.bbox();
    println!("boundary bbox: lat {min_lat}..{max_lat}, lon {min_lon}..{max_lon}");

    let clipped = filter_by_boundary(&parsed.dataset, &boundary)?;
    println!(
        "after clipping: {} of {} check-ins, {} POIs (ids re-densified)",
        clipped.checkins.len(),
        parsed.dataset.checkins.len(),
        clipped.m
    );
    Ok(())
}
