//! Deterministic synthetic check-in corpora.
//!
//! Fixtures, examples, and benchmarks all need realistic-looking data that
//! is a pure function of a seed: twenty users with favorite venues, bursty
//! sessions a few days apart, and a tail of sessions ending in a revisit so
//! next-POI prediction has signal. A few venues sit north of the metro
//! boundary fixture and a few users check in too rarely to survive the
//! default filters, so the cleaning stages have something to do.

use std::path::Path;

use chrono::{Duration, TimeZone, Utc};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{CheckIn, RawCheckIn};
use crate::sessionize::Trajectory;

pub const SYNTH_CATEGORIES: [&str; 12] = [
    "Coffee Shop",
    "Bar",
    "Gym / Fitness Center",
    "Subway",
    "Office",
    "Park",
    "Home (private)",
    "Food & Drink Shop",
    "Italian Restaurant",
    "Bookstore",
    "Movie Theater",
    "Grocery Store",
];

struct Venue {
    key: String,
    category_key: String,
    category_name: String,
    lat: f64,
    lon: f64,
}

/// Keep coordinates at six decimals so the TSV rendering is lossless.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn venues(rng: &mut ChaCha8Rng) -> Vec<Venue> {
    let mut out = Vec::with_capacity(48);
    let mut push = |i: usize, lat: f64, lon: f64| {
        let cat = i % SYNTH_CATEGORIES.len();
        out.push(Venue {
            key: format!("v{i:02}"),
            category_key: format!("c{cat:02}"),
            category_name: SYNTH_CATEGORIES[cat].to_string(),
            lat: round6(lat),
            lon: round6(lon),
        });
    };
    for i in 0..45 {
        push(
            i,
            40.58 + rng.gen_range(0.0..0.30),
            -74.05 + rng.gen_range(0.0..0.40),
        );
    }
    // North of the metro boundary fixture; culled when filtering is on.
    for i in 45..48 {
        push(
            i,
            41.15 + rng.gen_range(0.0..0.15),
            -73.90 + rng.gen_range(0.0..0.20),
        );
    }
    out
}

/// Generate the twenty-user corpus. Sessions start 80 to 96 hours apart and
/// span under twelve, so any session gap of a day or more recovers them
/// exactly. Users 17..19 get too few sessions for the default filters and
/// users 3 and 10 favor the out-of-boundary venues.
pub fn synthetic_raw_checkins(seed: u64) -> Vec<RawCheckIn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let venues = venues(&mut rng);
    let base = Utc.with_ymd_and_hms(2012, 4, 3, 18, 0, 0).unwrap();
    let mut out = Vec::new();
    for user in 0..20u32 {
        let fav_count = rng.gen_range(6..=12);
        let mut favorites: Vec<usize> =
            rand::seq::index::sample(&mut rng, 45, fav_count).into_vec();
        if user == 3 {
            favorites.push(45);
        }
        if user == 10 {
            favorites.push(46);
            favorites.push(47);
        }
        let sessions = if user >= 17 {
            rng.gen_range(2..=4)
        } else {
            rng.gen_range(6..=10)
        };
        let mut t = base + Duration::hours(user as i64);
        for _ in 0..sessions {
            let len = rng.gen_range(3..=8);
            let mut session_pois: Vec<usize> = Vec::new();
            for j in 0..len {
                let venue_idx = if j == len - 1 && rng.gen_bool(0.4) {
                    session_pois[rng.gen_range(0..session_pois.len())]
                } else {
                    favorites[rng.gen_range(0..favorites.len())]
                };
                session_pois.push(venue_idx);
                let v = &venues[venue_idx];
                out.push(RawCheckIn {
                    user_key: format!("u{user:02}"),
                    poi_key: v.key.clone(),
                    category_key: v.category_key.clone(),
                    category_name: v.category_name.clone(),
                    latitude: v.lat,
                    longitude: v.lon,
                    timestamp: t,
                });
                t += Duration::minutes(rng.gen_range(10..=90));
            }
            t += Duration::hours(rng.gen_range(80..=96));
        }
    }
    out
}

/// Render rows in the eight-column tab-separated layout the ingester reads:
/// user, venue, category id, category name, lat, lon, UTC offset, time.
pub fn render_foursquare_tsv(rows: &[RawCheckIn]) -> String {
    let mut text = String::new();
    for r in rows {
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t0\t{}\n",
            r.user_key,
            r.poi_key,
            r.category_key,
            r.category_name,
            r.latitude,
            r.longitude,
            r.timestamp.format("%a %b %d %H:%M:%S %z %Y"),
        ));
    }
    text
}

/// Write the synthetic corpus as a check-in TSV; returns the row count.
pub fn write_synthetic_foursquare_tsv(path: &Path, seed: u64) -> Result<usize> {
    let rows = synthetic_raw_checkins(seed);
    std::fs::write(path, render_foursquare_tsv(&rows)).map_err(|e| Error::io(path, e))?;
    Ok(rows.len())
}

/// Fixed-length random-walk trajectories for distance benchmarks: `count`
/// trajectories of exactly `len` points each, hourly steps, one synthetic
/// user per trajectory.
pub fn synthetic_trajectories(seed: u64, count: usize, len: usize) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = Utc.with_ymd_and_hms(2012, 4, 3, 18, 0, 0).unwrap();
    (0..count)
        .map(|i| {
            let mut lat = 40.7 + rng.gen_range(-0.1..0.1);
            let mut lon = -74.0 + rng.gen_range(-0.1..0.1);
            let checkins: Vec<CheckIn> = (0..len)
                .map(|j| {
                    lat += rng.gen_range(-0.01..0.01);
                    lon += rng.gen_range(-0.01..0.01);
                    CheckIn {
                        user_id: i as u64,
                        poi_id: rng.gen_range(0..500),
                        category_id: 0,
                        category_name: "Synthetic".into(),
                        latitude: lat,
                        longitude: lon,
                        timestamp: base + Duration::hours((i * len + j) as i64),
                    }
                })
                .collect();
            Trajectory::from_checkins(i as u64, i as u64, checkins)
        })
        .collect()
}
