//! Raw check-in parsing and geographic filtering.
//!
//! Three input layouts are supported (see `docs/datasets.md`):
//!
//! * `foursquare_tsv` - tab-separated: user_id, venue_id, venue_category_id,
//!   venue_category_name, latitude, longitude, timezone_offset_minutes,
//!   utc_time (`EEE MMM dd HH:mm:ss Z yyyy`). Latin-1 is tolerated as a
//!   fallback encoding, matching the public dump.
//! * `gowalla_csv` - comma-separated: user_id, location_id, category_id,
//!   category_name, latitude, longitude, checkin_time (RFC 3339).
//! * `global_tsv` - tab-separated: user_id, venue_id, category_id,
//!   category_name, latitude, longitude, utc_time (RFC 3339).
//!
//! Parsed rows are normalized into a [`Dataset`] with dense, contiguous ids
//! assigned by first appearance in chronological order. The original string
//! keys are preserved in the index maps for provenance.

pub mod boundary;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boundary::BoundaryPolygon;

/// One normalized LBSN check-in record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckIn {
    pub user_id: u64,
    pub poi_id: u64,
    pub category_id: u64,
    pub category_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub timestamp: DateTime<Utc>,
}

/// Input file layouts accepted by [`parse_checkin_file`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckinFormat {
    FoursquareTsv,
    GowallaCsv,
    GlobalTsv,
}

impl fmt::Display for CheckinFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckinFormat::FoursquareTsv => "foursquare_tsv",
            CheckinFormat::GowallaCsv => "gowalla_csv",
            CheckinFormat::GlobalTsv => "global_tsv",
        };
        f.write_str(s)
    }
}

/// A parsed row before dense ids are assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCheckIn {
    pub user_key: String,
    pub poi_key: String,
    pub category_key: String,
    pub category_name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub timestamp: DateTime<Utc>,
}

/// Normalized dataset with dense id maps.
///
/// `checkins` are sorted by `(timestamp, user_id)`; dense ids are contiguous
/// `0..U` and `0..M`, assigned by first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub checkins: Vec<CheckIn>,
    pub user_index: BTreeMap<String, u64>,
    pub poi_index: BTreeMap<String, u64>,
    pub category_index: BTreeMap<String, u64>,
    /// Count of unique POIs.
    pub m: u64,
    /// Count of unique users.
    pub u: u64,
}

/// Row statistics from a parse run. Malformed rows are counted, never
/// silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub total_rows: usize,
    pub parsed_rows: usize,
    pub malformed_rows: usize,
    /// Up to ten `(line_number, reason)` samples for diagnostics.
    pub malformed_samples: Vec<(usize, String)>,
}

/// Result of [`parse_checkin_file`]: the dataset plus row statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDataset {
    pub dataset: Dataset,
    pub report: ParseReport,
}

impl Dataset {
    /// Build a dataset from raw rows: sort chronologically, assign dense ids
    /// by first appearance, then order by `(timestamp, user_id)`.
    pub fn from_raw(mut rows: Vec<RawCheckIn>) -> Dataset {
        rows.sort_by(|a, b| {
            (a.timestamp, &a.user_key, &a.poi_key).cmp(&(b.timestamp, &b.user_key, &b.poi_key))
        });

        let mut user_index = BTreeMap::new();
        let mut poi_index = BTreeMap::new();
        let mut category_index = BTreeMap::new();
        let mut checkins = Vec::with_capacity(rows.len());
        for row in &rows {
            let next_user = user_index.len() as u64;
            let user_id = *user_index.entry(row.user_key.clone()).or_insert(next_user);
            let next_poi = poi_index.len() as u64;
            let poi_id = *poi_index.entry(row.poi_key.clone()).or_insert(next_poi);
            let next_cat = category_index.len() as u64;
            let category_id = *category_index
                .entry(row.category_key.clone())
                .or_insert(next_cat);
            checkins.push(CheckIn {
                user_id,
                poi_id,
                category_id,
                category_name: row.category_name.clone(),
                latitude: row.latitude,
                longitude: row.longitude,
                timestamp: row.timestamp,
            });
        }
        // Ties at the same timestamp are ordered by dense user id.
        checkins.sort_by_key(|c| (c.timestamp, c.user_id, c.poi_id));

        Dataset {
            m: poi_index.len() as u64,
            u: user_index.len() as u64,
            checkins,
            user_index,
            poi_index,
            category_index,
        }
    }

    /// Reconstruct raw rows using the preserved string keys.
    pub fn to_raw(&self) -> Vec<RawCheckIn> {
        let users = invert(&self.user_index);
        let pois = invert(&self.poi_index);
        let cats = invert(&self.category_index);
        self.checkins
            .iter()
            .map(|c| RawCheckIn {
                user_key: users[&c.user_id].clone(),
                poi_key: pois[&c.poi_id].clone(),
                category_key: cats[&c.category_id].clone(),
                category_name: c.category_name.clone(),
                latitude: c.latitude,
                longitude: c.longitude,
                timestamp: c.timestamp,
            })
            .collect()
    }

    /// First observed category name per dense POI id.
    pub fn poi_categories(&self) -> BTreeMap<u64, String> {
        let mut out = BTreeMap::new();
        for c in &self.checkins {
            out.entry(c.poi_id).or_insert_with(|| c.category_name.clone());
        }
        out
    }
}

fn invert(map: &BTreeMap<String, u64>) -> BTreeMap<u64, String> {
    map.iter().map(|(k, v)| (*v, k.clone())).collect()
}

/// Parse a raw check-in file into a normalized [`Dataset`].
///
/// Aborts with a format-mismatch error when more than 10% of non-empty rows
/// are malformed, or when no row parses at all.
pub fn parse_checkin_file(path: &Path, format: CheckinFormat) -> Result<ParsedDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let content = decode(path, bytes, format)?;
    parse_checkin_str(&content, format).map_err(|e| match e {
        // Attach the offending path to threshold failures.
        Error::FormatMismatch {
            parsed,
            total,
            malformed,
            ..
        } => Error::FormatMismatch {
            path: path.to_path_buf(),
            parsed,
            total,
            malformed,
        },
        other => other,
    })
}

fn decode(path: &Path, bytes: Vec<u8>, format: CheckinFormat) -> Result<String> {
    match String::from_utf8(bytes) {
        Ok(s) => Ok(s),
        Err(e) if format == CheckinFormat::FoursquareTsv => {
            // Latin-1 fallback: every byte maps to the code point of the
            // same value.
            Ok(e.into_bytes().iter().map(|&b| b as char).collect())
        }
        Err(_) => Err(Error::Encoding {
            path: path.to_path_buf(),
        }),
    }
}

/// In-memory variant of [`parse_checkin_file`]; used directly by tests and
/// fuzzing.
pub fn parse_checkin_str(content: &str, format: CheckinFormat) -> Result<ParsedDataset> {
    let mut rows = Vec::new();
    let mut report = ParseReport {
        total_rows: 0,
        parsed_rows: 0,
        malformed_rows: 0,
        malformed_samples: Vec::new(),
    };

    match format {
        CheckinFormat::FoursquareTsv | CheckinFormat::GlobalTsv => {
            for (idx, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                report.total_rows += 1;
                match parse_tsv_row(line, format) {
                    Ok(row) => {
                        report.parsed_rows += 1;
                        rows.push(row);
                    }
                    Err(reason) => record_malformed(&mut report, idx + 1, reason),
                }
            }
        }
        CheckinFormat::GowallaCsv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .flexible(true)
                .from_reader(content.as_bytes());
            for (idx, record) in reader.records().enumerate() {
                report.total_rows += 1;
                let outcome = match record {
                    Ok(rec) => parse_gowalla_record(&rec),
                    Err(e) => Err(format!("csv: {e}")),
                };
                match outcome {
                    Ok(row) => {
                        report.parsed_rows += 1;
                        rows.push(row);
                    }
                    Err(reason) => record_malformed(&mut report, idx + 1, reason),
                }
            }
        }
    }

    if report.parsed_rows == 0 || report.malformed_rows * 10 > report.total_rows {
        return Err(Error::FormatMismatch {
            path: Default::default(),
            parsed: report.parsed_rows,
            total: report.total_rows,
            malformed: report.malformed_rows,
        });
    }

    Ok(ParsedDataset {
        dataset: Dataset::from_raw(rows),
        report,
    })
}

fn record_malformed(report: &mut ParseReport, line: usize, reason: String) {
    report.malformed_rows += 1;
    if report.malformed_samples.len() < 10 {
        report.malformed_samples.push((line, reason));
    }
}

fn parse_tsv_row(line: &str, format: CheckinFormat) -> std::result::Result<RawCheckIn, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    let expected = match format {
        CheckinFormat::FoursquareTsv => 8,
        _ => 7,
    };
    if cols.len() != expected {
        return Err(format!("expected {expected} columns, got {}", cols.len()));
    }
    let latitude = parse_lat(cols[4])?;
    let longitude = parse_lon(cols[5])?;
    let timestamp = match format {
        CheckinFormat::FoursquareTsv => {
            // Validate the offset column even though the instant embedded in
            // utc_time already carries its own offset.
            cols[6]
                .trim()
                .parse::<i32>()
                .map_err(|_| format!("bad timezone offset {:?}", cols[6]))?;
            parse_foursquare_time(cols[7])?
        }
        _ => parse_rfc3339(cols[6])?,
    };
    Ok(RawCheckIn {
        user_key: cols[0].to_string(),
        poi_key: cols[1].to_string(),
        category_key: cols[2].to_string(),
        category_name: cols[3].to_string(),
        latitude,
        longitude,
        timestamp,
    })
}

fn parse_gowalla_record(rec: &csv::StringRecord) -> std::result::Result<RawCheckIn, String> {
    if rec.len() != 7 {
        return Err(format!("expected 7 columns, got {}", rec.len()));
    }
    Ok(RawCheckIn {
        user_key: rec[0].to_string(),
        poi_key: rec[1].to_string(),
        category_key: rec[2].to_string(),
        category_name: rec[3].to_string(),
        latitude: parse_lat(&rec[4])?,
        longitude: parse_lon(&rec[5])?,
        timestamp: parse_rfc3339(&rec[6])?,
    })
}

fn parse_lat(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad latitude {s:?}"))?;
    if !(-90.0..=90.0).contains(&v) || !v.is_finite() {
        return Err(format!("latitude {v} out of bounds"));
    }
    Ok(v)
}

fn parse_lon(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("bad longitude {s:?}"))?;
    if !(-180.0..=180.0).contains(&v) || !v.is_finite() {
        return Err(format!("longitude {v} out of bounds"));
    }
    Ok(v)
}

/// `EEE MMM dd HH:mm:ss Z yyyy`, e.g. `Tue Apr 03 18:00:09 +0000 2012`.
/// The embedded offset is normalized away so the stored instant is UTC.
fn parse_foursquare_time(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_str(s.trim(), "%a %b %d %H:%M:%S %z %Y")
        .map(|dt| dt.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {s:?}: {e}"))
}

fn parse_rfc3339(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|dt| dt.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp {s:?}: {e}"))
}

/// Keep only check-ins whose coordinates fall inside the polygon, then
/// re-densify the id maps.
pub fn filter_by_boundary(dataset: &Dataset, poly: &BoundaryPolygon) -> Result<Dataset> {
    poly.validate()?;
    let rows = dataset
        .to_raw()
        .into_iter()
        .filter(|r| poly.contains(r.latitude, r.longitude))
        .collect();
    Ok(Dataset::from_raw(rows))
}

/// Write the dataset as a check-in JSON-lines file plus an index sidecar.
pub fn write_dataset(dataset: &Dataset, jsonl_path: &Path, index_path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for c in &dataset.checkins {
        serde_json::to_writer(&mut out, c)?;
        out.push(b'\n');
    }
    std::fs::write(jsonl_path, out).map_err(|e| Error::io(jsonl_path, e))?;

    let sidecar = IndexSidecar {
        user_index: dataset.user_index.clone(),
        poi_index: dataset.poi_index.clone(),
        category_index: dataset.category_index.clone(),
        m: dataset.m,
        u: dataset.u,
    };
    let mut json = serde_json::to_vec_pretty(&sidecar)?;
    json.push(b'\n');
    std::fs::write(index_path, json).map_err(|e| Error::io(index_path, e))
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexSidecar {
    user_index: BTreeMap<String, u64>,
    poi_index: BTreeMap<String, u64>,
    category_index: BTreeMap<String, u64>,
    m: u64,
    u: u64,
}

/// Read a dataset written by [`write_dataset`].
pub fn read_dataset(jsonl_path: &Path, index_path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(jsonl_path).map_err(|e| Error::io(jsonl_path, e))?;
    let checkins = read_checkins_jsonl(std::io::BufReader::new(file))?;
    let index = std::fs::read_to_string(index_path).map_err(|e| Error::io(index_path, e))?;
    let sidecar: IndexSidecar = serde_json::from_str(&index)?;
    Ok(Dataset {
        checkins,
        user_index: sidecar.user_index,
        poi_index: sidecar.poi_index,
        category_index: sidecar.category_index,
        m: sidecar.m,
        u: sidecar.u,
    })
}

/// Parse check-in JSON lines from any reader.
pub fn read_checkins_jsonl<R: BufRead>(reader: R) -> Result<Vec<CheckIn>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Render check-ins to writer as JSON lines.
pub fn write_checkins_jsonl<W: Write>(mut writer: W, checkins: &[CheckIn]) -> Result<()> {
    for c in checkins {
        serde_json::to_writer(&mut writer, c).map_err(Error::from)?;
        writer.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    Ok(())
}

#[allow(dead_code)]
fn epoch() -> DateTime<Utc> {
    Utc.timestamp_opt(0, 0).unwrap()
}
