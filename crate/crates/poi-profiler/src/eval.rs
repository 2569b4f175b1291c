//! Prediction parsing, accuracy, cold-start grouping, and shift reports.
//!
//! Model output is free text; the only thing we trust is the first integer
//! after the literal `POI id`, and only when it falls inside the known POI
//! range. Everything downstream (accuracy, cold-start slices, preference
//! shift counts) works off [`PredictionRecord`]s so a stored prediction run
//! can be re-scored without touching a backend.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backend::{ChatBackend, ChatMessage, ChatRequest};
use crate::error::{Error, Result};
use crate::promptgen::SFTExample;

/// One scored model answer for one SFT example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub example_id: u64,
    pub user_id: u64,
    pub raw_output: String,
    pub parsed_poi_id: Option<u64>,
    pub expected_poi_id: u64,
    pub correct: bool,
}

/// Extract the predicted POI id from raw model output: the first integer
/// after the first literal `POI id`, accepted only inside `0..m`. Anything
/// else (no marker, no digits, out of range) is an unparsable answer.
pub fn parse_prediction(raw: &str, m: u64) -> Option<u64> {
    let rest = &raw[raw.find("POI id")? + "POI id".len()..];
    let digits: String = rest
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    let id: u64 = digits.parse().ok()?;
    (id < m).then_some(id)
}

/// Ask the backend to answer every example and score the replies. The
/// request carries the example's system prompt (when non-empty) and its
/// input prompt; the target never leaves this process.
pub fn run_predictions(
    examples: &[SFTExample],
    backend: &dyn ChatBackend,
    m: u64,
) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::with_capacity(examples.len());
    for ex in examples {
        let mut messages = Vec::new();
        if !ex.system_prompt.is_empty() {
            messages.push(ChatMessage::system(&ex.system_prompt));
        }
        messages.push(ChatMessage::user(&ex.input_prompt));
        let request = ChatRequest {
            messages,
            temperature: 0.0,
            max_tokens: 128,
            json_mode: false,
        };
        let raw_output = backend.complete(&request)?;
        let parsed_poi_id = parse_prediction(&raw_output, m);
        records.push(PredictionRecord {
            example_id: ex.example_id,
            user_id: ex.user_id,
            raw_output,
            parsed_poi_id,
            expected_poi_id: ex.next_poi_id,
            correct: parsed_poi_id == Some(ex.next_poi_id),
        });
    }
    Ok(records)
}

/// Fraction of records whose parsed answer equals the expected POI.
pub fn accuracy_at_1(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("prediction records"));
    }
    let correct = records.iter().filter(|r| r.correct).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Users split into thirds-ish by activity: with `U` users and
/// `k = floor(0.3 * U)`, the `k` least active are `inactive`, the `k` most
/// active are `very_active`, and the rest are `normal`. Ties on activity
/// break by user id, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityGrouping {
    pub inactive: Vec<u64>,
    pub normal: Vec<u64>,
    pub very_active: Vec<u64>,
}

impl ActivityGrouping {
    pub fn group_of(&self, user_id: u64) -> Option<&'static str> {
        if self.inactive.contains(&user_id) {
            Some("inactive")
        } else if self.normal.contains(&user_id) {
            Some("normal")
        } else if self.very_active.contains(&user_id) {
            Some("very_active")
        } else {
            None
        }
    }
}

/// Group users by an activity count (typically training check-ins).
pub fn group_users_by_activity(counts: &BTreeMap<u64, usize>) -> ActivityGrouping {
    let mut order: Vec<(usize, u64)> = counts.iter().map(|(u, c)| (*c, *u)).collect();
    order.sort();
    let k = order.len() * 3 / 10;
    let ids = |s: &[(usize, u64)]| s.iter().map(|&(_, u)| u).collect::<Vec<_>>();
    ActivityGrouping {
        inactive: ids(&order[..k]),
        normal: ids(&order[k..order.len() - k]),
        very_active: ids(&order[order.len() - k..]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAccuracy {
    pub users: usize,
    pub predictions: usize,
    pub correct: usize,
    pub acc_at_1: f64,
}

/// Accuracy per activity group. Groups with no predictions are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdStartReport {
    pub overall_acc_at_1: f64,
    pub groups: BTreeMap<String, GroupAccuracy>,
}

pub fn cold_start_report(
    records: &[PredictionRecord],
    grouping: &ActivityGrouping,
) -> Result<ColdStartReport> {
    let overall = accuracy_at_1(records)?;
    let mut tallies: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    for r in records {
        let group = grouping
            .group_of(r.user_id)
            .ok_or(Error::UnmappedUser(r.user_id))?;
        let t = tallies.entry(group).or_insert((0, 0));
        t.0 += 1;
        t.1 += r.correct as usize;
    }
    let user_count = |group: &str| match group {
        "inactive" => grouping.inactive.len(),
        "very_active" => grouping.very_active.len(),
        _ => grouping.normal.len(),
    };
    let groups = tallies
        .into_iter()
        .map(|(g, (n, correct))| {
            let acc = GroupAccuracy {
                users: user_count(g),
                predictions: n,
                correct,
                acc_at_1: correct as f64 / n as f64,
            };
            (g.to_string(), acc)
        })
        .collect();
    Ok(ColdStartReport {
        overall_acc_at_1: overall,
        groups,
    })
}

pub fn cold_start_to_markdown(report: &ColdStartReport) -> String {
    let mut out = String::from("## Accuracy by activity group\n\n");
    out.push_str(&format!("Overall Acc@1: {:.4}\n\n", report.overall_acc_at_1));
    out.push_str("| Group | Users | Predictions | Correct | Acc@1 |\n");
    out.push_str("| --- | --- | --- | --- | --- |\n");
    for (name, g) in &report.groups {
        out.push_str(&format!(
            "| {name} | {} | {} | {} | {:.4} |\n",
            g.users, g.predictions, g.correct, g.acc_at_1
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryShift {
    pub before: u64,
    pub after: u64,
    pub delta: i64,
}

/// How often each category was predicted before and after an intervention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryShiftReport {
    pub categories: BTreeMap<String, CategoryShift>,
}

/// Compare two prediction runs over the same examples. Counts are per
/// predicted POI's category; unparsable answers count toward nothing, and
/// parsed ids missing from the category map land in `(unknown)`.
pub fn category_shift_report(
    before: &[PredictionRecord],
    after: &[PredictionRecord],
    poi_categories: &BTreeMap<u64, String>,
) -> Result<CategoryShiftReport> {
    let ids = |rs: &[PredictionRecord]| {
        let mut v: Vec<u64> = rs.iter().map(|r| r.example_id).collect();
        v.sort_unstable();
        v
    };
    if ids(before) != ids(after) {
        return Err(Error::ExampleIdMismatch);
    }
    let tally = |rs: &[PredictionRecord]| {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for poi in rs.iter().filter_map(|r| r.parsed_poi_id) {
            let cat = poi_categories
                .get(&poi)
                .cloned()
                .unwrap_or_else(|| "(unknown)".into());
            *counts.entry(cat).or_insert(0) += 1;
        }
        counts
    };
    let before_counts = tally(before);
    let after_counts = tally(after);
    let mut categories = BTreeMap::new();
    for name in before_counts.keys().chain(after_counts.keys()) {
        if categories.contains_key(name) {
            continue;
        }
        let b = before_counts.get(name).copied().unwrap_or(0);
        let a = after_counts.get(name).copied().unwrap_or(0);
        categories.insert(
            name.clone(),
            CategoryShift {
                before: b,
                after: a,
                delta: a as i64 - b as i64,
            },
        );
    }
    Ok(CategoryShiftReport { categories })
}

pub fn shift_to_markdown(report: &CategoryShiftReport) -> String {
    let mut out = String::from("## Prediction counts by category\n\n");
    out.push_str("| Category | Before | After | Delta |\n");
    out.push_str("| --- | --- | --- | --- |\n");
    for (name, s) in &report.categories {
        out.push_str(&format!(
            "| {name} | {} | {} | {:+} |\n",
            s.before, s.after, s.delta
        ));
    }
    out
}

pub fn write_predictions_jsonl(records: &[PredictionRecord], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_predictions_jsonl(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
