//! LLM-as-judge scoring of generated profiles.
//!
//! Each judge receives the profile summary inside a fixed four-criterion
//! rubric and must answer with binary scores as JSON. Multiple judges can
//! score the same profile; aggregation reports per-judge percentages so
//! single-model bias stays visible.
//!
//! One rubric line reads "Given the list of reviews" even though the
//! profiles here derive from check-ins, not reviews. The wording is kept
//! as-is deliberately; rephrasing it would silently change every judge
//! transcript.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::{ChatBackend, ChatRequest};
use crate::error::{Error, Result};
use crate::profiler::UserProfile;

/// Binary scores from one judge over one profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeScore {
    pub user_id: u64,
    pub judge_model: String,
    pub fluency: u8,
    pub informativeness: u8,
    pub conciseness: u8,
    pub relevance: u8,
}

/// Render the judging prompt around a profile summary.
pub fn build_judge_prompt(profile: &UserProfile) -> String {
    format!(
        "Given the following natural language (NL) user profile {}, you are to assess the user \
         profile based on four criteria:\n\
         - Fluency: Is the NL profile both syntactically and semantically correct?\n\
         - Informativeness: Does the NL profile provide important information for a user \
         profile?\n\
         - Conciseness: Is the NL profile written in a concise manner?\n\
         - Relevance: Given the list of reviews, is the NL profile relevant to the user?\n\
         Return your response in the JSON format: {{\"fluency\": 0/1, \"informativeness\": 0/1, \
         \"conciseness\": 0/1, \"relevance\": 0/1}}",
        profile.summary
    )
}

#[derive(Debug, Deserialize)]
struct JudgePayload {
    fluency: serde_json::Value,
    informativeness: serde_json::Value,
    conciseness: serde_json::Value,
    relevance: serde_json::Value,
}

fn binary(value: &serde_json::Value, field: &str) -> std::result::Result<u8, String> {
    match value.as_u64() {
        Some(v @ (0 | 1)) => Ok(v as u8),
        _ => Err(format!("{field} value {value} is not 0 or 1")),
    }
}

fn parse_score(raw: &str, user_id: u64, judge_model: &str) -> std::result::Result<JudgeScore, String> {
    let text = raw.trim().trim_start_matches("```json").trim_start_matches("```").trim_end_matches("```").trim();
    let payload: JudgePayload =
        serde_json::from_str(text).map_err(|e| format!("response is not the 4-key JSON: {e}"))?;
    Ok(JudgeScore {
        user_id,
        judge_model: judge_model.to_string(),
        fluency: binary(&payload.fluency, "fluency")?,
        informativeness: binary(&payload.informativeness, "informativeness")?,
        conciseness: binary(&payload.conciseness, "conciseness")?,
        relevance: binary(&payload.relevance, "relevance")?,
    })
}

/// Score one profile with one judge, retrying schema failures up to
/// `max_retries` attempts.
pub fn judge_profile(
    profile: &UserProfile,
    backend: &dyn ChatBackend,
    max_retries: u32,
) -> Result<JudgeScore> {
    assert!(max_retries >= 1);
    let req = ChatRequest::from_user(build_judge_prompt(profile)).json_mode(true);
    let mut last_error = String::new();
    for attempt in 1..=max_retries {
        let raw = backend.complete(&req)?;
        match parse_score(&raw, profile.user_id, backend.model()) {
            Ok(score) => return Ok(score),
            Err(e) => {
                log::warn!("judge {} attempt {attempt} rejected: {e}", backend.model());
                last_error = e;
            }
        }
    }
    Err(Error::HallucinationExhausted {
        attempts: max_retries,
        last_error,
    })
}

/// Per-metric percentages for one judge, each `100 x mean` rounded to two
/// decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeAggregate {
    pub judge_model: String,
    pub profiles: usize,
    pub fluency: f64,
    pub informativeness: f64,
    pub conciseness: f64,
    pub relevance: f64,
}

fn percent(ones: usize, n: usize) -> f64 {
    (ones as f64 * 100.0 / n as f64 * 100.0).round() / 100.0
}

/// Aggregate scores grouped by judge model, ordered by model name.
pub fn aggregate_judge_scores(scores: &[JudgeScore]) -> Result<Vec<JudgeAggregate>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("judge scores"));
    }
    let mut by_judge: BTreeMap<&str, Vec<&JudgeScore>> = BTreeMap::new();
    for s in scores {
        by_judge.entry(&s.judge_model).or_default().push(s);
    }
    Ok(by_judge
        .into_iter()
        .map(|(judge_model, rows)| {
            let n = rows.len();
            let sum = |f: fn(&JudgeScore) -> u8| rows.iter().map(|r| f(r) as usize).sum::<usize>();
            JudgeAggregate {
                judge_model: judge_model.to_string(),
                profiles: n,
                fluency: percent(sum(|r| r.fluency), n),
                informativeness: percent(sum(|r| r.informativeness), n),
                conciseness: percent(sum(|r| r.conciseness), n),
                relevance: percent(sum(|r| r.relevance), n),
            }
        })
        .collect())
}

/// One Markdown section per judge, metric rows to two decimals.
pub fn aggregates_to_markdown(aggregates: &[JudgeAggregate]) -> String {
    let mut out = String::from("# Profile validation by LLM judges\n");
    for agg in aggregates {
        out.push_str(&format!(
            "\n## Judge: {} ({} profiles)\n\n| Metric | Score |\n|---|---|\n",
            agg.judge_model, agg.profiles
        ));
        for (name, value) in [
            ("Fluency", agg.fluency),
            ("Informativeness", agg.informativeness),
            ("Conciseness", agg.conciseness),
            ("Relevance", agg.relevance),
        ] {
            out.push_str(&format!("| {name} | {value:.2} |\n"));
        }
    }
    out
}

/// Write scores as JSON lines.
pub fn write_scores_jsonl(path: &std::path::Path, scores: &[JudgeScore]) -> Result<()> {
    let mut out = Vec::new();
    for s in scores {
        serde_json::to_writer(&mut out, s)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read scores written by [`write_scores_jsonl`].
pub fn read_scores_jsonl(path: &std::path::Path) -> Result<Vec<JudgeScore>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
