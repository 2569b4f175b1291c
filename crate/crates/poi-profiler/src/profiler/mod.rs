//! Natural-language user profiles derived from check-in histories.
//!
//! A profile bundles five Big Five Inventory trait labels, four demographic
//! attribute classes, free-text preference and routine lists, and a roughly
//! 200-word summary. The generation prompt asks a chat backend for all of
//! it as one JSON object; responses are parsed, validated against the
//! closed vocabularies, and retried on schema violations, which in practice
//! are rare and transient.

pub mod store;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::backend::{ChatBackend, ChatRequest};
use crate::error::{Error, Result};
use crate::ingest::CheckIn;
use crate::sessionize::Trajectory;

/// Timestamp rendering used in every prompt.
pub const PROMPT_TIME_FORMAT: &str = "%Y-%m-%d %H:%M";

/// Allowed values per BFI axis, in axis order: extroversion, agreeableness,
/// conscientiousness, neuroticism, openness.
pub const TRAIT_VALUES: [[&str; 2]; 5] = [
    ["extroverted", "introverted"],
    ["agreeable", "antagonistic"],
    ["conscientious", "unconscientious"],
    ["neurotic", "emotionally stable"],
    ["open to experience", "closed to experience"],
];

/// Allowed values per attribute axis: age class, gender, education,
/// socioeconomic level.
pub const ATTRIBUTE_VALUES: [&[&str]; 4] = [
    &["child", "adolescent", "adult", "older adult"],
    &["male", "female"],
    &["some schooling", "high school", "college & beyond"],
    &["lower", "middle", "upper"],
];

pub const TRAIT_AXES: [&str; 5] = [
    "Extroversion",
    "Agreeableness",
    "Conscientiousness",
    "Neuroticism",
    "Openness",
];

pub const ATTRIBUTE_AXES: [&str; 4] = ["Age", "Gender", "Education", "SocioEco"];

/// A validated profile. `traits` and `attributes` hold canonical lowercase
/// values from the vocabularies above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: u64,
    pub traits: Vec<String>,
    pub attributes: Vec<String>,
    pub preferences: Vec<String>,
    pub routines: Vec<String>,
    pub summary: String,
    pub generated_at: DateTime<Utc>,
    pub source_model: String,
}

/// Decoding options for profile-generation calls. Defaults follow the
/// conservative choice: temperature 0, JSON mode on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    pub temperature: f64,
    pub max_tokens: u32,
    pub json_mode: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            temperature: 0.0,
            max_tokens: 1024,
            json_mode: true,
        }
    }
}

/// The check-in record sentence used verbatim in both the profile prompt
/// and the trajectory block of SFT examples.
pub fn checkin_sentence(c: &CheckIn) -> String {
    format!(
        "At {}, user {} visited POI id {} which is a/an {} with category id {}.",
        c.timestamp.format(PROMPT_TIME_FORMAT),
        c.user_id,
        c.poi_id,
        c.category_name,
        c.category_id
    )
}

/// Render the profile-generation prompt for one user's trajectory history.
/// Check-ins appear once each, in chronological order, after the fixed
/// instruction text.
pub fn build_profile_prompt(user_id: u64, history: &[Trajectory]) -> Result<String> {
    let mut checkins: Vec<&CheckIn> = history.iter().flat_map(|t| t.checkins.iter()).collect();
    if checkins.is_empty() {
        return Err(Error::EmptyHistory(user_id));
    }
    debug_assert!(history.iter().all(|t| t.user_id == user_id));
    checkins.sort_by_key(|c| c.timestamp);
    let records: Vec<String> = checkins.into_iter().map(checkin_sentence).collect();

    Ok(format!(
        "Given the following check-ins of user {user_id}, generate a 200-word user profile \
         summary to be used as a system prompt to another LLM that simulates this person's \
         behavior, preferences, routines, hobbies, schedule, etc. Predict this user's Big Five \
         Inventory traits: (1) extroverted / introverted, (2) agreeable / antagonistic, (3) \
         conscientious / unconscientious, (4) neurotic / emotionally stable, (5) open / closed \
         to experience. Also predict their age: child (<13) / adolescent (13-17) / adult \
         (18-64) / older adult (>64); their gender: male / female; their educational \
         background: some schooling / high school / college & beyond; and their socioeconomic \
         level: lower / middle / upper. Also include any patterns that is observed and POI IDs \
         of important places that might be visited in the future in the user profile summary. \
         This system prompt will be used to make future check-in predictions. Return your \
         response in JSON format: {{\"traits\": [trait1, trait2, trait3, trait4, trait5], \
         \"attributes\": [age, gender, edu, socioeco], \"preferences\": [preference1, \
         preference2, preference3, ...], \"routines\": [routine1, routine2, routine3, ...], \
         \"user_profile\": \"200-word user profile summary\"}} {}",
        records.join(" ")
    ))
}

/// Raw LLM payload before validation: the five schema keys, nothing else
/// required.
#[derive(Debug, Deserialize)]
struct ProfilePayload {
    traits: Vec<String>,
    attributes: Vec<String>,
    preferences: Vec<String>,
    routines: Vec<String>,
    user_profile: String,
}

/// Strip Markdown code fences some models wrap around JSON.
fn strip_fences(raw: &str) -> &str {
    let trimmed = raw.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let body = rest.split_once('\n').map(|(_, b)| b).unwrap_or(rest);
    body.trim().strip_suffix("```").unwrap_or(body).trim()
}

fn parse_payload(raw: &str) -> std::result::Result<ProfilePayload, String> {
    let text = strip_fences(raw);
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("response is not JSON: {e}"))?;
    let obj = value
        .as_object()
        .ok_or_else(|| "response is not a JSON object".to_string())?;
    for key in ["traits", "attributes", "preferences", "routines", "user_profile"] {
        if !obj.contains_key(key) {
            return Err(format!("missing key {key:?}"));
        }
    }
    serde_json::from_value(value).map_err(|e| format!("schema mismatch: {e}"))
}

fn canonicalize(value: &str, allowed: &[&str], field: &str) -> std::result::Result<String, String> {
    let norm = value.trim().to_lowercase();
    allowed
        .iter()
        .find(|a| **a == norm)
        .map(|a| a.to_string())
        .ok_or_else(|| format!("{field} value {value:?} invalid; expected one of {allowed:?}"))
}

/// Validate a payload and canonicalize its closed-vocabulary fields.
/// Matching is case-insensitive with surrounding whitespace ignored. The
/// error message names the first offending field.
fn validate_payload(
    payload: ProfilePayload,
    user_id: u64,
    generated_at: DateTime<Utc>,
    source_model: &str,
) -> std::result::Result<UserProfile, String> {
    if payload.traits.len() != 5 {
        return Err(format!("traits must have exactly 5 entries, got {}", payload.traits.len()));
    }
    if payload.attributes.len() != 4 {
        return Err(format!(
            "attributes must have exactly 4 entries, got {}",
            payload.attributes.len()
        ));
    }
    let mut traits = Vec::with_capacity(5);
    for (i, value) in payload.traits.iter().enumerate() {
        traits.push(canonicalize(value, &TRAIT_VALUES[i], &format!("traits[{i}]"))?);
    }
    let mut attributes = Vec::with_capacity(4);
    for (i, value) in payload.attributes.iter().enumerate() {
        attributes.push(canonicalize(value, ATTRIBUTE_VALUES[i], &format!("attributes[{i}]"))?);
    }
    let summary = payload.user_profile.trim().to_string();
    if summary.is_empty() {
        return Err("user_profile is empty".into());
    }
    let words = summary.split_whitespace().count();
    if !(50..=400).contains(&words) {
        // Advisory band around the 200-word target; keep the profile.
        log::warn!("user {user_id}: summary has {words} words, outside the 50-400 band");
    }
    Ok(UserProfile {
        user_id,
        traits,
        attributes,
        preferences: payload.preferences,
        routines: payload.routines,
        summary,
        generated_at,
        source_model: source_model.to_string(),
    })
}

/// Generate one user's profile, retrying schema failures up to
/// `max_retries` attempts. Transport errors abort immediately; only
/// parse/validation failures are retried. Returns the profile and the
/// number of attempts consumed.
pub fn generate_profile(
    user_id: u64,
    history: &[Trajectory],
    backend: &dyn ChatBackend,
    max_retries: u32,
    opts: GenOptions,
    generated_at: DateTime<Utc>,
) -> Result<(UserProfile, u32)> {
    assert!(max_retries >= 1);
    let prompt = build_profile_prompt(user_id, history)?;
    let mut req = ChatRequest::from_user(prompt).json_mode(opts.json_mode);
    req.temperature = opts.temperature;
    req.max_tokens = opts.max_tokens;

    let mut last_error = String::new();
    for attempt in 1..=max_retries {
        let raw = backend.complete(&req)?;
        match parse_payload(&raw)
            .and_then(|p| validate_payload(p, user_id, generated_at, backend.model()))
        {
            Ok(profile) => return Ok((profile, attempt)),
            Err(e) => {
                log::warn!("user {user_id}: attempt {attempt} rejected: {e}");
                last_error = e;
            }
        }
    }
    Err(Error::HallucinationExhausted {
        attempts: max_retries,
        last_error,
    })
}

/// Generate profiles for many users with a bounded worker pool. Output is
/// ordered by user id regardless of scheduling; each user still costs one
/// backend call per attempt.
pub fn generate_profiles(
    histories: &BTreeMap<u64, Vec<Trajectory>>,
    backend: Arc<dyn ChatBackend>,
    max_retries: u32,
    opts: GenOptions,
    generated_at: DateTime<Utc>,
    parallelism: usize,
) -> Result<Vec<(UserProfile, u32)>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let entries: Vec<(&u64, &Vec<Trajectory>)> = histories.iter().collect();
    pool.install(|| {
        entries
            .par_iter()
            .map(|(user_id, history)| {
                generate_profile(**user_id, history, backend.as_ref(), max_retries, opts, generated_at)
            })
            .collect()
    })
}

/// Value counts along one trait or attribute axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisCounts {
    pub axis: String,
    pub counts: Vec<(String, usize)>,
}

/// Per-axis value distributions over a profile set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub total: usize,
    pub traits: Vec<AxisCounts>,
    pub attributes: Vec<AxisCounts>,
}

/// Count trait and attribute values across profiles. Counts along every
/// axis sum to the number of profiles.
pub fn profile_distribution_report(profiles: &[UserProfile]) -> DistributionReport {
    let count_axis = |axis: &str, allowed: &[&str], pick: &dyn Fn(&UserProfile) -> &str| {
        let counts = allowed
            .iter()
            .map(|value| {
                let n = profiles.iter().filter(|p| pick(p) == *value).count();
                (value.to_string(), n)
            })
            .collect();
        AxisCounts {
            axis: axis.to_string(),
            counts,
        }
    };
    DistributionReport {
        total: profiles.len(),
        traits: (0..5)
            .map(|i| count_axis(TRAIT_AXES[i], &TRAIT_VALUES[i], &move |p| &p.traits[i]))
            .collect(),
        attributes: (0..4)
            .map(|i| count_axis(ATTRIBUTE_AXES[i], ATTRIBUTE_VALUES[i], &move |p| &p.attributes[i]))
            .collect(),
    }
}

fn capitalize(value: &str) -> String {
    let mut chars = value.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

impl DistributionReport {
    /// Two-column Markdown tables, one block for traits and one for
    /// attributes.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# Profile distributions ({} profiles)\n", self.total));
        for (title, axes) in [("BFI traits", &self.traits), ("User attributes", &self.attributes)] {
            out.push_str(&format!("\n## {title}\n\n| Category | Count |\n|---|---|\n"));
            for axis in axes.iter() {
                for (value, n) in &axis.counts {
                    out.push_str(&format!("| {} | {} |\n", capitalize(value), n));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::mock::{MockChatBackend, ScriptedChatBackend};
    use chrono::TimeZone;

    fn ts(h: u32, m: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2012, 4, 13, h, m, 0).unwrap()
    }

    fn checkin(user_id: u64, poi_id: u64, cat: &str, cat_id: u64, h: u32) -> CheckIn {
        CheckIn {
            user_id,
            poi_id,
            category_id: cat_id,
            category_name: cat.into(),
            latitude: 40.7,
            longitude: -74.0,
            timestamp: ts(h, 0),
        }
    }

    fn history(user_id: u64) -> Vec<Trajectory> {
        vec![
            Trajectory::from_checkins(
                0,
                user_id,
                vec![
                    checkin(user_id, 7, "Coffee Shop", 12, 8),
                    checkin(user_id, 9, "Bar", 4, 19),
                ],
            ),
            Trajectory::from_checkins(1, user_id, vec![checkin(user_id, 7, "Coffee Shop", 12, 21)]),
        ]
    }

    const VALID_JSON: &str = r#"{"traits":["Extroverted","agreeable","conscientious"," Emotionally Stable ","open to experience"],"attributes":["adult","female","college & beyond","middle"],"preferences":["coffee first"],"routines":["morning loop"],"user_profile":"A steady, sociable adult who structures the week around a favorite coffee shop, an evening bar, and short predictable trips between them, rarely venturing far from a familiar set of neighborhood venues. Repeat visits dominate the record, with mornings anchored at the same cafe and social evenings nearby, so the best guess for any next stop is one of the handful of places already seen in recent sessions."}"#;

    #[test]
    fn prompt_opens_with_the_fixed_clause() {
        let prompt = build_profile_prompt(42, &history(42)).unwrap();
        assert!(prompt.starts_with("Given the following check-ins of user 42, generate"));
        assert!(prompt.contains("Return your response in JSON format:"));
    }

    #[test]
    fn prompt_renders_checkin_sentences_in_time_order() {
        let prompt = build_profile_prompt(42, &history(42)).unwrap();
        assert!(prompt.contains(
            "At 2012-04-13 08:00, user 42 visited POI id 7 which is a/an Coffee Shop with category id 12."
        ));
        let coffee = prompt.find("POI id 7 which").unwrap();
        let bar = prompt.find("POI id 9 which").unwrap();
        let late = prompt.rfind("POI id 7 which").unwrap();
        assert!(coffee < bar && bar < late);
        // Each check-in appears exactly once.
        assert_eq!(prompt.matches("visited POI id").count(), 3);
    }

    #[test]
    fn empty_history_is_refused() {
        let err = build_profile_prompt(42, &[]).unwrap_err();
        assert!(matches!(err, Error::EmptyHistory(42)));
    }

    #[test]
    fn valid_response_parses_and_canonicalizes() {
        let backend = ScriptedChatBackend::new(vec![VALID_JSON]);
        let (profile, attempts) =
            generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
                .unwrap();
        assert_eq!(attempts, 1);
        assert_eq!(profile.traits[0], "extroverted"); // case folded
        assert_eq!(profile.traits[3], "emotionally stable"); // whitespace stripped
        assert_eq!(profile.attributes[2], "college & beyond");
        assert_eq!(profile.source_model, "scripted");
        assert_eq!(profile.generated_at, ts(12, 0));
    }

    #[test]
    fn code_fences_are_stripped() {
        let fenced = format!("```json\n{VALID_JSON}\n```");
        let backend = ScriptedChatBackend::new(vec![fenced]);
        let (profile, _) =
            generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
                .unwrap();
        assert_eq!(profile.attributes[0], "adult");
    }

    #[test]
    fn schema_failure_heals_on_second_attempt() {
        let backend = ScriptedChatBackend::new(vec![
            r#"{"wrong_key": true}"#.to_string(),
            VALID_JSON.to_string(),
        ]);
        let (_, attempts) =
            generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
                .unwrap();
        assert_eq!(attempts, 2);
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn persistent_bad_trait_exhausts_retries_naming_the_field() {
        let bad = VALID_JSON.replace("\"Extroverted\"", "\"friendly\"");
        let backend = ScriptedChatBackend::new(vec![bad.clone(), bad.clone(), bad]);
        let err = generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
            .unwrap_err();
        let text = err.to_string();
        assert!(text.contains("hallucination-exhausted after 3 attempts"));
        assert!(text.contains("traits[0]"));
        assert!(text.contains("friendly"));
        assert_eq!(backend.calls(), 3);
    }

    #[test]
    fn each_invariant_class_is_rejected() {
        let cases = [
            // Bad trait value.
            VALID_JSON.replace("\"agreeable\"", "\"pleasant\""),
            // Bad attribute value.
            VALID_JSON.replace("\"female\"", "\"nonbinary\""),
            // Missing key.
            VALID_JSON.replace("\"routines\"", "\"habits\""),
            // Empty summary.
            regex::Regex::new(r#""user_profile":"[^"]*""#)
                .unwrap()
                .replace(VALID_JSON, r#""user_profile":"  ""#)
                .to_string(),
        ];
        for (i, bad) in cases.into_iter().enumerate() {
            let backend = ScriptedChatBackend::new(vec![bad]);
            let err =
                generate_profile(42, &history(42), &backend, 1, GenOptions::default(), ts(12, 0))
                    .unwrap_err();
            assert!(
                matches!(err, Error::HallucinationExhausted { .. }),
                "case {i} produced {err:?}"
            );
        }
    }

    #[test]
    fn wrong_cardinality_is_rejected() {
        let four_traits = VALID_JSON.replace("\"Extroverted\",", "");
        let backend = ScriptedChatBackend::new(vec![four_traits]);
        let err = generate_profile(42, &history(42), &backend, 1, GenOptions::default(), ts(12, 0))
            .unwrap_err();
        assert!(err.to_string().contains("exactly 5"));
    }

    #[test]
    fn transport_errors_are_not_retried() {
        let backend = ScriptedChatBackend::new(Vec::<String>::new());
        let err = generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
            .unwrap_err();
        assert!(matches!(err, Error::Backend(_)));
        assert_eq!(backend.calls(), 1);
    }

    #[test]
    fn mock_backend_is_reproducible_end_to_end() {
        let run = || {
            let backend = MockChatBackend::new(7);
            let (profile, attempts) =
                generate_profile(42, &history(42), &backend, 3, GenOptions::default(), ts(12, 0))
                    .unwrap();
            assert_eq!(attempts, 1);
            serde_json::to_string(&profile).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn short_summary_warns_but_passes() {
        let short = regex::Regex::new(r#""user_profile":"[^"]*""#)
            .unwrap()
            .replace(VALID_JSON, r#""user_profile":"Very short summary.""#)
            .to_string();
        let backend = ScriptedChatBackend::new(vec![short]);
        let (profile, _) =
            generate_profile(42, &history(42), &backend, 1, GenOptions::default(), ts(12, 0))
                .unwrap();
        assert_eq!(profile.summary, "Very short summary.");
    }

    fn profile_with(user_id: u64, trait0: &str, age: &str) -> UserProfile {
        UserProfile {
            user_id,
            traits: vec![
                trait0.into(),
                "agreeable".into(),
                "conscientious".into(),
                "emotionally stable".into(),
                "open to experience".into(),
            ],
            attributes: vec![age.into(), "male".into(), "college & beyond".into(), "middle".into()],
            preferences: vec![],
            routines: vec![],
            summary: "s".into(),
            generated_at: ts(0, 0),
            source_model: "m".into(),
        }
    }

    #[test]
    fn distribution_counts_per_axis_sum_to_total() {
        // The reference full-scale distribution: 736 extroverted, 311
        // introverted over 1047 profiles.
        let mut profiles: Vec<UserProfile> = (0..736)
            .map(|i| profile_with(i, "extroverted", "adult"))
            .collect();
        profiles.extend((736..1047).map(|i| profile_with(i, "introverted", "adult")));
        let report = profile_distribution_report(&profiles);
        assert_eq!(report.total, 1047);
        assert_eq!(report.traits[0].counts[0], ("extroverted".to_string(), 736));
        assert_eq!(report.traits[0].counts[1], ("introverted".to_string(), 311));
        for axis in report.traits.iter().chain(report.attributes.iter()) {
            let sum: usize = axis.counts.iter().map(|(_, n)| n).sum();
            assert_eq!(sum, 1047, "axis {} does not sum", axis.axis);
        }
        let md = report.to_markdown();
        assert!(md.contains("| Extroverted | 736 |"));
        assert!(md.contains("| Introverted | 311 |"));
    }

    #[test]
    fn two_adults_count_as_two() {
        let profiles = vec![profile_with(0, "extroverted", "adult"), profile_with(1, "introverted", "adult")];
        let report = profile_distribution_report(&profiles);
        let age = &report.attributes[0];
        assert_eq!(age.counts[2], ("adult".to_string(), 2));
        assert_eq!(age.counts[0].1 + age.counts[1].1 + age.counts[3].1, 0);
    }

    #[test]
    fn bounded_parallel_generation_matches_serial() {
        let histories: BTreeMap<u64, Vec<Trajectory>> =
            (0..8u64).map(|u| (u, history(u))).collect();
        let parallel = generate_profiles(
            &histories,
            Arc::new(MockChatBackend::new(9)),
            3,
            GenOptions::default(),
            ts(12, 0),
            4,
        )
        .unwrap();
        assert_eq!(parallel.len(), 8);
        let serial_backend = MockChatBackend::new(9);
        for (i, (u, h)) in histories.iter().enumerate() {
            let (profile, _) =
                generate_profile(*u, h, &serial_backend, 3, GenOptions::default(), ts(12, 0))
                    .unwrap();
            assert_eq!(parallel[i].0, profile);
        }
    }
}
