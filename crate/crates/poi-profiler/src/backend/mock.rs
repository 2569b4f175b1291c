//! Deterministic offline backends.
//!
//! [`MockChatBackend`] recognizes the three prompt families produced by this
//! crate (profile generation, profile judging, next-POI prediction) by their
//! fixed instruction phrases, extracts what it needs from the prompt text
//! with the same sentence patterns the generators use, and samples a
//! plausible response from a ChaCha8 stream seeded by
//! `seed XOR fingerprint(request)`. Identical request plus identical seed
//! therefore always yields identical bytes, across processes and platforms.
//!
//! [`ScriptedChatBackend`] replays a fixed response queue, for exercising
//! retry and failure paths. [`MockEmbeddingBackend`] hashes tokens into a
//! fixed-width bag-of-words vector.

use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use super::{request_fingerprint, ChatBackend, ChatRequest, EmbeddingBackend};
use crate::backend::fnv1a64;
use crate::error::BackendError;

macro_rules! lazy_re {
    ($name:ident, $pat:expr) => {
        fn $name() -> &'static Regex {
            static RE: OnceLock<Regex> = OnceLock::new();
            RE.get_or_init(|| Regex::new($pat).unwrap())
        }
    };
}

lazy_re!(re_profile_uid, r"check-ins of user (\d+),");
lazy_re!(re_category, r"which is a/an (.+?) with category id \d+\.");
lazy_re!(re_hour, r"At \d{4}-\d{2}-\d{2} (\d{2}):\d{2}, user \d+ visited");
lazy_re!(re_visited_poi, r"visited POI id (\d+) which is a/an (.+?) with category id");
lazy_re!(re_predict_time, r"Given the data, at time (.+?), which POI id");
lazy_re!(re_predict_uid, r"which POI id will user (\d+) visit");
lazy_re!(re_range, r"range from 0 to (\d+)\.");
lazy_re!(re_injected, r"really wants to visit a (.+?) place\.");

/// Seeded, panic-free chat mock.
pub struct MockChatBackend {
    seed: u64,
    model: String,
    calls: AtomicU64,
}

impl MockChatBackend {
    pub fn new(seed: u64) -> MockChatBackend {
        MockChatBackend {
            seed,
            model: "mock-chat".into(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_model(mut self, model: &str) -> MockChatBackend {
        self.model = model.to_string();
        self
    }

    /// Completions served so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    fn respond(&self, req: &ChatRequest) -> String {
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed ^ request_fingerprint(&self.model, req));
        let full: String = req
            .messages
            .iter()
            .map(|m| m.content.as_str())
            .collect::<Vec<&str>>()
            .join("\n");

        if full.contains("generate a 200-word user profile summary") {
            profile_response(&full, &mut rng)
        } else if full.contains("assess the user profile based on four criteria") {
            judge_response(&mut rng)
        } else if full.contains("which POI id will user") {
            predict_response(req, &full, &mut rng)
        } else {
            "Understood.".into()
        }
    }
}

impl ChatBackend for MockChatBackend {
    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok(self.respond(req))
    }

    fn model(&self) -> &str {
        &self.model
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[(&'a str, f64)]) -> &'a str {
    let roll: f64 = rng.gen();
    let mut acc = 0.0;
    for &(value, weight) in options {
        acc += weight;
        if roll < acc {
            return value;
        }
    }
    options.last().unwrap().0
}

/// Category names by descending frequency in the prompt, ties alphabetical.
fn top_categories(prompt: &str) -> Vec<String> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for cap in re_category().captures_iter(prompt) {
        *counts.entry(cap[1].to_string()).or_default() += 1;
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().map(|(name, _)| name).collect()
}

fn modal_hour(prompt: &str) -> u32 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for cap in re_hour().captures_iter(prompt) {
        if let Ok(h) = cap[1].parse::<u32>() {
            *counts.entry(h).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by_key(|&(h, n)| (n, std::cmp::Reverse(h)))
        .map(|(h, _)| h)
        .unwrap_or(9)
}

fn profile_response(prompt: &str, rng: &mut ChaCha8Rng) -> String {
    let uid = re_profile_uid()
        .captures(prompt)
        .and_then(|c| c[1].parse::<u64>().ok())
        .unwrap_or(0);

    // Trait skew mirrors what large LLMs actually produce on check-in data:
    // agreeable/conscientious near-universally, neurotic and closed rarely.
    let traits = vec![
        if rng.gen_bool(0.70) { "extroverted" } else { "introverted" },
        "agreeable",
        "conscientious",
        if rng.gen_bool(0.04) { "neurotic" } else { "emotionally stable" },
        if rng.gen_bool(0.004) { "closed to experience" } else { "open to experience" },
    ];
    let age = pick(rng, &[("adult", 0.90), ("adolescent", 0.06), ("older adult", 0.03), ("child", 0.01)]);
    let gender = pick(rng, &[("male", 0.55), ("female", 0.45)]);
    let edu = pick(rng, &[("college & beyond", 0.70), ("high school", 0.25), ("some schooling", 0.05)]);
    let socio = pick(rng, &[("middle", 0.70), ("upper", 0.15), ("lower", 0.15)]);

    let mut cats = top_categories(prompt);
    if cats.is_empty() {
        cats.push("Local Venue".into());
    }
    let cat = |i: usize| cats[i.min(cats.len() - 1)].clone();
    let hour = modal_hour(prompt);

    let mut pois: Vec<u64> = re_visited_poi()
        .captures_iter(prompt)
        .filter_map(|c| c[1].parse().ok())
        .collect();
    pois.sort_unstable();
    pois.dedup();
    let anchor_pois: Vec<String> = pois.iter().take(3).map(|p| p.to_string()).collect();
    let anchors = if anchor_pois.is_empty() {
        "a small set of anchor venues".to_string()
    } else {
        format!("POI ids {}", anchor_pois.join(", "))
    };

    let preferences: Vec<String> = [
        format!("Enjoys visiting {} venues", cat(0)),
        format!("Often chooses {} spots when they are nearby", cat(1)),
        format!("Returns to familiar {} places rather than trying new ones", cat(2)),
    ]
    .into_iter()
    .take(cats.len().min(3))
    .collect();
    let routines: Vec<String> = vec![
        format!("Typically checks in around {hour:02}:00"),
        "Keeps a steady weekly rhythm built on repeat visits".to_string(),
    ];

    let summary = format!(
        "User {uid} is a {age} {gender} whose check-in history suggests a {socio}-income \
         lifestyle and an educational background of {edu}. Their records show a consistent \
         preference for {} venues, with regular stops at {} and {} locations rounding out \
         the week. Most activity clusters around {hour:02}:00, pointing to a stable schedule \
         organized around a handful of familiar neighborhoods rather than constant novelty. \
         They come across as {} and {}, handling plans in a {} way and staying {} with the \
         people around them. Important places include {anchors}, which anchor their weekly \
         movement and are the most likely destinations for future check-ins. Visits tend to \
         happen in short bursts within a session, often returning to a venue already seen \
         earlier the same day, which makes their next stop highly predictable from recent \
         context. When they do branch out, the new venue usually belongs to a category they \
         already frequent, so category-level preferences are more stable than venue-level \
         ones. Weekday activity is compact and routine-driven, while weekend movement ranges \
         a little wider across the city. Overall this user rewards a recommender that leans \
         on recency and repetition, surfacing their regular spots first and introducing new \
         places sparingly, inside already-liked categories.",
        cat(0),
        cat(1),
        cat(2),
        traits[0],
        traits[3],
        traits[2],
        traits[1],
    );

    serde_json::json!({
        "traits": traits,
        "attributes": [age, gender, edu, socio],
        "preferences": preferences,
        "routines": routines,
        "user_profile": summary,
    })
    .to_string()
}

fn judge_response(rng: &mut ChaCha8Rng) -> String {
    // Real judges score fluency/informativeness/relevance at ceiling and
    // split on conciseness; the mock reproduces that shape.
    let conciseness = rng.gen_bool(0.5) as u8;
    serde_json::json!({
        "fluency": 1,
        "informativeness": 1,
        "conciseness": conciseness,
        "relevance": 1,
    })
    .to_string()
}

fn predict_response(req: &ChatRequest, full: &str, rng: &mut ChaCha8Rng) -> String {
    let time = re_predict_time()
        .captures(full)
        .map(|c| c[1].to_string())
        .unwrap_or_else(|| "2012-01-01 00:00".into());
    let uid = re_predict_uid()
        .captures(full)
        .and_then(|c| c[1].parse::<u64>().ok())
        .unwrap_or(0);
    let max_id = re_range()
        .captures(full)
        .and_then(|c| c[1].parse::<u64>().ok())
        .unwrap_or(0);

    // Trajectory context lives in the user turn; the system turn carries the
    // profile (and possibly an injected short-term preference).
    let user_text = req.content_of("user").unwrap_or(full);
    let trajectory: Vec<(u64, String)> = re_visited_poi()
        .captures_iter(user_text)
        .filter_map(|c| Some((c[1].parse().ok()?, c[2].to_string())))
        .collect();

    let injected = req
        .content_of("system")
        .and_then(|s| re_injected().captures_iter(s).last())
        .map(|c| c[1].to_string());

    let poi = if let Some(target) = injected.as_ref().and_then(|cat| {
        trajectory
            .iter()
            .rev()
            .find(|(_, c)| c == cat)
            .map(|(p, _)| *p)
    }) {
        // An injected preference wins whenever the trajectory offers a venue
        // of that category.
        target
    } else if !trajectory.is_empty() && rng.gen_bool(0.6) {
        trajectory[rng.gen_range(0..trajectory.len())].0
    } else if max_id > 0 {
        rng.gen_range(0..=max_id)
    } else {
        0
    };

    format!("At {time}, user {uid} will visit POI id {poi}.")
}

/// Replays a fixed queue of responses, then fails. Records every request
/// for later assertions.
pub struct ScriptedChatBackend {
    model: String,
    responses: Mutex<VecDeque<String>>,
    requests: Mutex<Vec<ChatRequest>>,
    calls: AtomicU64,
}

impl ScriptedChatBackend {
    pub fn new<S: Into<String>>(responses: Vec<S>) -> ScriptedChatBackend {
        ScriptedChatBackend {
            model: "scripted".into(),
            responses: Mutex::new(responses.into_iter().map(Into::into).collect()),
            requests: Mutex::new(Vec::new()),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_model(mut self, model: &str) -> ScriptedChatBackend {
        self.model = model.to_string();
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Requests seen so far, in order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl ChatBackend for ScriptedChatBackend {
    fn complete(&self, req: &ChatRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.requests.lock().unwrap().push(req.clone());
        self.responses
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| BackendError::ScriptExhausted(self.calls() as usize - 1))
    }

    fn model(&self) -> &str {
        &self.model
    }
}

pub const MOCK_EMBEDDING_DIM: usize = 1024;

/// Bag-of-words embedder: tokens hash into a fixed-width count vector.
/// Identical text always embeds identically; texts sharing no token are
/// exactly orthogonal.
pub struct MockEmbeddingBackend {
    model: String,
    calls: AtomicU64,
}

impl Default for MockEmbeddingBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl MockEmbeddingBackend {
    pub fn new() -> MockEmbeddingBackend {
        MockEmbeddingBackend {
            model: "mock-embed".into(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_model(mut self, model: &str) -> MockEmbeddingBackend {
        self.model = model.to_string();
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl EmbeddingBackend for MockEmbeddingBackend {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let mut v = vec![0.0; MOCK_EMBEDDING_DIM];
        for token in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let idx = fnv1a64(token.to_lowercase().as_bytes()) as usize % MOCK_EMBEDDING_DIM;
            v[idx] += 1.0;
        }
        Ok(v)
    }

    fn model(&self) -> &str {
        &self.model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROFILE_PROMPT: &str = "Given the following check-ins of user 42, generate a 200-word \
        user profile summary to be used as a system prompt. At 2012-04-13 08:00, user 42 visited \
        POI id 7 which is a/an Coffee Shop with category id 3. At 2012-04-13 19:00, user 42 \
        visited POI id 9 which is a/an Bar with category id 4. At 2012-04-14 08:30, user 42 \
        visited POI id 7 which is a/an Coffee Shop with category id 3.";

    #[test]
    fn identical_requests_are_byte_identical() {
        let backend = MockChatBackend::new(7);
        let req = ChatRequest::from_user(PROFILE_PROMPT);
        assert_eq!(
            backend.complete(&req).unwrap(),
            backend.complete(&req).unwrap()
        );
        assert_eq!(backend.calls(), 2);
    }

    #[test]
    fn seed_and_model_change_the_stream() {
        let req = ChatRequest::from_user(
            "assess the user profile based on four criteria number 001",
        );
        let outputs: Vec<String> = (0..64)
            .map(|s| MockChatBackend::new(s).complete(&req).unwrap())
            .collect();
        // Conciseness flips across seeds somewhere in 64 draws.
        assert!(outputs.iter().any(|o| o != &outputs[0]));

        let a = MockChatBackend::new(1).complete(&req).unwrap();
        let b = MockChatBackend::new(1)
            .with_model("judge-b")
            .complete(&req)
            .unwrap();
        let _ = (a, b); // may or may not differ on one draw; the stream does
        let req2 = ChatRequest::from_user(PROFILE_PROMPT);
        assert_ne!(
            MockChatBackend::new(1).complete(&req2).unwrap(),
            MockChatBackend::new(2).complete(&req2).unwrap()
        );
    }

    #[test]
    fn profile_response_is_valid_schema() {
        let backend = MockChatBackend::new(3);
        let raw = backend
            .complete(&ChatRequest::from_user(PROFILE_PROMPT))
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(v["traits"].as_array().unwrap().len(), 5);
        assert_eq!(v["attributes"].as_array().unwrap().len(), 4);
        assert!(!v["preferences"].as_array().unwrap().is_empty());
        assert!(!v["routines"].as_array().unwrap().is_empty());
        let summary = v["user_profile"].as_str().unwrap();
        let words = summary.split_whitespace().count();
        assert!((50..=400).contains(&words), "summary has {words} words");
        assert!(summary.contains("User 42"));
        // Coffee Shop appears twice, Bar once; the mock ranks it first.
        assert!(summary.contains("preference for Coffee Shop venues"));
    }

    #[test]
    fn judge_response_is_binary_json() {
        let backend = MockChatBackend::new(5);
        let raw = backend
            .complete(&ChatRequest::from_user(
                "you are to assess the user profile based on four criteria",
            ))
            .unwrap();
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        for key in ["fluency", "informativeness", "conciseness", "relevance"] {
            let val = v[key].as_u64().unwrap();
            assert!(val <= 1);
        }
        assert_eq!(v["fluency"], 1);
        assert_eq!(v["relevance"], 1);
    }

    fn predict_request(system: &str) -> ChatRequest {
        ChatRequest::with_system(
            system,
            "The following is a trajectory of user 12: At 2012-10-01 08:00, user 12 visited \
             POI id 5 which is a/an Coffee Shop with category id 3. At 2012-10-01 12:00, user \
             12 visited POI id 8 which is a/an Gym / Fitness Center with category id 6. Given \
             the data, at time 2012-10-01 18:00, which POI id will user 12 visit? Note that \
             POI id is an integer in the range from 0 to 49.",
        )
    }

    #[test]
    fn prediction_is_well_formed_and_in_range() {
        let backend = MockChatBackend::new(11);
        for seed in 0..20u64 {
            let backend = MockChatBackend::new(seed);
            let raw = backend.complete(&predict_request("A profile.")).unwrap();
            assert!(raw.starts_with("At 2012-10-01 18:00, user 12 will visit POI id "));
            let id: u64 = raw
                .trim_end_matches('.')
                .rsplit(' ')
                .next()
                .unwrap()
                .parse()
                .unwrap();
            assert!(id <= 49);
        }
        let _ = backend;
    }

    #[test]
    fn injected_preference_steers_the_prediction() {
        let system = "A profile. Today, this user really wants to visit a Gym / Fitness Center \
                      place.";
        for seed in 0..10u64 {
            let raw = MockChatBackend::new(seed)
                .complete(&predict_request(system))
                .unwrap();
            // POI 8 is the trajectory's only Gym / Fitness Center.
            assert!(raw.ends_with("will visit POI id 8."), "got {raw}");
        }
    }

    #[test]
    fn unrecognized_prompts_get_a_fixed_reply() {
        let backend = MockChatBackend::new(0);
        let raw = backend
            .complete(&ChatRequest::from_user("what is the weather"))
            .unwrap();
        assert_eq!(raw, "Understood.");
    }

    #[test]
    fn scripted_backend_replays_then_fails() {
        let backend = ScriptedChatBackend::new(vec!["one", "two"]);
        let req = ChatRequest::from_user("x");
        assert_eq!(backend.complete(&req).unwrap(), "one");
        assert_eq!(backend.complete(&req).unwrap(), "two");
        let err = backend.complete(&req).unwrap_err();
        assert!(matches!(err, BackendError::ScriptExhausted(2)));
        assert_eq!(backend.calls(), 3);
        assert_eq!(backend.requests().len(), 3);
    }

    #[test]
    fn embeddings_are_deterministic_and_orthogonal_on_disjoint_text() {
        let backend = MockEmbeddingBackend::new();
        let a = backend.embed("coffee in the morning").unwrap();
        let b = backend.embed("coffee in the morning").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), MOCK_EMBEDDING_DIM);

        let c = backend.embed("completely different words entirely").unwrap();
        let dot: f64 = a.iter().zip(&c).map(|(x, y)| x * y).sum();
        assert_eq!(dot, 0.0);
        assert_eq!(backend.calls(), 3);
    }

    #[test]
    fn embedding_is_case_insensitive_bag_of_words() {
        let backend = MockEmbeddingBackend::new();
        let a = backend.embed("Coffee SHOP").unwrap();
        let b = backend.embed("shop coffee").unwrap();
        assert_eq!(a, b);
    }
}
