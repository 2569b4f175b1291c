//! System prompts and supervised fine-tuning (SFT) examples.
//!
//! A system prompt stitches profile components into one paragraph in a
//! fixed order: attributes, traits, preferences, routines, summary. Which
//! components appear is controlled by [`SystemPromptConfig`], supporting
//! ablations from "no profile at all" up to the full stack.
//!
//! An SFT example turns one trajectory into a QA pair: every check-in but
//! the last becomes context, the last becomes the target. The emitted file
//! carries a manifest pinning the downstream training recipe and the
//! reference accuracy targets from full-scale runs.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::{checkin_sentence, UserProfile, PROMPT_TIME_FORMAT};
use crate::sessionize::{SplitManifest, Trajectory};

/// Context budget assumed by the training recipe.
pub const CONTEXT_LENGTH_TOKENS: u64 = 16_384;

/// Which profile components the system prompt includes. The summary is the
/// base layer: every other component is an addition on top of it, so
/// enabling any other flag without the summary is rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemPromptConfig {
    pub include_summary: bool,
    pub include_routines_preferences: bool,
    pub include_attributes: bool,
    pub include_traits: bool,
}

impl SystemPromptConfig {
    /// Everything on: attributes, traits, preferences, routines, summary.
    pub fn full() -> SystemPromptConfig {
        SystemPromptConfig {
            include_summary: true,
            include_routines_preferences: true,
            include_attributes: true,
            include_traits: true,
        }
    }

    /// Everything off: the no-profile baseline.
    pub fn none() -> SystemPromptConfig {
        SystemPromptConfig {
            include_summary: false,
            include_routines_preferences: false,
            include_attributes: false,
            include_traits: false,
        }
    }

    /// Summary only.
    pub fn summary_only() -> SystemPromptConfig {
        SystemPromptConfig {
            include_summary: true,
            ..SystemPromptConfig::none()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let others =
            self.include_routines_preferences || self.include_attributes || self.include_traits;
        if others && !self.include_summary {
            return Err(Error::InvalidPromptConfig(
                "include_summary must be on when any other component is on".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SystemPromptConfig {
    fn default() -> Self {
        SystemPromptConfig::full()
    }
}

/// How the full training text is wrapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatTemplate {
    /// `<s>[INST] <<SYS>> ... <</SYS>> ... [/INST] ... </s>`
    Llama2Chat,
    /// System, input, and target joined by newlines.
    Plain,
}

/// Render the system prompt for a profile under the given component
/// toggles. Empty preference or routine lists contribute nothing. All
/// flags off renders the empty string.
pub fn build_system_prompt(profile: &UserProfile, cfg: &SystemPromptConfig) -> Result<String> {
    cfg.validate()?;
    let mut sections: Vec<String> = Vec::new();
    if cfg.include_attributes {
        sections.push(format!(
            "You are user {} and your basic information is as follows: Age: {}; Gender: {}; \
             Education: {}; SocioEco: {}.",
            profile.user_id,
            profile.attributes[0],
            profile.attributes[1],
            profile.attributes[2],
            profile.attributes[3],
        ));
    }
    if cfg.include_traits {
        sections.push(format!(
            "You have the following traits: {}.",
            profile.traits.join(", ")
        ));
    }
    if cfg.include_routines_preferences {
        if !profile.preferences.is_empty() {
            sections.push(format!(
                "You have the following preferences: {}.",
                profile.preferences.join(", ")
            ));
        }
        if !profile.routines.is_empty() {
            sections.push(format!(
                "You have the following routines: {}.",
                profile.routines.join(", ")
            ));
        }
    }
    if cfg.include_summary {
        sections.push(profile.summary.clone());
    }
    Ok(sections.join(" "))
}

/// One training example. `input_prompt` never contains the target check-in;
/// `text` is the full training rendering including the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SFTExample {
    pub example_id: u64,
    pub user_id: u64,
    pub system_prompt: String,
    pub input_prompt: String,
    pub target: String,
    pub text: String,
    pub next_timestamp: DateTime<Utc>,
    pub next_poi_id: u64,
    pub token_estimate: u64,
}

impl SFTExample {
    pub fn over_budget(&self) -> bool {
        self.token_estimate > CONTEXT_LENGTH_TOKENS
    }
}

/// The question block: context trajectory plus instruction. `m` is the POI
/// vocabulary size, rendered as the maximum valid id `m - 1`.
fn input_prompt(traj_sentences: &[String], user_id: u64, time: &str, m: u64) -> String {
    format!(
        "The following is a trajectory of user {user_id}: {} Given the data, at time {time}, \
         which POI id will user {user_id} visit? Note that POI id is an integer in the range \
         from 0 to {}.",
        traj_sentences.join(" "),
        m - 1
    )
}

/// Build one SFT example from a trajectory of at least two check-ins.
pub fn build_sft_example(
    example_id: u64,
    traj: &Trajectory,
    profile: &UserProfile,
    cfg: &SystemPromptConfig,
    m: u64,
    template: ChatTemplate,
) -> Result<SFTExample> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort(traj.traj_id));
    }
    if profile.user_id != traj.user_id {
        return Err(Error::UserMismatch(profile.user_id, traj.user_id));
    }
    let (target_checkin, context) = traj.checkins.split_last().unwrap();
    if target_checkin.poi_id >= m {
        return Err(Error::InvalidConfig(format!(
            "target POI id {} outside the declared range 0..{m}",
            target_checkin.poi_id
        )));
    }

    let sentences: Vec<String> = context.iter().map(checkin_sentence).collect();
    let time = target_checkin.timestamp.format(PROMPT_TIME_FORMAT).to_string();
    let system_prompt = build_system_prompt(profile, cfg)?;
    let input_prompt = input_prompt(&sentences, traj.user_id, &time, m);
    let target = format!(
        "At {time}, user {} will visit POI id {}.",
        traj.user_id, target_checkin.poi_id
    );

    let text = match template {
        ChatTemplate::Llama2Chat if system_prompt.is_empty() => {
            format!("<s>[INST] {input_prompt} [/INST] {target} </s>")
        }
        ChatTemplate::Llama2Chat => {
            format!("<s>[INST] <<SYS>> {system_prompt} <</SYS>> {input_prompt} [/INST] {target} </s>")
        }
        ChatTemplate::Plain if system_prompt.is_empty() => format!("{input_prompt}\n{target}"),
        ChatTemplate::Plain => format!("{system_prompt}\n{input_prompt}\n{target}"),
    };
    let token_estimate = (text.chars().count() as u64).div_ceil(4);

    Ok(SFTExample {
        example_id,
        user_id: traj.user_id,
        system_prompt,
        input_prompt,
        target,
        text,
        next_timestamp: target_checkin.timestamp,
        next_poi_id: target_checkin.poi_id,
        token_estimate,
    })
}

/// Build examples for every eligible trajectory, numbering them in input
/// order. Trajectories shorter than two check-ins are counted and skipped;
/// a missing profile is an error.
pub fn build_sft_dataset(
    trajs: &[Trajectory],
    profiles: &BTreeMap<u64, UserProfile>,
    cfg: &SystemPromptConfig,
    m: u64,
    template: ChatTemplate,
) -> Result<Vec<SFTExample>> {
    let mut examples = Vec::with_capacity(trajs.len());
    let mut skipped = 0usize;
    for traj in trajs {
        if traj.len() < 2 {
            skipped += 1;
            continue;
        }
        let profile = profiles
            .get(&traj.user_id)
            .ok_or(Error::UnmappedUser(traj.user_id))?;
        examples.push(build_sft_example(
            examples.len() as u64,
            traj,
            profile,
            cfg,
            m,
            template,
        )?);
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} trajectories with fewer than 2 check-ins");
    }
    Ok(examples)
}

/// Return a copy of the profile with a short-term preference sentence
/// appended to the summary. Every other field is untouched; applying twice
/// appends twice.
pub fn inject_preference(profile: &UserProfile, category_name: &str) -> Result<UserProfile> {
    if category_name.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let mut out = profile.clone();
    out.summary = format!(
        "{} Today, this user really wants to visit a {category_name} place.",
        out.summary
    );
    Ok(out)
}

/// Fine-tuning recipe recorded alongside emitted datasets. Training itself
/// happens in external trainers; these values pin what they should use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHyperparameters {
    pub lora_rank: u32,
    pub lora_target_modules: Vec<String>,
    pub quantization: String,
    pub compute_dtype: String,
    pub context_length_tokens: u64,
    pub epochs: u32,
    pub lr_scheduler: String,
    pub warmup_steps: u32,
    pub weight_decay: f64,
    pub kernels: Vec<String>,
}

impl Default for TrainingHyperparameters {
    fn default() -> Self {
        TrainingHyperparameters {
            lora_rank: 8,
            lora_target_modules: vec![
                "q_proj".into(),
                "k_proj".into(),
                "v_proj".into(),
                "o_proj".into(),
            ],
            quantization: "nf4-double".into(),
            compute_dtype: "bf16".into(),
            context_length_tokens: CONTEXT_LENGTH_TOKENS,
            epochs: 3,
            lr_scheduler: "linear".into(),
            warmup_steps: 20,
            weight_decay: 0.0,
            kernels: vec!["flash-attention-2".into(), "liger-kernel".into()],
        }
    }
}

/// Before/after prediction counts for one injected category, from the
/// full-scale reference runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftReference {
    pub before: u32,
    pub after: u32,
}

/// Accuracy figures from full-scale fine-tuning runs. Desk-scale mock
/// pipelines cannot reproduce them; they are recorded so downstream
/// trainers know what the emitted dataset should achieve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTargets {
    pub note: String,
    pub acc_at_1: BTreeMap<String, f64>,
    pub ablation_acc_at_1: BTreeMap<String, f64>,
    pub preference_shift: BTreeMap<String, ShiftReference>,
}

impl Default for ReferenceTargets {
    fn default() -> Self {
        let acc_at_1 = BTreeMap::from([
            ("nyc".to_string(), 0.2575),
            ("tky".to_string(), 0.1699),
            ("ca".to_string(), 0.1094),
            ("moscow".to_string(), 0.180),
            ("sao_paulo".to_string(), 0.205),
        ]);
        let ablation_acc_at_1 = BTreeMap::from([
            ("no_user_profile".to_string(), 0.2356),
            ("user_profile".to_string(), 0.2568),
            ("plus_routines_preferences".to_string(), 0.2568),
            ("plus_user_attributes".to_string(), 0.2575),
            ("plus_bfi_traits".to_string(), 0.2575),
        ]);
        let preference_shift = BTreeMap::from([
            ("Coffee Shop".to_string(), ShiftReference { before: 61, after: 68 }),
            ("Bar".to_string(), ShiftReference { before: 94, after: 105 }),
            ("Gym / Fitness Center".to_string(), ShiftReference { before: 102, after: 123 }),
            ("Subway".to_string(), ShiftReference { before: 53, after: 65 }),
        ]);
        ReferenceTargets {
            note: "Measured with multi-GPU QLoRA fine-tuning of 7B-class models on the full \
                   datasets (base-model accuracy row and NYC ablation/shift studies); not \
                   reproducible at desk scale and recorded for comparison only."
                .into(),
            acc_at_1,
            ablation_acc_at_1,
            preference_shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftFileStats {
    pub examples: usize,
    pub over_budget: usize,
}

impl SftFileStats {
    pub fn of(examples: &[SFTExample]) -> SftFileStats {
        SftFileStats {
            examples: examples.len(),
            over_budget: examples.iter().filter(|e| e.over_budget()).count(),
        }
    }
}

/// Everything a trainer needs to consume the emitted SFT files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftManifest {
    pub prompt_config: SystemPromptConfig,
    pub chat_template: ChatTemplate,
    pub poi_count: u64,
    pub files: BTreeMap<String, SftFileStats>,
    pub split: Option<SplitManifest>,
    pub hyperparameters: TrainingHyperparameters,
    pub reference_targets: ReferenceTargets,
}

/// Write examples as JSON lines, one per line, in input order.
pub fn emit_sft_dataset(examples: &[SFTExample], path: &Path) -> Result<()> {
    if examples.is_empty() {
        return Err(Error::EmptyInput("SFT examples"));
    }
    let mut out = Vec::new();
    for ex in examples {
        serde_json::to_writer(&mut out, ex)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read examples written by [`emit_sft_dataset`].
pub fn read_sft_jsonl(path: &Path) -> Result<Vec<SFTExample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

pub fn write_sft_manifest(manifest: &SftManifest, path: &Path) -> Result<()> {
    let mut json = serde_json::to_vec_pretty(manifest)?;
    json.push(b'\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}
