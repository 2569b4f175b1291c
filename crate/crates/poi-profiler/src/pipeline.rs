//! Declarative pipeline configuration and the stages that run it.
//!
//! One TOML file names the dataset, split rules, backends, prompt layout,
//! and output directory. Stages communicate only through files under that
//! output directory, so any stage can be re-run in isolation and inspected
//! with a pager. With mock backends every stage is deterministic: re-running
//! without input changes rewrites byte-identical artifacts (the profile
//! store appends a new version only when content actually changed).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::backend::{build_chat_backend, BackendConfig};
use crate::error::{Error, Result};
use crate::eval::{
    accuracy_at_1, category_shift_report, cold_start_report, cold_start_to_markdown,
    group_users_by_activity, read_predictions_jsonl, run_predictions, shift_to_markdown,
    write_predictions_jsonl,
};
use crate::ingest::{
    filter_by_boundary, parse_checkin_file, read_dataset, write_dataset, BoundaryPolygon,
    CheckinFormat, Dataset,
};
use crate::judge::{aggregate_judge_scores, aggregates_to_markdown, judge_profile, write_scores_jsonl};
use crate::profiler::{
    generate_profiles, profile_distribution_report, GenOptions, UserProfile,
};
use crate::profiler::store::{ProfileStore, StoredProfile};
use crate::promptgen::{
    build_sft_dataset, emit_sft_dataset, inject_preference, read_sft_jsonl, write_sft_manifest,
    ChatTemplate, ReferenceTargets, SftFileStats, SftManifest, SystemPromptConfig,
    TrainingHyperparameters,
};
use crate::sessionize::{
    filter_sessions, read_splits, read_trajectories_jsonl, sessionize, split, write_splits,
    write_trajectories_jsonl, SplitSpec, Trajectory,
};
use crate::trajsim::{benchmark_to_markdown, complexity_benchmark};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub format: CheckinFormat,
    #[serde(default)]
    pub boundary: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendsConfig {
    pub profile: BackendConfig,
    pub judges: Vec<BackendConfig>,
    pub predictor: BackendConfig,
    pub embedding: BackendConfig,
}

impl Default for BackendsConfig {
    fn default() -> Self {
        BackendsConfig {
            profile: BackendConfig::Mock { seed: 7, model: Some("mock-profiler".into()) },
            judges: vec![BackendConfig::Mock { seed: 8, model: Some("mock-judge".into()) }],
            predictor: BackendConfig::Mock { seed: 9, model: Some("mock-predictor".into()) },
            embedding: BackendConfig::Mock { seed: 10, model: Some("mock-embed".into()) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptSettings {
    pub include_summary: bool,
    pub include_routines_preferences: bool,
    pub include_attributes: bool,
    pub include_traits: bool,
    pub chat_template: ChatTemplate,
}

impl PromptSettings {
    pub fn system(&self) -> SystemPromptConfig {
        SystemPromptConfig {
            include_summary: self.include_summary,
            include_routines_preferences: self.include_routines_preferences,
            include_attributes: self.include_attributes,
            include_traits: self.include_traits,
        }
    }
}

impl Default for PromptSettings {
    fn default() -> Self {
        PromptSettings {
            include_summary: true,
            include_routines_preferences: true,
            include_attributes: true,
            include_traits: true,
            chat_template: ChatTemplate::Llama2Chat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub max_retries: u32,
    pub parallelism: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig { max_retries: 3, parallelism: 4 }
    }
}

fn default_seed() -> u64 {
    7
}

/// Fixed stamp recorded as `generated_at` so reruns are byte-identical.
/// Override in the config for wall-clock provenance at the cost of that
/// guarantee.
pub fn default_run_timestamp() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_run_timestamp")]
    pub run_timestamp: DateTime<Utc>,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub backends: BackendsConfig,
    #[serde(default)]
    pub prompt: PromptSettings,
    #[serde(default)]
    pub generation: GenerationConfig,
}

impl PipelineConfig {
    /// The configuration used by golden runs and examples: the bundled
    /// twenty-user corpus, 70/10/20 chronological split with a 72 h session
    /// gap, full system prompts, and seeded mocks everywhere.
    pub fn golden(dataset: PathBuf, boundary: Option<PathBuf>, output_dir: PathBuf) -> PipelineConfig {
        PipelineConfig {
            seed: 7,
            output_dir,
            run_timestamp: default_run_timestamp(),
            dataset: DatasetConfig {
                path: dataset,
                format: CheckinFormat::FoursquareTsv,
                boundary,
            },
            split: SplitSpec {
                protocol: crate::sessionize::SplitProtocol::Chrono701020,
                delta_t_seconds: 72 * 3600,
                min_sessions_per_user: 5,
                min_checkins_per_session: 4,
                test_user_session_range: Some((3, 50)),
                test_cap: Some(200),
                cap_sampling: crate::sessionize::CapSampling::Chronological,
            },
            backends: BackendsConfig::default(),
            prompt: PromptSettings::default(),
            generation: GenerationConfig { max_retries: 3, parallelism: 1 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dataset.path.exists() {
            return Err(Error::InvalidConfig(format!(
                "dataset path {} does not exist",
                self.dataset.path.display()
            )));
        }
        if let Some(b) = &self.dataset.boundary {
            if !b.exists() {
                return Err(Error::InvalidConfig(format!(
                    "boundary path {} does not exist",
                    b.display()
                )));
            }
        }
        if self.split.delta_t_seconds == 0 {
            return Err(Error::InvalidConfig("delta_t_seconds must be positive".into()));
        }
        if self.generation.max_retries == 0 || self.generation.parallelism == 0 {
            return Err(Error::InvalidConfig(
                "max_retries and parallelism must be at least 1".into(),
            ));
        }
        if self.backends.judges.is_empty() {
            return Err(Error::InvalidConfig("at least one judge backend required".into()));
        }
        self.prompt.system().validate()
    }
}

/// Parse a TOML config file. Relative paths (dataset, boundary, output
/// directory) resolve against the config file's directory.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg: PipelineConfig =
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&p);
        }
    };
    resolve(&mut cfg.dataset.path);
    if let Some(b) = &mut cfg.dataset.boundary {
        resolve(b);
    }
    resolve(&mut cfg.output_dir);
    cfg.validate()?;
    Ok(cfg)
}

/// Where every stage's artifacts live under one output root.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    pub root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: &Path) -> OutputLayout {
        OutputLayout { root: root.to_path_buf() }
    }

    pub fn checkins_jsonl(&self) -> PathBuf {
        self.root.join("dataset/checkins.jsonl")
    }
    pub fn dataset_index(&self) -> PathBuf {
        self.root.join("dataset/index.json")
    }
    pub fn parse_report(&self) -> PathBuf {
        self.root.join("dataset/parse_report.json")
    }
    pub fn trajectories_jsonl(&self) -> PathBuf {
        self.root.join("trajectories.jsonl")
    }
    pub fn splits_dir(&self) -> PathBuf {
        self.root.join("splits")
    }
    pub fn profiles_dir(&self) -> PathBuf {
        self.root.join("profiles")
    }
    pub fn judge_scores(&self) -> PathBuf {
        self.root.join("judge/scores.jsonl")
    }
    pub fn judge_summary_md(&self) -> PathBuf {
        self.root.join("judge/summary.md")
    }
    pub fn sft_split(&self, name: &str) -> PathBuf {
        self.root.join(format!("sft/{name}.jsonl"))
    }
    pub fn sft_manifest(&self) -> PathBuf {
        self.root.join("sft/manifest.json")
    }
    pub fn predictions_jsonl(&self) -> PathBuf {
        self.root.join("predictions/test.jsonl")
    }
    pub fn eval_report(&self) -> PathBuf {
        self.root.join("reports/eval.json")
    }
    pub fn distribution_md(&self) -> PathBuf {
        self.root.join("reports/profile_distribution.md")
    }
    pub fn coldstart_json(&self) -> PathBuf {
        self.root.join("reports/coldstart.json")
    }
    pub fn coldstart_md(&self) -> PathBuf {
        self.root.join("reports/coldstart.md")
    }
    pub fn injected_dir(&self, slug: &str) -> PathBuf {
        self.root.join(format!("injected/{slug}"))
    }
    pub fn injected_profiles(&self, slug: &str) -> PathBuf {
        self.injected_dir(slug).join("profiles.jsonl")
    }
    pub fn injected_sft(&self, slug: &str) -> PathBuf {
        self.injected_dir(slug).join("sft_test.jsonl")
    }
    pub fn injected_predictions(&self, slug: &str) -> PathBuf {
        self.injected_dir(slug).join("predictions.jsonl")
    }
    pub fn shift_json(&self, slug: &str) -> PathBuf {
        self.injected_dir(slug).join("shift.json")
    }
    pub fn shift_md(&self, slug: &str) -> PathBuf {
        self.injected_dir(slug).join("shift.md")
    }
    pub fn bench_json(&self) -> PathBuf {
        self.root.join("bench/benchmark.json")
    }
    pub fn bench_md(&self) -> PathBuf {
        self.root.join("bench/benchmark.md")
    }
}

/// Directory-safe name for an injected category: lowercase alphanumerics
/// with single dashes ("Gym / Fitness Center" becomes "gym-fitness-center").
pub fn category_slug(name: &str) -> String {
    let mut slug = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c.to_ascii_lowercase());
        } else if !slug.ends_with('-') && !slug.is_empty() {
            slug.push('-');
        }
    }
    slug.trim_end_matches('-').to_string()
}

fn require(path: &Path, stage: &'static str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingArtifact { path: path.to_path_buf(), stage })
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut json = serde_json::to_vec_pretty(value)?;
    json.push(b'\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

fn write_text(text: &str, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parse the raw check-in file, apply the boundary filter when configured,
/// and write the normalized dataset plus parse report.
pub fn stage_ingest(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let parsed = parse_checkin_file(&cfg.dataset.path, cfg.dataset.format)?;
    let before = parsed.dataset.checkins.len();
    let dataset = match &cfg.dataset.boundary {
        Some(path) => {
            let poly = BoundaryPolygon::from_geojson_file(path)?;
            filter_by_boundary(&parsed.dataset, &poly)?
        }
        None => parsed.dataset,
    };
    ensure_parent(&layout.checkins_jsonl())?;
    write_dataset(&dataset, &layout.checkins_jsonl(), &layout.dataset_index())?;
    write_json(&parsed.report, &layout.parse_report())?;
    Ok(format!(
        "ingested {} check-ins ({} users, {} POIs; {} malformed rows, {} outside boundary)",
        dataset.checkins.len(),
        dataset.u,
        dataset.m,
        parsed.report.malformed_rows,
        before - dataset.checkins.len(),
    ))
}

fn load_dataset(layout: &OutputLayout, stage: &'static str) -> Result<Dataset> {
    require(&layout.checkins_jsonl(), stage)?;
    require(&layout.dataset_index(), stage)?;
    read_dataset(&layout.checkins_jsonl(), &layout.dataset_index())
}

/// Cut per-user sessions at the configured gap, drop short sessions and
/// low-activity users, and write the surviving trajectories.
pub fn stage_sessionize(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let dataset = load_dataset(&layout, "sessionize")?;
    let sessions = sessionize(&dataset.checkins, cfg.split.delta_t_seconds);
    let kept = filter_sessions(&sessions, &cfg.split);
    write_trajectories_jsonl(&layout.trajectories_jsonl(), &kept)?;
    Ok(format!(
        "cut {} sessions from {} check-ins; {} sessions over {} users after filters",
        sessions.len(),
        dataset.checkins.len(),
        kept.len(),
        kept.iter().map(|t| t.user_id).collect::<std::collections::BTreeSet<_>>().len(),
    ))
}

/// Chronological split with train-entity pruning, written as three JSONL
/// files plus a manifest of per-stage counts.
pub fn stage_split(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    require(&layout.trajectories_jsonl(), "split")?;
    let trajs = read_trajectories_jsonl(&layout.trajectories_jsonl())?;
    let splits = split(&trajs, &cfg.split)?;
    std::fs::create_dir_all(layout.splits_dir()).map_err(|e| Error::io(&layout.splits_dir(), e))?;
    write_splits(&splits, &layout.splits_dir())?;
    let m = &splits.manifest;
    Ok(format!(
        "split {} trajectories into {} train / {} validation / {} test (test: {} sliced, {} after prune, {} after range)",
        m.total, m.train, m.validation_final, m.test_final, m.test_sliced, m.test_after_prune, m.test_after_range,
    ))
}

fn train_histories(train: &[Trajectory]) -> BTreeMap<u64, Vec<Trajectory>> {
    let mut histories: BTreeMap<u64, Vec<Trajectory>> = BTreeMap::new();
    for t in train {
        histories.entry(t.user_id).or_default().push(t.clone());
    }
    histories
}

/// Generate a profile per train-split user and append to the version store.
/// Unchanged profiles are left at their current version, so re-running
/// without input changes leaves the store byte-identical.
pub fn stage_profile(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let splits = read_splits(&layout.splits_dir())?;
    let histories = train_histories(&splits.train);
    let backend = build_chat_backend(&cfg.backends.profile)?;
    let opts = GenOptions::default();
    let results = generate_profiles(
        &histories,
        backend,
        cfg.generation.max_retries,
        opts,
        cfg.run_timestamp,
        cfg.generation.parallelism,
    )?;

    let store = ProfileStore::open(&layout.profiles_dir())?;
    let existing = store.latest_profiles()?;
    let (mut appended, mut unchanged) = (0usize, 0usize);
    for (profile, attempts) in &results {
        let mut candidate =
            StoredProfile::from_profile(profile, *attempts, opts.temperature, opts.json_mode);
        if let Some(current) = existing.get(&profile.user_id) {
            candidate.version = current.version;
            if &candidate == current {
                unchanged += 1;
                continue;
            }
            candidate.version = 0;
        }
        store.append(&candidate, None)?;
        appended += 1;
    }

    let profiles: Vec<UserProfile> = results.iter().map(|(p, _)| p.clone()).collect();
    write_text(
        &profile_distribution_report(&profiles).to_markdown(),
        &layout.distribution_md(),
    )?;
    Ok(format!(
        "profiled {} users ({appended} new versions, {unchanged} unchanged)",
        results.len()
    ))
}

/// Score every stored profile with every configured judge.
pub fn stage_judge(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    require(&layout.profiles_dir(), "judge")?;
    let store = ProfileStore::open(&layout.profiles_dir())?;
    let stored = store.latest_profiles()?;
    if stored.is_empty() {
        return Err(Error::MissingArtifact { path: layout.profiles_dir(), stage: "judge" });
    }
    let mut scores = Vec::new();
    for judge_cfg in &cfg.backends.judges {
        let backend = build_chat_backend(judge_cfg)?;
        for profile in stored.values() {
            scores.push(judge_profile(
                &profile.to_profile(),
                &*backend,
                cfg.generation.max_retries,
            )?);
        }
    }
    ensure_parent(&layout.judge_scores())?;
    write_scores_jsonl(&layout.judge_scores(), &scores)?;
    let aggregates = aggregate_judge_scores(&scores)?;
    write_text(&aggregates_to_markdown(&aggregates), &layout.judge_summary_md())?;
    let judges = cfg.backends.judges.len();
    Ok(format!(
        "judged {} profiles with {judges} judge{} ({} scores)",
        stored.len(),
        if judges == 1 { "" } else { "s" },
        scores.len()
    ))
}

fn latest_user_profiles(store: &ProfileStore) -> Result<BTreeMap<u64, UserProfile>> {
    Ok(store
        .latest_profiles()?
        .into_iter()
        .map(|(id, sp)| (id, sp.to_profile()))
        .collect())
}

/// Render every split as SFT examples and write them with the training
/// manifest (recipe, reference targets, split provenance).
pub fn stage_emit_sft(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let dataset = load_dataset(&layout, "emit-sft")?;
    let splits = read_splits(&layout.splits_dir())?;
    require(&layout.profiles_dir(), "emit-sft")?;
    let store = ProfileStore::open(&layout.profiles_dir())?;
    let profiles = latest_user_profiles(&store)?;
    if profiles.is_empty() {
        return Err(Error::MissingArtifact { path: layout.profiles_dir(), stage: "emit-sft" });
    }

    let prompt_cfg = cfg.prompt.system();
    let mut files = BTreeMap::new();
    let mut total = 0usize;
    for (name, trajs) in [
        ("train", &splits.train),
        ("validation", &splits.validation),
        ("test", &splits.test),
    ] {
        let examples = build_sft_dataset(
            trajs,
            &profiles,
            &prompt_cfg,
            dataset.m,
            cfg.prompt.chat_template,
        )?;
        let path = layout.sft_split(name);
        ensure_parent(&path)?;
        emit_sft_dataset(&examples, &path)?;
        total += examples.len();
        files.insert(format!("{name}.jsonl"), SftFileStats::of(&examples));
    }
    let manifest = SftManifest {
        prompt_config: prompt_cfg,
        chat_template: cfg.prompt.chat_template,
        poi_count: dataset.m,
        files,
        split: Some(splits.manifest.clone()),
        hyperparameters: TrainingHyperparameters::default(),
        reference_targets: ReferenceTargets::default(),
    };
    write_sft_manifest(&manifest, &layout.sft_manifest())?;
    Ok(format!("emitted {total} SFT examples across train/validation/test"))
}

/// Send every test example to the predictor backend and store raw plus
/// parsed answers.
pub fn stage_predict(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let dataset = load_dataset(&layout, "predict")?;
    require(&layout.sft_split("test"), "predict")?;
    let examples = read_sft_jsonl(&layout.sft_split("test"))?;
    let backend = build_chat_backend(&cfg.backends.predictor)?;
    let records = run_predictions(&examples, &*backend, dataset.m)?;
    ensure_parent(&layout.predictions_jsonl())?;
    write_predictions_jsonl(&records, &layout.predictions_jsonl())?;
    let parsed = records.iter().filter(|r| r.parsed_poi_id.is_some()).count();
    Ok(format!(
        "predicted {} examples ({parsed} parsed, {} correct)",
        records.len(),
        records.iter().filter(|r| r.correct).count()
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub correct: usize,
    pub acc_at_1: f64,
}

/// Score a prediction file. With no override this reads the pipeline's own
/// predictions and records the report; with an explicit file it only
/// computes and reports back.
pub fn stage_eval(cfg: &PipelineConfig, predictions: Option<&Path>) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let default_path = layout.predictions_jsonl();
    let path = predictions.unwrap_or(&default_path);
    require(path, "eval")?;
    let records = read_predictions_jsonl(path)?;
    let acc = accuracy_at_1(&records)?;
    let report = EvalReport {
        examples: records.len(),
        correct: records.iter().filter(|r| r.correct).count(),
        acc_at_1: acc,
    };
    if predictions.is_none() {
        write_json(&report, &layout.eval_report())?;
    }
    Ok(format!("Acc@1: {acc:.4} ({}/{} correct)", report.correct, report.examples))
}

/// Slice prediction accuracy by train-split activity (check-in counts).
pub fn stage_coldstart(cfg: &PipelineConfig) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    require(&layout.predictions_jsonl(), "coldstart")?;
    let records = read_predictions_jsonl(&layout.predictions_jsonl())?;
    let splits = read_splits(&layout.splits_dir())?;
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for t in &splits.train {
        *counts.entry(t.user_id).or_insert(0) += t.len();
    }
    let grouping = group_users_by_activity(&counts);
    let report = cold_start_report(&records, &grouping)?;
    write_json(&report, &layout.coldstart_json())?;
    write_text(&cold_start_to_markdown(&report), &layout.coldstart_md())?;
    let sizes: Vec<String> = report
        .groups
        .iter()
        .map(|(name, g)| format!("{name} {:.4} ({} users)", g.acc_at_1, g.users))
        .collect();
    Ok(format!("cold-start accuracy: {}", sizes.join(", ")))
}

/// Append a short-term preference to every profile, re-predict the test
/// split, and report per-category prediction count shifts against the
/// baseline predictions.
pub fn stage_inject(cfg: &PipelineConfig, category: &str) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    require(&layout.predictions_jsonl(), "inject")?;
    let before = read_predictions_jsonl(&layout.predictions_jsonl())?;
    let dataset = load_dataset(&layout, "inject")?;
    let splits = read_splits(&layout.splits_dir())?;
    require(&layout.profiles_dir(), "inject")?;
    let store = ProfileStore::open(&layout.profiles_dir())?;
    let profiles = latest_user_profiles(&store)?;

    let slug = category_slug(category);
    if slug.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let mut injected = BTreeMap::new();
    for (id, profile) in &profiles {
        injected.insert(*id, inject_preference(profile, category)?);
    }
    let path = layout.injected_profiles(&slug);
    ensure_parent(&path)?;
    let mut out = Vec::new();
    for profile in injected.values() {
        serde_json::to_writer(&mut out, profile)?;
        out.push(b'\n');
    }
    std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;

    let examples = build_sft_dataset(
        &splits.test,
        &injected,
        &cfg.prompt.system(),
        dataset.m,
        cfg.prompt.chat_template,
    )?;
    emit_sft_dataset(&examples, &layout.injected_sft(&slug))?;
    let backend = build_chat_backend(&cfg.backends.predictor)?;
    let after = run_predictions(&examples, &*backend, dataset.m)?;
    write_predictions_jsonl(&after, &layout.injected_predictions(&slug))?;

    let shift = category_shift_report(&before, &after, &dataset.poi_categories())?;
    write_json(&shift, &layout.shift_json(&slug))?;
    write_text(&shift_to_markdown(&shift), &layout.shift_md(&slug))?;
    let delta = shift.categories.get(category).map(|s| s.delta).unwrap_or(0);
    Ok(format!(
        "injected {:?} into {} profiles; predicted-category delta {delta:+}",
        category,
        injected.len()
    ))
}

/// Run the pairwise-DTW vs. profile-generation cost benchmark and write
/// JSON and Markdown reports.
pub fn stage_trajsim_bench(
    cfg: &PipelineConfig,
    sizes: &[usize],
    k: usize,
    users: &[usize],
) -> Result<String> {
    let layout = OutputLayout::new(&cfg.output_dir);
    let report = complexity_benchmark(sizes, k, users, cfg.seed)?;
    write_json(&report, &layout.bench_json())?;
    write_text(&benchmark_to_markdown(&report), &layout.bench_md())?;
    let last = report.growth.last();
    Ok(format!(
        "benchmark outcome {:?}; time ratio {} at k={}",
        report.outcome,
        last.map(|g| format!("{:.2} ({} -> {})", g.time_ratio, g.from_l, g.to_l))
            .unwrap_or_else(|| "n/a".into()),
        report.k
    ))
}

/// The standard nine-stage run: ingest through cold-start analysis.
pub fn run_full_pipeline(cfg: &PipelineConfig) -> Result<Vec<String>> {
    Ok(vec![
        stage_ingest(cfg)?,
        stage_sessionize(cfg)?,
        stage_split(cfg)?,
        stage_profile(cfg)?,
        stage_judge(cfg)?,
        stage_emit_sft(cfg)?,
        stage_predict(cfg)?,
        stage_eval(cfg, None)?,
        stage_coldstart(cfg)?,
    ])
}
