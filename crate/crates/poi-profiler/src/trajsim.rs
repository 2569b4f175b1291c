//! Trajectory similarity, its cost profile, and profile-shift detection.
//!
//! Similarity is classical dynamic time warping over check-in coordinates
//! with haversine point costs, deliberately unwindowed: a single comparison
//! is quadratic in trajectory length, and ranking against L candidates pays
//! that L times plus a sort. [`complexity_benchmark`] measures that growth
//! and contrasts it with profile generation, which costs exactly one
//! backend call per user. [`maybe_update_profile`] is the cheap alternative
//! for drift: embed old and new summaries, compare cosine similarity
//! against a threshold, replace only when they diverge.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use chrono::{TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::backend::{EmbeddingBackend, MockChatBackend};
use crate::error::{Error, Result};
use crate::profiler::{generate_profiles, GenOptions, UserProfile};
use crate::sessionize::Trajectory;
use crate::synth::synthetic_trajectories;

pub const EARTH_RADIUS_METERS: f64 = 6_371_000.0;

/// Great-circle distance between two (lat, lon) degree pairs, in meters.
pub fn haversine_meters(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let sin_dlat = ((lat2 - lat1) / 2.0).sin();
    let sin_dlon = ((lon2 - lon1) / 2.0).sin();
    let h = sin_dlat * sin_dlat + lat1.cos() * lat2.cos() * sin_dlon * sin_dlon;
    2.0 * EARTH_RADIUS_METERS * h.sqrt().min(1.0).asin()
}

fn points_of(t: &Trajectory) -> Vec<(f64, f64)> {
    t.checkins.iter().map(|c| (c.latitude, c.longitude)).collect()
}

/// DTW over raw coordinate sequences: full dynamic program, steps
/// {match, insert, delete}, no window.
pub fn dtw_distance_points(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("trajectory"));
    }
    let cost = |i: usize, j: usize| haversine_meters(a[i], b[j]);
    let mut prev = vec![0.0f64; b.len()];
    prev[0] = cost(0, 0);
    for j in 1..b.len() {
        prev[j] = prev[j - 1] + cost(0, j);
    }
    let mut cur = vec![0.0f64; b.len()];
    for i in 1..a.len() {
        cur[0] = prev[0] + cost(i, 0);
        for j in 1..b.len() {
            cur[j] = cost(i, j) + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[b.len() - 1])
}

/// DTW alignment cost between two trajectories, in meters.
pub fn dtw_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    dtw_distance_points(&points_of(a), &points_of(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedNeighbor {
    pub traj_id: u64,
    pub distance_meters: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub distance_nanos: u64,
    pub sort_nanos: u64,
}

/// Candidates ordered by DTW distance from one query trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRanking {
    pub query_traj_id: u64,
    pub neighbors: Vec<RankedNeighbor>,
    pub timings: PhaseTimings,
}

/// Rank every candidate by distance to the query, ascending, ties by id.
/// The distance pass and the sort are timed separately; both run
/// single-threaded so timings stay comparable across runs.
pub fn rank_similar(query: &Trajectory, candidates: &[Trajectory]) -> Result<SimilarityRanking> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidates"));
    }
    let qp = points_of(query);
    let started = Instant::now();
    let mut neighbors: Vec<RankedNeighbor> = candidates
        .iter()
        .map(|c| {
            Ok(RankedNeighbor {
                traj_id: c.traj_id,
                distance_meters: dtw_distance_points(&qp, &points_of(c))?,
            })
        })
        .collect::<Result<_>>()?;
    let distance_nanos = started.elapsed().as_nanos() as u64;

    let started = Instant::now();
    neighbors.sort_by(|a, b| {
        a.distance_meters
            .total_cmp(&b.distance_meters)
            .then(a.traj_id.cmp(&b.traj_id))
    });
    let sort_nanos = started.elapsed().as_nanos() as u64;

    Ok(SimilarityRanking {
        query_traj_id: query.traj_id,
        neighbors,
        timings: PhaseTimings { distance_nanos, sort_nanos },
    })
}

/// Timings under roughly this value are treated as clock noise.
const MIN_MEASURABLE_NANOS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkOutcome {
    /// Every doubling of L at least tripled DTW wall time and profile
    /// generation made exactly one call per user.
    Confirmed,
    /// A doubling sped up or grew less than 3x: quadratic growth not seen.
    Refuted,
    /// Timings stayed below clock resolution even after doubling sizes.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwRun {
    pub l: usize,
    pub pairs: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatio {
    pub from_l: usize,
    pub to_l: usize,
    pub pair_ratio: f64,
    pub time_ratio: f64,
    /// True when `to_l == 2 * from_l`, where the >= 3.0 check applies.
    pub doubling: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRun {
    pub users: usize,
    pub calls: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub dtw_runs: Vec<DtwRun>,
    pub growth: Vec<GrowthRatio>,
    pub profile_runs: Vec<ProfileRun>,
    pub outcome: BenchmarkOutcome,
    pub retried: bool,
    pub notes: Vec<String>,
}

fn measure_dtw(sizes: &[usize], k: usize, seed: u64) -> Vec<DtwRun> {
    let max_l = *sizes.last().unwrap();
    let trajs = synthetic_trajectories(seed, max_l, k);
    let points: Vec<Vec<(f64, f64)>> = trajs.iter().map(points_of).collect();
    sizes
        .iter()
        .map(|&l| {
            let started = Instant::now();
            let mut pairs = 0u64;
            for i in 0..l {
                for j in i + 1..l {
                    dtw_distance_points(&points[i], &points[j]).unwrap();
                    pairs += 1;
                }
            }
            DtwRun {
                l,
                pairs,
                wall_nanos: started.elapsed().as_nanos() as u64,
            }
        })
        .collect()
}

/// Measure all-pairs DTW wall time at each candidate-set size L (with
/// trajectories of length `k`) and mock profile generation at each user
/// count. Sizes must be ascending. If any DTW bucket lands under clock
/// resolution, every size is doubled and the run repeats once; a second
/// miss reports [`BenchmarkOutcome::Inconclusive`].
pub fn complexity_benchmark(
    sizes: &[usize],
    k: usize,
    users: &[usize],
    seed: u64,
) -> Result<BenchmarkReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "benchmark needs at least two strictly ascending sizes".into(),
        ));
    }
    if k < 2 || sizes[0] < 2 || users.is_empty() {
        return Err(Error::InvalidConfig(
            "benchmark needs k >= 2, sizes >= 2, and at least one user count".into(),
        ));
    }

    let mut notes = Vec::new();
    let mut sizes_used: Vec<usize> = sizes.to_vec();
    let mut dtw_runs = measure_dtw(&sizes_used, k, seed);
    let mut retried = false;
    if dtw_runs.iter().any(|r| r.wall_nanos < MIN_MEASURABLE_NANOS) {
        retried = true;
        sizes_used = sizes.iter().map(|&l| l * 2).collect();
        notes.push(format!(
            "timings under {MIN_MEASURABLE_NANOS} ns; retrying once with sizes {sizes_used:?}"
        ));
        dtw_runs = measure_dtw(&sizes_used, k, seed);
    }
    let measurable = dtw_runs.iter().all(|r| r.wall_nanos >= MIN_MEASURABLE_NANOS);

    let growth: Vec<GrowthRatio> = dtw_runs
        .windows(2)
        .map(|w| GrowthRatio {
            from_l: w[0].l,
            to_l: w[1].l,
            pair_ratio: w[1].pairs as f64 / w[0].pairs as f64,
            time_ratio: w[1].wall_nanos as f64 / w[0].wall_nanos.max(1) as f64,
            doubling: w[1].l == 2 * w[0].l,
        })
        .collect();

    let mut profile_runs = Vec::with_capacity(users.len());
    let mut calls_linear = true;
    for &u in users {
        let trajs = synthetic_trajectories(seed ^ 0x9e37_79b9, u, 4);
        let mut histories = std::collections::BTreeMap::new();
        for t in trajs {
            histories.entry(t.user_id).or_insert_with(Vec::new).push(t);
        }
        let backend = Arc::new(MockChatBackend::new(seed).with_model("mock-bench"));
        let started = Instant::now();
        generate_profiles(
            &histories,
            backend.clone(),
            2,
            GenOptions::default(),
            Utc.with_ymd_and_hms(2012, 4, 3, 0, 0, 0).unwrap(),
            1,
        )?;
        let wall_nanos = started.elapsed().as_nanos() as u64;
        let calls = backend.calls();
        if calls != u as u64 {
            calls_linear = false;
            notes.push(format!("expected {u} profile calls, saw {calls}"));
        }
        profile_runs.push(ProfileRun { users: u, calls, wall_nanos });
    }

    let quadratic_seen = growth
        .iter()
        .filter(|g| g.doubling)
        .all(|g| g.time_ratio >= 3.0);
    let outcome = if !measurable {
        BenchmarkOutcome::Inconclusive
    } else if quadratic_seen && calls_linear {
        BenchmarkOutcome::Confirmed
    } else {
        BenchmarkOutcome::Refuted
    };

    Ok(BenchmarkReport {
        k,
        sizes: sizes_used,
        dtw_runs,
        growth,
        profile_runs,
        outcome,
        retried,
        notes,
    })
}

pub fn benchmark_to_markdown(report: &BenchmarkReport) -> String {
    let mut out = String::from("## Pairwise distance cost vs. profile generation cost\n\n");
    out.push_str(&format!(
        "Trajectory length k = {}, outcome: {:?}\n\n",
        report.k, report.outcome
    ));
    out.push_str("| L | DTW pairs | Wall time (ms) |\n| --- | --- | --- |\n");
    for r in &report.dtw_runs {
        out.push_str(&format!(
            "| {} | {} | {:.3} |\n",
            r.l,
            r.pairs,
            r.wall_nanos as f64 / 1e6
        ));
    }
    out.push_str("\n| L growth | Pair ratio | Time ratio |\n| --- | --- | --- |\n");
    for g in &report.growth {
        out.push_str(&format!(
            "| {} -> {} | {:.2} | {:.2} |\n",
            g.from_l, g.to_l, g.pair_ratio, g.time_ratio
        ));
    }
    out.push_str("\n| Users | Backend calls | Wall time (ms) |\n| --- | --- | --- |\n");
    for p in &report.profile_runs {
        out.push_str(&format!(
            "| {} | {} | {:.3} |\n",
            p.users,
            p.calls,
            p.wall_nanos as f64 / 1e6
        ));
    }
    for note in &report.notes {
        out.push_str(&format!("\n{note}\n"));
    }
    out
}

/// Cosine similarity with exact handling of the identical case: bitwise
/// equal vectors score 1.0 regardless of rounding in the norms.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftAction {
    Keep,
    Replace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub user_id: u64,
    pub similarity: f64,
    pub threshold: f64,
    pub action: ShiftAction,
}

/// When to replace a stored profile with a freshly generated candidate:
/// only when the summaries' embedding similarity drops below `threshold`.
pub struct ProfileShiftPolicy {
    pub embedding: Arc<dyn EmbeddingBackend>,
    pub threshold: f64,
    log: Mutex<Vec<ShiftRecord>>,
}

impl ProfileShiftPolicy {
    /// Threshold must lie in [-1, 1]; -1 can never trigger a replacement.
    pub fn new(embedding: Arc<dyn EmbeddingBackend>, threshold: f64) -> Result<ProfileShiftPolicy> {
        if !(-1.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidConfig(format!(
                "similarity threshold {threshold} outside [-1, 1]"
            )));
        }
        Ok(ProfileShiftPolicy {
            embedding,
            threshold,
            log: Mutex::new(Vec::new()),
        })
    }

    pub fn decisions(&self) -> Vec<ShiftRecord> {
        self.log.lock().unwrap().clone()
    }
}

/// Decide whether `candidate` should replace `old` for the same user:
/// embed both summaries, compare cosine similarity to the policy threshold,
/// and append the decision to the policy log.
pub fn maybe_update_profile(
    old: &UserProfile,
    candidate: &UserProfile,
    policy: &ProfileShiftPolicy,
) -> Result<ShiftRecord> {
    if old.user_id != candidate.user_id {
        return Err(Error::UserMismatch(old.user_id, candidate.user_id));
    }
    let old_vec = policy.embedding.embed(&old.summary)?;
    let new_vec = policy.embedding.embed(&candidate.summary)?;
    let similarity = cosine_similarity(&new_vec, &old_vec);
    let action = if similarity < policy.threshold {
        ShiftAction::Replace
    } else {
        ShiftAction::Keep
    };
    let record = ShiftRecord {
        user_id: old.user_id,
        similarity,
        threshold: policy.threshold,
        action,
    };
    policy.log.lock().unwrap().push(record.clone());
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::MockEmbeddingBackend;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force DTW: enumerate every monotone alignment path and take
    /// the cheapest. Exponential, usable only for tiny inputs.
    fn dtw_oracle(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
        fn walk(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, j: usize, acc: f64, best: &mut f64) {
            let acc = acc + haversine_meters(a[i], b[j]);
            if i == a.len() - 1 && j == b.len() - 1 {
                *best = best.min(acc);
                return;
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, acc, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, acc, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, &mut best);
        best
    }

    fn random_points(rng: &mut ChaCha8Rng, len: usize) -> Vec<(f64, f64)> {
        (0..len)
            .map(|_| (rng.gen_range(-80.0..80.0), rng.gen_range(-179.0..179.0)))
            .collect()
    }

    #[test]
    fn one_degree_of_latitude() {
        let d = haversine_meters((0.0, 0.0), (1.0, 0.0));
        let expected = EARTH_RADIUS_METERS * std::f64::consts::PI / 180.0;
        assert!((d - expected).abs() < 1e-6, "{d} vs {expected}");
        assert!((d - 111_194.9).abs() < 1.0);
    }

    #[test]
    fn identity_distance_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let len = rng.gen_range(1..12);
            let pts = random_points(&mut rng, len);
            assert_eq!(dtw_distance_points(&pts, &pts).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_points_reduce_to_haversine() {
        let a = [(40.7, -74.0)];
        let b = [(41.7, -74.0)];
        let d = dtw_distance_points(&a, &b).unwrap();
        assert_eq!(d, haversine_meters(a[0], b[0]));
    }

    #[test]
    fn empty_trajectories_are_refused() {
        assert!(matches!(
            dtw_distance_points(&[], &[(0.0, 0.0)]),
            Err(Error::EmptyInput("trajectory"))
        ));
        assert!(matches!(
            dtw_distance_points(&[(0.0, 0.0)], &[]),
            Err(Error::EmptyInput("trajectory"))
        ));
    }

    #[test]
    fn matches_path_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (la, lb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
            let a = random_points(&mut rng, la);
            let b = random_points(&mut rng, lb);
            let fast = dtw_distance_points(&a, &b).unwrap();
            let slow = dtw_oracle(&a, &b);
            let denom = slow.abs().max(1.0);
            assert!(
                ((fast - slow) / denom).abs() <= 1e-9,
                "dp {fast} vs oracle {slow}"
            );
        }
    }

    #[test]
    fn distance_is_symmetric_and_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (la, lb) = (rng.gen_range(1..10), rng.gen_range(1..10));
            let a = random_points(&mut rng, la);
            let b = random_points(&mut rng, lb);
            let ab = dtw_distance_points(&a, &b).unwrap();
            let ba = dtw_distance_points(&b, &a).unwrap();
            assert!(ab >= 0.0);
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn ranking_puts_the_query_itself_first_at_zero() {
        let trajs = synthetic_trajectories(5, 10, 6);
        let ranking = rank_similar(&trajs[4], &trajs).unwrap();
        assert_eq!(ranking.query_traj_id, 4);
        assert_eq!(ranking.neighbors[0].traj_id, 4);
        assert_eq!(ranking.neighbors[0].distance_meters, 0.0);
        assert_eq!(ranking.neighbors.len(), 10);
    }

    #[test]
    fn collinear_candidates_rank_by_distance() {
        let point_traj = |id: u64, lat: f64| {
            Trajectory::from_checkins(
                id,
                id,
                vec![crate::ingest::CheckIn {
                    user_id: id,
                    poi_id: 0,
                    category_id: 0,
                    category_name: "Synthetic".into(),
                    latitude: lat,
                    longitude: 0.0,
                    timestamp: Utc.with_ymd_and_hms(2012, 1, 1, 0, 0, 0).unwrap(),
                }],
            )
        };
        let query = point_traj(99, 0.0);
        let candidates = vec![point_traj(0, 3.0), point_traj(1, 1.0), point_traj(2, 2.0)];
        let ranking = rank_similar(&query, &candidates).unwrap();
        let order: Vec<u64> = ranking.neighbors.iter().map(|n| n.traj_id).collect();
        assert_eq!(order, vec![1, 2, 0]);
        assert!(ranking.neighbors.windows(2).all(|w| w[0].distance_meters
            <= w[1].distance_meters));
    }

    #[test]
    fn ranking_matches_a_naive_oracle() {
        let trajs = synthetic_trajectories(6, 50, 5);
        let query = synthetic_trajectories(7, 1, 5).pop().unwrap();
        let ranking = rank_similar(&query, &trajs).unwrap();
        let mut oracle: Vec<(f64, u64)> = trajs
            .iter()
            .map(|t| (dtw_distance(&query, t).unwrap(), t.traj_id))
            .collect();
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let got: Vec<(f64, u64)> = ranking
            .neighbors
            .iter()
            .map(|n| (n.distance_meters, n.traj_id))
            .collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn empty_candidates_are_refused() {
        let trajs = synthetic_trajectories(5, 1, 4);
        assert!(matches!(
            rank_similar(&trajs[0], &[]),
            Err(Error::EmptyInput("candidates"))
        ));
    }

    #[test]
    fn benchmark_counts_pairs_and_calls_exactly() {
        let report = complexity_benchmark(&[8, 16], 6, &[5, 10], 11).unwrap();
        // Sizes may have been doubled once on a fast machine; pair counts
        // must be C(L, 2) for whatever sizes were actually run.
        for run in &report.dtw_runs {
            assert_eq!(run.pairs, (run.l * (run.l - 1) / 2) as u64);
        }
        assert_eq!(report.profile_runs.len(), 2);
        assert_eq!(report.profile_runs[0].calls, 5);
        assert_eq!(report.profile_runs[1].calls, 10);
        assert!(report.growth[0].doubling);
        assert!(report.growth[0].pair_ratio > 3.0);
        assert!(matches!(
            report.outcome,
            BenchmarkOutcome::Confirmed | BenchmarkOutcome::Inconclusive
        ));
        if report.outcome == BenchmarkOutcome::Inconclusive {
            assert!(report.retried);
        }
        let md = benchmark_to_markdown(&report);
        assert!(md.contains("| Users | Backend calls |"));
    }

    #[test]
    fn benchmark_rejects_bad_shapes() {
        assert!(complexity_benchmark(&[16, 8], 6, &[5], 1).is_err());
        assert!(complexity_benchmark(&[16], 6, &[5], 1).is_err());
        assert!(complexity_benchmark(&[8, 16], 6, &[], 1).is_err());
        assert!(complexity_benchmark(&[8, 16], 1, &[5], 1).is_err());
    }

    fn profile_with_summary(user_id: u64, summary: &str) -> UserProfile {
        UserProfile {
            user_id,
            traits: vec!["extroverted".into()],
            attributes: vec!["adult".into()],
            preferences: vec![],
            routines: vec![],
            summary: summary.into(),
            generated_at: Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap(),
            source_model: "m".into(),
        }
    }

    #[test]
    fn identical_summaries_keep_the_profile() {
        let policy =
            ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 0.85).unwrap();
        let old = profile_with_summary(4, "enjoys quiet bookshops and long walks");
        let new = profile_with_summary(4, "enjoys quiet bookshops and long walks");
        let record = maybe_update_profile(&old, &new, &policy).unwrap();
        assert_eq!(record.similarity, 1.0);
        assert_eq!(record.action, ShiftAction::Keep);
    }

    #[test]
    fn disjoint_summaries_replace_at_default_threshold() {
        let policy =
            ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 0.85).unwrap();
        let old = profile_with_summary(4, "alpha bravo charlie");
        let new = profile_with_summary(4, "delta echo foxtrot");
        let record = maybe_update_profile(&old, &new, &policy).unwrap();
        assert_eq!(record.similarity, 0.0);
        assert_eq!(record.action, ShiftAction::Replace);
    }

    #[test]
    fn threshold_minus_one_never_replaces() {
        let policy =
            ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), -1.0).unwrap();
        let old = profile_with_summary(4, "alpha bravo charlie");
        let new = profile_with_summary(4, "delta echo foxtrot");
        let record = maybe_update_profile(&old, &new, &policy).unwrap();
        assert_eq!(record.action, ShiftAction::Keep);
    }

    #[test]
    fn cross_user_comparison_is_refused() {
        let policy =
            ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 0.85).unwrap();
        let old = profile_with_summary(4, "a");
        let new = profile_with_summary(5, "a");
        assert!(matches!(
            maybe_update_profile(&old, &new, &policy),
            Err(Error::UserMismatch(4, 5))
        ));
        assert!(policy.decisions().is_empty());
    }

    #[test]
    fn decision_log_accumulates_in_order() {
        let policy =
            ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 0.85).unwrap();
        let old = profile_with_summary(4, "alpha bravo charlie");
        maybe_update_profile(&old, &profile_with_summary(4, "alpha bravo charlie"), &policy)
            .unwrap();
        maybe_update_profile(&old, &profile_with_summary(4, "delta echo foxtrot"), &policy)
            .unwrap();
        let log = policy.decisions();
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].action, ShiftAction::Keep);
        assert_eq!(log[1].action, ShiftAction::Replace);
    }

    #[test]
    fn out_of_range_threshold_is_rejected() {
        assert!(ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), 1.5).is_err());
        assert!(ProfileShiftPolicy::new(Arc::new(MockEmbeddingBackend::new()), -1.5).is_err());
    }

    #[test]
    fn cosine_handles_zero_vectors() {
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert_eq!(cosine_similarity(&[0.0], &[0.0]), 1.0); // bitwise equal
        assert_eq!(cosine_similarity(&[1.0, 2.0], &[1.0, 2.0]), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 3.0]), 0.0);
    }
}
