//! Trajectory formation, user/session filtering, and chronological splits.
//!
//! A trajectory (session) is a user's run of consecutive check-ins whose
//! span from the first check-in stays within `delta_t`. Filtering drops
//! short sessions first and thin users second. Splitting slices the global
//! chronological stream at fixed fractions, then prunes validation and test
//! down to users and POIs seen in train.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CheckIn;

/// One session of check-ins by a single user.
///
/// `checkins` are time-ordered (ties permitted) and `end - start` never
/// exceeds the `delta_t` used at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub traj_id: u64,
    pub user_id: u64,
    pub checkins: Vec<CheckIn>,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Trajectory {
    /// Build from non-empty, time-ordered check-ins of one user.
    pub fn from_checkins(traj_id: u64, user_id: u64, checkins: Vec<CheckIn>) -> Trajectory {
        debug_assert!(!checkins.is_empty());
        debug_assert!(checkins.iter().all(|c| c.user_id == user_id));
        let start = checkins.first().unwrap().timestamp;
        let end = checkins.last().unwrap().timestamp;
        Trajectory {
            traj_id,
            user_id,
            checkins,
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.checkins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkins.is_empty()
    }
}

/// Split protocols: fractions are (train, validation, test).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitProtocol {
    #[serde(rename = "chrono_80_10_10")]
    Chrono801010,
    #[serde(rename = "chrono_70_10_20")]
    Chrono701020,
}

impl SplitProtocol {
    /// Boundary indices `(train_end, validation_end)` over `n` trajectories.
    pub fn boundaries(&self, n: usize) -> (usize, usize) {
        match self {
            SplitProtocol::Chrono801010 => (n * 8 / 10, n * 9 / 10),
            SplitProtocol::Chrono701020 => (n * 7 / 10, n * 8 / 10),
        }
    }
}

/// How the test cap picks trajectories when the pruned test set is larger
/// than `test_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CapSampling {
    /// First `test_cap` trajectories in chronological order (default).
    Chronological,
    /// Seeded sample without replacement, re-sorted chronologically.
    Random { seed: u64 },
}

impl Default for CapSampling {
    fn default() -> Self {
        CapSampling::Chronological
    }
}

/// Full sessionization and split parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub protocol: SplitProtocol,
    pub delta_t_seconds: u64,
    pub min_sessions_per_user: usize,
    pub min_checkins_per_session: usize,
    /// Inclusive per-user session-count window for test membership; only
    /// consulted under `chrono_70_10_20`.
    pub test_user_session_range: Option<(usize, usize)>,
    /// Upper bound on test size; only consulted under `chrono_70_10_20`.
    pub test_cap: Option<usize>,
    #[serde(default)]
    pub cap_sampling: CapSampling,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            protocol: SplitProtocol::Chrono801010,
            delta_t_seconds: 24 * 3600,
            min_sessions_per_user: 5,
            min_checkins_per_session: 4,
            test_user_session_range: None,
            test_cap: None,
            cap_sampling: CapSampling::Chronological,
        }
    }
}

/// Counts recorded at each split stage, plus the `SplitSpec` that produced
/// them.
/// `*_sliced` counts are pre-prune, straight from the boundary arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub spec: SplitSpec,
    pub total: usize,
    pub train: usize,
    pub validation_sliced: usize,
    pub validation_final: usize,
    pub test_sliced: usize,
    pub test_after_prune: usize,
    pub test_after_range: usize,
    pub test_final: usize,
}

/// Train/validation/test trajectories with stage-count provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplits {
    pub train: Vec<Trajectory>,
    pub validation: Vec<Trajectory>,
    pub test: Vec<Trajectory>,
    pub manifest: SplitManifest,
}

/// Greedy per-user session grouping: a session opens at its first check-in
/// and absorbs subsequent check-ins while `t - session_start <= delta_t`.
///
/// Trajectory ids are assigned sequentially over users ascending, sessions
/// in time order.
pub fn sessionize(checkins: &[CheckIn], delta_t_seconds: u64) -> Vec<Trajectory> {
    let delta = Duration::seconds(delta_t_seconds as i64);
    let mut by_user: BTreeMap<u64, Vec<CheckIn>> = BTreeMap::new();
    for c in checkins {
        by_user.entry(c.user_id).or_default().push(c.clone());
    }

    let mut out = Vec::new();
    let mut next_id = 0u64;
    for (user_id, mut stream) in by_user {
        stream.sort_by_key(|c| c.timestamp);
        let mut current: Vec<CheckIn> = Vec::new();
        for c in stream {
            match current.first() {
                Some(first) if c.timestamp - first.timestamp <= delta => current.push(c),
                Some(_) => {
                    out.push(Trajectory::from_checkins(
                        next_id,
                        user_id,
                        std::mem::take(&mut current),
                    ));
                    next_id += 1;
                    current.push(c);
                }
                None => current.push(c),
            }
        }
        if !current.is_empty() {
            out.push(Trajectory::from_checkins(next_id, user_id, current));
            next_id += 1;
        }
    }
    out
}

/// Drop sessions shorter than `min_checkins_per_session`, then users whose
/// remaining session count is below `min_sessions_per_user`. Order and
/// trajectory ids are preserved.
pub fn filter_sessions(trajs: &[Trajectory], spec: &SplitSpec) -> Vec<Trajectory> {
    let long_enough: Vec<&Trajectory> = trajs
        .iter()
        .filter(|t| t.len() >= spec.min_checkins_per_session)
        .collect();
    let mut per_user: BTreeMap<u64, usize> = BTreeMap::new();
    for t in &long_enough {
        *per_user.entry(t.user_id).or_default() += 1;
    }
    long_enough
        .into_iter()
        .filter(|t| per_user[&t.user_id] >= spec.min_sessions_per_user)
        .cloned()
        .collect()
}

/// Chronological split with train-entity pruning.
///
/// Order of operations: sort by `(start, traj_id)`, slice at the protocol
/// boundaries, prune validation/test to train-seen users and POIs, then
/// (under `chrono_70_10_20` only) restrict test users by session count and
/// cap the test size. Session counts for the range check are taken over the
/// full input, not the test slice.
pub fn split(trajs: &[Trajectory], spec: &SplitSpec) -> Result<DatasetSplits> {
    let mut ordered: Vec<&Trajectory> = trajs.iter().collect();
    ordered.sort_by_key(|t| (t.start, t.traj_id));
    let n = ordered.len();
    if n < 10 {
        return Err(Error::TooFewTrajectories(n));
    }

    let (a, b) = spec.protocol.boundaries(n);
    let train: Vec<Trajectory> = ordered[..a].iter().map(|t| (*t).clone()).collect();
    let validation_sliced = b - a;
    let test_sliced = n - b;

    let mut train_users = BTreeSet::new();
    let mut train_pois = BTreeSet::new();
    for t in &train {
        train_users.insert(t.user_id);
        for c in &t.checkins {
            train_pois.insert(c.poi_id);
        }
    }
    let seen = |t: &Trajectory| {
        train_users.contains(&t.user_id) && t.checkins.iter().all(|c| train_pois.contains(&c.poi_id))
    };

    let validation: Vec<Trajectory> = ordered[a..b]
        .iter()
        .filter(|t| seen(t))
        .map(|t| (*t).clone())
        .collect();
    let mut test: Vec<Trajectory> = ordered[b..]
        .iter()
        .filter(|t| seen(t))
        .map(|t| (*t).clone())
        .collect();
    let test_after_prune = test.len();

    let extras = spec.protocol == SplitProtocol::Chrono701020;
    if extras {
        if let Some((lo, hi)) = spec.test_user_session_range {
            let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
            for t in trajs {
                *counts.entry(t.user_id).or_default() += 1;
            }
            test.retain(|t| (lo..=hi).contains(&counts[&t.user_id]));
        }
    }
    let test_after_range = test.len();

    if extras {
        if let Some(cap) = spec.test_cap {
            if test.len() > cap {
                match spec.cap_sampling {
                    CapSampling::Chronological => test.truncate(cap),
                    CapSampling::Random { seed } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let mut idx: Vec<usize> = (0..test.len()).collect();
                        idx.shuffle(&mut rng);
                        idx.truncate(cap);
                        idx.sort_unstable();
                        test = idx.into_iter().map(|i| test[i].clone()).collect();
                    }
                }
            }
        }
    }

    let manifest = SplitManifest {
        spec: spec.clone(),
        total: n,
        train: train.len(),
        validation_sliced,
        validation_final: validation.len(),
        test_sliced,
        test_after_prune,
        test_after_range,
        test_final: test.len(),
    };
    Ok(DatasetSplits {
        train,
        validation,
        test,
        manifest,
    })
}

/// Serialize trajectories as JSON lines.
pub fn write_trajectories_jsonl(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let mut out = Vec::new();
    for t in trajs {
        serde_json::to_writer(&mut out, t)?;
        out.push(b'\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read trajectories written by [`write_trajectories_jsonl`].
pub fn read_trajectories_jsonl(path: &Path) -> Result<Vec<Trajectory>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// Write `train.jsonl`, `validation.jsonl`, `test.jsonl`, `manifest.json`
/// into `dir`.
pub fn write_splits(splits: &DatasetSplits, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_trajectories_jsonl(&dir.join("train.jsonl"), &splits.train)?;
    write_trajectories_jsonl(&dir.join("validation.jsonl"), &splits.validation)?;
    write_trajectories_jsonl(&dir.join("test.jsonl"), &splits.test)?;
    let manifest_path = dir.join("manifest.json");
    let mut json = serde_json::to_vec_pretty(&splits.manifest)?;
    json.push(b'\n');
    std::fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))
}

/// Read splits written by [`write_splits`].
pub fn read_splits(dir: &Path) -> Result<DatasetSplits> {
    let manifest_path = dir.join("manifest.json");
    let manifest = std::fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(&manifest_path, e))
        .map_err(|_| Error::MissingArtifact {
            path: manifest_path.clone(),
            stage: "split",
        })?;
    Ok(DatasetSplits {
        train: read_trajectories_jsonl(&dir.join("train.jsonl"))?,
        validation: read_trajectories_jsonl(&dir.join("validation.jsonl"))?,
        test: read_trajectories_jsonl(&dir.join("test.jsonl"))?,
        manifest: serde_json::from_str(&manifest)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn checkin(user_id: u64, hour: i64) -> CheckIn {
        checkin_poi(user_id, hour, (hour.unsigned_abs() % 7) as u64)
    }

    fn checkin_poi(user_id: u64, hour: i64, poi_id: u64) -> CheckIn {
        CheckIn {
            user_id,
            poi_id,
            category_id: poi_id % 3,
            category_name: format!("Category {}", poi_id % 3),
            latitude: 40.7,
            longitude: -74.0,
            timestamp: Utc.with_ymd_and_hms(2012, 4, 1, 0, 0, 0).unwrap()
                + Duration::hours(hour),
        }
    }

    fn traj(traj_id: u64, user_id: u64, hours: &[i64]) -> Trajectory {
        let checkins: Vec<CheckIn> = hours.iter().map(|&h| checkin(user_id, h)).collect();
        Trajectory::from_checkins(traj_id, user_id, checkins)
    }

    #[test]
    fn span_rule_splits_at_delta() {
        let checkins: Vec<CheckIn> = [0, 10, 71, 80].iter().map(|&h| checkin(1, h)).collect();
        let sessions = sessionize(&checkins, 72 * 3600);
        assert_eq!(sessions.len(), 2);
        assert_eq!(sessions[0].len(), 3);
        assert_eq!(sessions[1].len(), 1);
        assert_eq!(sessions[0].traj_id, 0);
        assert_eq!(sessions[1].traj_id, 1);
    }

    #[test]
    fn single_checkin_is_one_session() {
        let sessions = sessionize(&[checkin(1, 5)], 24 * 3600);
        assert_eq!(sessions.len(), 1);
        assert_eq!(sessions[0].len(), 1);
        assert_eq!(sessions[0].start, sessions[0].end);
    }

    /// O(n²) oracle: repeatedly scan the whole remaining stream from each
    /// session start.
    fn rescan_oracle(checkins: &[CheckIn], delta_t_seconds: u64) -> Vec<Vec<DateTime<Utc>>> {
        let delta = Duration::seconds(delta_t_seconds as i64);
        let mut remaining: Vec<&CheckIn> = checkins.iter().collect();
        remaining.sort_by_key(|c| c.timestamp);
        let mut sessions = Vec::new();
        while let Some(first) = remaining.first().copied() {
            let mut session = Vec::new();
            let mut rest = Vec::new();
            for c in remaining {
                if c.timestamp - first.timestamp <= delta {
                    session.push(c.timestamp);
                } else {
                    rest.push(c);
                }
            }
            sessions.push(session);
            remaining = rest;
        }
        sessions
    }

    #[test]
    fn greedy_matches_rescan_oracle_on_random_streams() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let hours: Vec<i64> = (0..50).map(|_| rng.gen_range(0..500)).collect();
            let checkins: Vec<CheckIn> = hours.iter().map(|&h| checkin(1, h)).collect();
            let got: Vec<Vec<DateTime<Utc>>> = sessionize(&checkins, 24 * 3600)
                .into_iter()
                .map(|t| t.checkins.iter().map(|c| c.timestamp).collect())
                .collect();
            assert_eq!(got, rescan_oracle(&checkins, 24 * 3600));
        }
    }

    #[test]
    fn sessions_never_exceed_span_and_union_is_input() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let checkins: Vec<CheckIn> = (0..200)
            .map(|_| checkin(rng.gen_range(0..5), rng.gen_range(0..2000)))
            .collect();
        let delta = 24 * 3600;
        let sessions = sessionize(&checkins, delta);
        let mut total = 0;
        for s in &sessions {
            total += s.len();
            assert!(s.end - s.start <= Duration::seconds(delta as i64));
            assert!(s.checkins.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        }
        assert_eq!(total, checkins.len());
    }

    #[test]
    fn filter_keeps_boundary_user() {
        let spec = SplitSpec::default(); // min 4 check-ins, 5 sessions
        let trajs: Vec<Trajectory> = (0..5).map(|i| traj(i, 1, &[0, 1, 2, 3])).collect();
        assert_eq!(filter_sessions(&trajs, &spec).len(), 5);
    }

    #[test]
    fn filter_cascades_session_drop_into_user_drop() {
        let spec = SplitSpec::default();
        let mut trajs = vec![traj(0, 1, &[0, 1, 2])]; // 3 check-ins, dropped
        trajs.extend((1..5).map(|i| traj(i, 1, &[0, 1, 2, 3])));
        // 4 surviving sessions < 5 → user dropped entirely.
        assert!(filter_sessions(&trajs, &spec).is_empty());
    }

    #[test]
    fn split_boundaries_are_floor_arithmetic() {
        let trajs: Vec<Trajectory> = (0..10).map(|i| traj(i, 0, &[i as i64 * 100])).collect();
        let spec = SplitSpec::default();
        let splits = split(&trajs, &spec).unwrap();
        assert_eq!(splits.manifest.train, 8);
        assert_eq!(splits.manifest.validation_sliced, 1);
        assert_eq!(splits.manifest.test_sliced, 1);
    }

    #[test]
    fn too_few_trajectories_refused() {
        let trajs: Vec<Trajectory> = (0..9).map(|i| traj(i, 0, &[i as i64])).collect();
        let err = split(&trajs, &SplitSpec::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewTrajectories(9)));
    }

    #[test]
    fn unseen_poi_or_user_is_pruned() {
        // 12 trajectories: first 9 are user 0 on POIs 0-2, the 10th is user
        // 0 on a novel POI, the last two are a novel user.
        let mut trajs: Vec<Trajectory> = (0..9)
            .map(|i| {
                let c = vec![checkin_poi(0, i as i64 * 10, i as u64 % 3)];
                Trajectory::from_checkins(i, 0, c)
            })
            .collect();
        trajs.push(Trajectory::from_checkins(9, 0, vec![checkin_poi(0, 90, 99)]));
        trajs.push(Trajectory::from_checkins(10, 7, vec![checkin_poi(7, 100, 0)]));
        trajs.push(Trajectory::from_checkins(11, 7, vec![checkin_poi(7, 110, 1)]));

        let splits = split(&trajs, &SplitSpec::default()).unwrap();
        // Boundaries: n=12 → train 9, val [9..10], test [10..12].
        assert_eq!(splits.manifest.train, 9);
        // Validation slice holds the novel-POI trajectory → pruned away.
        assert_eq!(splits.manifest.validation_sliced, 1);
        assert_eq!(splits.manifest.validation_final, 0);
        // Test slice holds the novel-user trajectories → pruned away.
        assert_eq!(splits.manifest.test_sliced, 2);
        assert_eq!(splits.manifest.test_final, 0);
    }

    #[test]
    fn start_ties_break_by_traj_id() {
        let mut trajs: Vec<Trajectory> = (0..10).map(|i| traj(i, 0, &[0])).collect();
        trajs.reverse(); // input order must not matter
        let splits = split(&trajs, &SplitSpec::default()).unwrap();
        let train_ids: Vec<u64> = splits.train.iter().map(|t| t.traj_id).collect();
        assert_eq!(train_ids, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(splits.validation[0].traj_id, 8);
        assert_eq!(splits.test[0].traj_id, 9);
    }

    /// Independent brute-force oracle for the 70/10/20 protocol.
    fn oracle_70_10_20(
        trajs: &[Trajectory],
        range: (usize, usize),
        cap: usize,
    ) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
        let mut ordered: Vec<&Trajectory> = trajs.iter().collect();
        ordered.sort_by_key(|t| (t.start, t.traj_id));
        let n = ordered.len();
        let train: Vec<&Trajectory> = ordered[..n * 7 / 10].to_vec();
        let users: BTreeSet<u64> = train.iter().map(|t| t.user_id).collect();
        let pois: BTreeSet<u64> = train
            .iter()
            .flat_map(|t| t.checkins.iter().map(|c| c.poi_id))
            .collect();
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for t in trajs {
            *counts.entry(t.user_id).or_default() += 1;
        }
        let ok = |t: &Trajectory| {
            users.contains(&t.user_id) && t.checkins.iter().all(|c| pois.contains(&c.poi_id))
        };
        let val: Vec<u64> = ordered[n * 7 / 10..n * 8 / 10]
            .iter()
            .filter(|t| ok(t))
            .map(|t| t.traj_id)
            .collect();
        let test: Vec<u64> = ordered[n * 8 / 10..]
            .iter()
            .filter(|t| ok(t))
            .filter(|t| counts[&t.user_id] >= range.0 && counts[&t.user_id] <= range.1)
            .map(|t| t.traj_id)
            .take(cap)
            .collect();
        (train.iter().map(|t| t.traj_id).collect(), val, test)
    }

    fn random_corpus(seed: u64, n: u64) -> Vec<Trajectory> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let user = rng.gen_range(0..30u64);
                let start = rng.gen_range(0..5000i64);
                let len = rng.gen_range(1..4);
                let checkins: Vec<CheckIn> = (0..len)
                    .map(|j| checkin_poi(user, start + j, rng.gen_range(0..40)))
                    .collect();
                Trajectory::from_checkins(i, user, checkins)
            })
            .collect()
    }

    #[test]
    fn seventy_ten_twenty_matches_brute_force_oracle() {
        for seed in [1u64, 2, 3] {
            let trajs = random_corpus(seed, 200);
            let spec = SplitSpec {
                protocol: SplitProtocol::Chrono701020,
                test_user_session_range: Some((3, 50)),
                test_cap: Some(200),
                ..SplitSpec::default()
            };
            let splits = split(&trajs, &spec).unwrap();
            let (train, val, test) = oracle_70_10_20(&trajs, (3, 50), 200);
            let ids = |v: &[Trajectory]| v.iter().map(|t| t.traj_id).collect::<Vec<u64>>();
            assert_eq!(ids(&splits.train), train);
            assert_eq!(ids(&splits.validation), val);
            assert_eq!(ids(&splits.test), test);
        }
    }

    #[test]
    fn small_cap_truncates_chronologically() {
        let trajs = random_corpus(9, 200);
        let spec = SplitSpec {
            protocol: SplitProtocol::Chrono701020,
            test_user_session_range: Some((1, 1000)),
            test_cap: Some(5),
            ..SplitSpec::default()
        };
        let splits = split(&trajs, &spec).unwrap();
        assert_eq!(splits.test.len(), 5);
        let (_, _, oracle_test) = oracle_70_10_20(&trajs, (1, 1000), 5);
        let got: Vec<u64> = splits.test.iter().map(|t| t.traj_id).collect();
        assert_eq!(got, oracle_test);
        assert!(splits.manifest.test_after_range >= splits.manifest.test_final);
    }

    #[test]
    fn random_cap_is_seeded_subset_in_chronological_order() {
        let trajs = random_corpus(13, 100);
        let spec = SplitSpec {
            protocol: SplitProtocol::Chrono701020,
            test_user_session_range: Some((1, 1000)),
            test_cap: Some(4),
            cap_sampling: CapSampling::Random { seed: 5 },
            ..SplitSpec::default()
        };
        let a = split(&trajs, &spec).unwrap();
        let b = split(&trajs, &spec).unwrap();
        assert_eq!(a.test, b.test); // same seed → same sample
        assert_eq!(a.test.len(), 4);
        assert!(a
            .test
            .windows(2)
            .all(|w| (w[0].start, w[0].traj_id) <= (w[1].start, w[1].traj_id)));
    }

    #[test]
    fn splits_roundtrip_through_files() {
        let trajs = random_corpus(17, 50);
        let splits = split(&trajs, &SplitSpec::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_splits(&splits, dir.path()).unwrap();
        let reread = read_splits(dir.path()).unwrap();
        assert_eq!(reread.train, splits.train);
        assert_eq!(reread.validation, splits.validation);
        assert_eq!(reread.test, splits.test);
        assert_eq!(reread.manifest, splits.manifest);
    }
}
