//! Append-only, versioned profile persistence.
//!
//! Each write lands as `user{id}.v{version}.json`; versions start at 1 and
//! never overwrite. Writers pass the version they based their edit on;
//! a mismatch with the current head is rejected, which is what the REST
//! service surfaces as a conflict on concurrent edits.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::UserProfile;

/// On-disk profile record: the five generation-schema fields plus
/// provenance. Field order here is the byte order in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredProfile {
    pub user_id: u64,
    pub version: u32,
    pub generated_at: DateTime<Utc>,
    pub source_model: String,
    pub attempts: u32,
    pub temperature: f64,
    pub json_mode: bool,
    pub traits: Vec<String>,
    pub attributes: Vec<String>,
    pub preferences: Vec<String>,
    pub routines: Vec<String>,
    pub user_profile: String,
}

impl StoredProfile {
    /// Wrap a validated profile for persistence. `version` is assigned by
    /// the store on append.
    pub fn from_profile(
        profile: &UserProfile,
        attempts: u32,
        temperature: f64,
        json_mode: bool,
    ) -> StoredProfile {
        StoredProfile {
            user_id: profile.user_id,
            version: 0,
            generated_at: profile.generated_at,
            source_model: profile.source_model.clone(),
            attempts,
            temperature,
            json_mode,
            traits: profile.traits.clone(),
            attributes: profile.attributes.clone(),
            preferences: profile.preferences.clone(),
            routines: profile.routines.clone(),
            user_profile: profile.summary.clone(),
        }
    }

    pub fn to_profile(&self) -> UserProfile {
        UserProfile {
            user_id: self.user_id,
            traits: self.traits.clone(),
            attributes: self.attributes.clone(),
            preferences: self.preferences.clone(),
            routines: self.routines.clone(),
            summary: self.user_profile.clone(),
            generated_at: self.generated_at,
            source_model: self.source_model.clone(),
        }
    }
}

/// Directory-backed store. One instance serializes all writes through an
/// internal lock; cross-process writers are out of scope.
pub struct ProfileStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ProfileStore {
    pub fn open(dir: &Path) -> Result<ProfileStore> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ProfileStore {
            dir: dir.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn file_name(user_id: u64, version: u32) -> String {
        format!("user{user_id}.v{version}.json")
    }

    /// Parse `user{id}.v{version}.json`; anything else is ignored.
    fn parse_file_name(name: &str) -> Option<(u64, u32)> {
        let rest = name.strip_prefix("user")?.strip_suffix(".json")?;
        let (id, version) = rest.split_once(".v")?;
        Some((id.parse().ok()?, version.parse().ok()?))
    }

    fn scan(&self) -> Result<BTreeMap<u64, u32>> {
        let mut heads: BTreeMap<u64, u32> = BTreeMap::new();
        let entries = std::fs::read_dir(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            if let Some((user_id, version)) =
                entry.file_name().to_str().and_then(Self::parse_file_name)
            {
                let head = heads.entry(user_id).or_insert(version);
                *head = (*head).max(version);
            }
        }
        Ok(heads)
    }

    /// Sorted ids of users with at least one stored version.
    pub fn users(&self) -> Result<Vec<u64>> {
        Ok(self.scan()?.into_keys().collect())
    }

    pub fn latest_version(&self, user_id: u64) -> Result<Option<u32>> {
        Ok(self.scan()?.get(&user_id).copied())
    }

    /// Load the newest version for a user.
    pub fn load(&self, user_id: u64) -> Result<StoredProfile> {
        let version = self
            .latest_version(user_id)?
            .ok_or(Error::UnknownUser(user_id))?;
        self.load_version(user_id, version)
    }

    pub fn load_version(&self, user_id: u64, version: u32) -> Result<StoredProfile> {
        let path = self.dir.join(Self::file_name(user_id, version));
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Newest version of every user, keyed by id.
    pub fn latest_profiles(&self) -> Result<BTreeMap<u64, StoredProfile>> {
        self.scan()?
            .into_iter()
            .map(|(user_id, version)| Ok((user_id, self.load_version(user_id, version)?)))
            .collect()
    }

    /// Append a new version. With `expected = Some(v)` the write succeeds
    /// only while the current head is exactly `v`; `None` skips the check
    /// (used for initial generation). Returns the version written.
    pub fn append(&self, profile: &StoredProfile, expected: Option<u32>) -> Result<u32> {
        let _guard = self.write_lock.lock().unwrap();
        let current = self.latest_version(profile.user_id)?;
        if let Some(expected) = expected {
            if current != Some(expected) {
                return Err(Error::StaleVersion {
                    user_id: profile.user_id,
                    expected,
                    current: current.unwrap_or(0),
                });
            }
        }
        let version = current.unwrap_or(0) + 1;
        let mut record = profile.clone();
        record.version = version;
        let path = self.dir.join(Self::file_name(profile.user_id, version));
        let mut json = serde_json::to_vec_pretty(&record)?;
        json.push(b'\n');
        std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(version)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn sample(user_id: u64) -> StoredProfile {
        StoredProfile {
            user_id,
            version: 0,
            generated_at: Utc.with_ymd_and_hms(2012, 4, 13, 12, 0, 0).unwrap(),
            source_model: "mock-chat".into(),
            attempts: 1,
            temperature: 0.0,
            json_mode: true,
            traits: vec![
                "extroverted".into(),
                "agreeable".into(),
                "conscientious".into(),
                "emotionally stable".into(),
                "open to experience".into(),
            ],
            attributes: vec!["adult".into(), "female".into(), "college & beyond".into(), "middle".into()],
            preferences: vec!["coffee".into()],
            routines: vec!["mornings".into()],
            user_profile: "A summary.".into(),
        }
    }

    #[test]
    fn versions_append_from_one() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        assert_eq!(store.append(&sample(3), None).unwrap(), 1);
        assert_eq!(store.append(&sample(3), Some(1)).unwrap(), 2);
        assert_eq!(store.latest_version(3).unwrap(), Some(2));
        assert_eq!(store.load(3).unwrap().version, 2);
        assert_eq!(store.load_version(3, 1).unwrap().version, 1);
    }

    #[test]
    fn stale_expected_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.append(&sample(3), None).unwrap();
        store.append(&sample(3), Some(1)).unwrap();
        let err = store.append(&sample(3), Some(1)).unwrap_err();
        match err {
            Error::StaleVersion {
                user_id,
                expected,
                current,
            } => {
                assert_eq!((user_id, expected, current), (3, 1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        // Nothing was written by the failed attempt.
        assert_eq!(store.latest_version(3).unwrap(), Some(2));
    }

    #[test]
    fn expecting_a_version_on_an_absent_user_fails() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let err = store.append(&sample(9), Some(1)).unwrap_err();
        assert!(matches!(err, Error::StaleVersion { current: 0, .. }));
    }

    #[test]
    fn users_are_sorted_and_complete() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        for id in [5u64, 1, 9] {
            store.append(&sample(id), None).unwrap();
        }
        assert_eq!(store.users().unwrap(), vec![1, 5, 9]);
        assert_eq!(store.latest_profiles().unwrap().len(), 3);
    }

    #[test]
    fn unknown_user_is_a_named_error() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        assert!(matches!(store.load(77), Err(Error::UnknownUser(77))));
    }

    #[test]
    fn stray_files_are_ignored_by_the_scan() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        std::fs::write(dir.path().join("README.txt"), "not a profile").unwrap();
        std::fs::write(dir.path().join("userX.vY.json"), "{}").unwrap();
        store.append(&sample(2), None).unwrap();
        assert_eq!(store.users().unwrap(), vec![2]);
    }

    #[test]
    fn serialization_is_byte_stable() {
        let a = serde_json::to_vec_pretty(&sample(1)).unwrap();
        let b = serde_json::to_vec_pretty(&sample(1)).unwrap();
        assert_eq!(a, b);
        // Round trip preserves every field.
        let back: StoredProfile = serde_json::from_slice(&a).unwrap();
        assert_eq!(back, sample(1));
    }

    #[test]
    fn profile_conversion_is_lossless() {
        let stored = sample(4);
        let profile = stored.to_profile();
        assert_eq!(profile.summary, "A summary.");
        let rewrapped = StoredProfile::from_profile(&profile, 1, 0.0, true);
        assert_eq!(rewrapped.traits, stored.traits);
        assert_eq!(rewrapped.user_profile, stored.user_profile);
    }
}
