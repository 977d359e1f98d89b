//! Catalog, label, profile and context records shared across the engine.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{day_phase, DayPhase, DayWindow};
use crate::hrv::Baseline;
use crate::mood::MoodQuadrant;
use crate::num::Real;
use crate::telemetry::DriveScenario;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("track id must be non-empty")]
    EmptyTrackId,
    #[error("track `{track}` has tag `{tag}` with count 0")]
    ZeroTagCount { track: String, tag: String },
    #[error("track `{track}` has an empty tag")]
    EmptyTag { track: String },
    #[error("duplicate track id `{0}`")]
    DuplicateTrack(String),
    #[error("age must be positive")]
    NonPositiveAge,
}

/// Normalized form used for every tag comparison: trimmed and lower-cased.
pub fn normalize_tag(tag: &str) -> String {
    tag.trim().to_lowercase()
}

/// A catalog item. Tags are normalized on construction; tags that collapse to
/// the same normalized string have their counts summed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTrack")]
pub struct Track {
    pub id: String,
    pub title: String,
    pub artist: String,
    pub genre: String,
    pub tags: BTreeMap<String, u32>,
}

#[derive(Deserialize)]
struct RawTrack {
    id: String,
    title: String,
    artist: String,
    genre: String,
    #[serde(default)]
    tags: BTreeMap<String, u32>,
}

impl TryFrom<RawTrack> for Track {
    type Error = ModelError;

    fn try_from(raw: RawTrack) -> Result<Self, Self::Error> {
        Track::new(raw.id, raw.title, raw.artist, raw.genre, raw.tags)
    }
}

impl Track {
    pub fn new<I, S>(
        id: impl Into<String>,
        title: impl Into<String>,
        artist: impl Into<String>,
        genre: impl Into<String>,
        tags: I,
    ) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: AsRef<str>,
    {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(ModelError::EmptyTrackId);
        }
        let mut normalized = BTreeMap::new();
        for (tag, count) in tags {
            let key = normalize_tag(tag.as_ref());
            if key.is_empty() {
                return Err(ModelError::EmptyTag { track: id });
            }
            if count == 0 {
                return Err(ModelError::ZeroTagCount { track: id, tag: key });
            }
            *normalized.entry(key).or_insert(0u32) += count;
        }
        Ok(Track {
            id,
            title: title.into(),
            artist: artist.into(),
            genre: genre.into(),
            tags: normalized,
        })
    }
}

/// Tracks keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    tracks: BTreeMap<String, Track>,
}

impl Catalog {
    pub fn from_tracks(tracks: impl IntoIterator<Item = Track>) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for t in tracks {
            if map.contains_key(&t.id) {
                return Err(ModelError::DuplicateTrack(t.id));
            }
            map.insert(t.id.clone(), t);
        }
        Ok(Catalog { tracks: map })
    }

    pub fn get(&self, id: &str) -> Option<&Track> {
        self.tracks.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.tracks.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// Tracks in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Track> {
        self.tracks.values()
    }
}

/// Classified mood of a track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MoodLabel<T: Real = f64> {
    pub quadrant: MoodQuadrant,
    pub confidence: T,
}

/// `None` marks a track with no lexicon evidence.
pub type Labels<T = f64> = BTreeMap<String, Option<MoodLabel<T>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UserProfile<T: Real = f64> {
    pub user_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profession: Option<String>,
    #[serde(default)]
    pub liked: BTreeSet<String>,
    #[serde(default)]
    pub skip_counts: BTreeMap<String, u32>,
    #[serde(default)]
    pub baseline: Option<Baseline<T>>,
}

impl<T: Real> UserProfile<T> {
    pub fn new(user_id: impl Into<String>) -> Self {
        UserProfile {
            user_id: user_id.into(),
            name: None,
            age: None,
            profession: None,
            liked: BTreeSet::new(),
            skip_counts: BTreeMap::new(),
            baseline: None,
        }
    }

    pub fn with_age(mut self, age: u32) -> Result<Self, ModelError> {
        if age == 0 {
            return Err(ModelError::NonPositiveAge);
        }
        self.age = Some(age);
        Ok(self)
    }

    pub fn skip_count(&self, track_id: &str) -> u32 {
        self.skip_counts.get(track_id).copied().unwrap_or(0)
    }

    pub fn is_liked(&self, track_id: &str) -> bool {
        self.liked.contains(track_id)
    }
}

/// Time and place of a drive at one instant. `day_phase` is always derived
/// from `local_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextSnapshot {
    local_time: NaiveTime,
    day_phase: DayPhase,
    pub scenario: DriveScenario,
    /// (latitude, longitude) in degrees. Carried only; no rule reads it.
    pub location: Option<(f64, f64)>,
}

impl ContextSnapshot {
    pub fn new(local_time: NaiveTime, window: &DayWindow, scenario: DriveScenario) -> Self {
        ContextSnapshot {
            local_time,
            day_phase: day_phase(local_time, window),
            scenario,
            location: None,
        }
    }

    pub fn with_location(mut self, lat: f64, lon: f64) -> Self {
        self.location = Some((lat, lon));
        self
    }

    pub fn local_time(&self) -> NaiveTime {
        self.local_time
    }

    pub fn day_phase(&self) -> DayPhase {
        self.day_phase
    }
}
