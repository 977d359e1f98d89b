//! Mood fusion, track scoring, playlist ranking and preference feedback.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{action_mode, ActionMode, ShiftPlan};
use crate::model::{Catalog, ContextSnapshot, Labels, MoodLabel, Track, UserProfile};
use crate::mood::{Level, LevelPair, MoodQuadrant};
use crate::num::Real;
use crate::telemetry::StyleFlag;

pub const DEFAULT_PLAYLIST_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("playlist is empty")]
    EmptyPlaylist,
    #[error("track `{0}` is not in the playlist")]
    InvalidChoice(String),
    #[error("unknown track `{0}`")]
    UnknownTrack(String),
    #[error("{mode:?} weights must be non-negative and sum to 1 (got {mood} + {pref})")]
    InvalidWeights { mode: ActionMode, mood: f64, pref: f64 },
    #[error("playlist length must be at least 1")]
    ZeroPlaylistLen,
    #[error("invalid preference constants")]
    InvalidPreference,
    #[error("feedback row: {0}")]
    FeedbackRow(String),
}

/// Biometric mood after reconciliation with the driving-style flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusedMood {
    pub quadrant: MoodQuadrant,
    /// Telemetry overrode a Low biometric arousal.
    pub conflict: bool,
}

/// Aggressive driving forces arousal High and keeps biometric valence.
pub fn fuse_mood(biometric: LevelPair, style: StyleFlag) -> FusedMood {
    match style {
        StyleFlag::Calm => FusedMood { quadrant: biometric.quadrant(), conflict: false },
        StyleFlag::Aggressive => FusedMood {
            quadrant: LevelPair::new(biometric.valence, Level::High).quadrant(),
            conflict: biometric.arousal == Level::Low,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PreferenceConfig<T: Real = f64> {
    /// Score of a track with no history.
    pub neutral: T,
    /// Deduction per recorded skip.
    pub skip_penalty: T,
}

impl<T: Real> Default for PreferenceConfig<T> {
    fn default() -> Self {
        PreferenceConfig { neutral: T::lit(0.5), skip_penalty: T::lit(0.1) }
    }
}

impl<T: Real> PreferenceConfig<T> {
    pub fn validate(&self) -> Result<(), RecommendError> {
        let unit = |x: T| x.is_finite() && x >= T::zero() && x <= T::one();
        if unit(self.neutral) && unit(self.skip_penalty) {
            Ok(())
        } else {
            Err(RecommendError::InvalidPreference)
        }
    }
}

/// Mood/preference mix for one action mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModeWeights<T: Real = f64> {
    pub mood: T,
    pub pref: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RankingWeights<T: Real = f64> {
    pub regulation: ModeWeights<T>,
    pub maintenance: ModeWeights<T>,
}

impl<T: Real> Default for RankingWeights<T> {
    /// Mood-led while regulating, preference-led while maintaining.
    fn default() -> Self {
        RankingWeights {
            regulation: ModeWeights { mood: T::lit(0.7), pref: T::lit(0.3) },
            maintenance: ModeWeights { mood: T::lit(0.4), pref: T::lit(0.6) },
        }
    }
}

impl<T: Real> RankingWeights<T> {
    pub fn for_mode(&self, mode: ActionMode) -> ModeWeights<T> {
        match mode {
            ActionMode::Regulation => self.regulation,
            ActionMode::Maintenance => self.maintenance,
        }
    }

    pub fn validate(&self) -> Result<(), RecommendError> {
        for mode in [ActionMode::Regulation, ActionMode::Maintenance] {
            let w = self.for_mode(mode);
            let sum = w.mood + w.pref;
            if !(w.mood >= T::zero() && w.pref >= T::zero() && (sum - T::one()).abs() <= T::lit(1e-6)) {
                return Err(RecommendError::InvalidWeights {
                    mode,
                    mood: w.mood.to_f64_lossy(),
                    pref: w.pref.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RecommenderConfig<T: Real = f64> {
    pub weights: RankingWeights<T>,
    pub preference: PreferenceConfig<T>,
    pub playlist_len: usize,
}

impl<T: Real> Default for RecommenderConfig<T> {
    fn default() -> Self {
        RecommenderConfig {
            weights: RankingWeights::default(),
            preference: PreferenceConfig::default(),
            playlist_len: DEFAULT_PLAYLIST_LEN,
        }
    }
}

impl<T: Real> RecommenderConfig<T> {
    pub fn validate(&self) -> Result<(), RecommendError> {
        self.weights.validate()?;
        self.preference.validate()?;
        if self.playlist_len == 0 {
            return Err(RecommendError::ZeroPlaylistLen);
        }
        Ok(())
    }
}

/// Liked → 1; otherwise the neutral prior minus a per-skip penalty, floored at 0.
pub fn preference<T: Real>(profile: &UserProfile<T>, track_id: &str, config: &PreferenceConfig<T>) -> T {
    if profile.is_liked(track_id) {
        return T::one();
    }
    let skips = T::lit(f64::from(profile.skip_count(track_id)));
    (config.neutral - config.skip_penalty * skips).max(T::zero())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScoredTrack<T: Real = f64> {
    pub track_id: String,
    pub score: T,
    pub mood_component: T,
    pub pref_component: T,
}

pub fn score_track<T: Real>(
    track: &Track,
    label: Option<&MoodLabel<T>>,
    segment_target: MoodQuadrant,
    profile: &UserProfile<T>,
    mode: ActionMode,
    config: &RecommenderConfig<T>,
) -> ScoredTrack<T> {
    let mood_component = match label {
        Some(l) if l.quadrant == segment_target => l.confidence,
        _ => T::zero(),
    };
    let pref_component = preference(profile, &track.id, &config.preference);
    let w = config.weights.for_mode(mode);
    let score = (w.mood * mood_component + w.pref * pref_component).clamp_to(T::zero(), T::one());
    ScoredTrack { track_id: track.id.clone(), score, mood_component, pref_component }
}

/// Ranked recommendation for one shift step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Playlist<T: Real = f64> {
    pub segment_target: MoodQuadrant,
    pub mode: ActionMode,
    pub entries: Vec<ScoredTrack<T>>,
    pub created_at: u64,
}

impl<T: Real> Playlist<T> {
    pub fn head(&self) -> Option<&ScoredTrack<T>> {
        self.entries.first()
    }

    pub fn contains(&self, track_id: &str) -> bool {
        self.entries.iter().any(|e| e.track_id == track_id)
    }
}

fn rank_order<T: Real>(a: &ScoredTrack<T>, b: &ScoredTrack<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.track_id.cmp(&b.track_id))
}

#[derive(Debug, Clone, Copy)]
pub struct PlaylistRequest<'a, T: Real = f64> {
    pub profile: &'a UserProfile<T>,
    pub fused: FusedMood,
    pub context: &'a ContextSnapshot,
    pub plan: &'a ShiftPlan,
}

/// Scores the whole catalog against the plan's next step and keeps the top K
/// by descending score, ties by ascending track id.
pub fn generate_playlist<T: Real>(
    request: &PlaylistRequest<'_, T>,
    catalog: &Catalog,
    labels: &Labels<T>,
    config: &RecommenderConfig<T>,
    created_at: u64,
) -> Result<Playlist<T>, RecommendError> {
    let segment_target = request.plan.next_step();
    let mode = action_mode(request.plan.current(), request.plan.target());
    rank_for_target(segment_target, mode, request.profile, catalog, labels, config, created_at)
}

pub fn rank_for_target<T: Real>(
    segment_target: MoodQuadrant,
    mode: ActionMode,
    profile: &UserProfile<T>,
    catalog: &Catalog,
    labels: &Labels<T>,
    config: &RecommenderConfig<T>,
    created_at: u64,
) -> Result<Playlist<T>, RecommendError> {
    if catalog.is_empty() {
        return Err(RecommendError::EmptyCatalog);
    }
    let mut scored: Vec<ScoredTrack<T>> = catalog
        .iter()
        .map(|t| {
            let label = labels.get(&t.id).and_then(Option::as_ref);
            score_track(t, label, segment_target, profile, mode, config)
        })
        .collect();
    scored.sort_by(rank_order);
    scored.truncate(config.playlist_len.max(1));
    Ok(Playlist { segment_target, mode, entries: scored, created_at })
}

/// The user's choice when it is on the list, else the top-ranked track.
pub fn auto_select<T: Real>(playlist: &Playlist<T>, choice: Option<&str>) -> Result<String, RecommendError> {
    let head = playlist.head().ok_or(RecommendError::EmptyPlaylist)?;
    match choice {
        None => Ok(head.track_id.clone()),
        Some(id) if playlist.contains(id) => Ok(id.to_string()),
        Some(id) => Err(RecommendError::InvalidChoice(id.to_string())),
    }
}

/// Anything that can turn the current engine state into a playlist.
pub trait PlaylistPolicy<T: Real> {
    fn playlist(
        &self,
        request: &PlaylistRequest<'_, T>,
        catalog: &Catalog,
        labels: &Labels<T>,
        created_at: u64,
    ) -> Result<Playlist<T>, RecommendError>;
}

/// The mood-regulating recommender.
#[derive(Debug, Clone, Default)]
pub struct MoodRecommender<T: Real = f64> {
    pub config: RecommenderConfig<T>,
}

impl<T: Real> PlaylistPolicy<T> for MoodRecommender<T> {
    fn playlist(
        &self,
        request: &PlaylistRequest<'_, T>,
        catalog: &Catalog,
        labels: &Labels<T>,
        created_at: u64,
    ) -> Result<Playlist<T>, RecommendError> {
        generate_playlist(request, catalog, labels, &self.config, created_at)
    }
}

/// Ignores the driver and context and always ranks for one quadrant.
#[derive(Debug, Clone)]
pub struct FixedQuadrantPolicy<T: Real = f64> {
    pub quadrant: MoodQuadrant,
    pub config: RecommenderConfig<T>,
}

impl<T: Real> PlaylistPolicy<T> for FixedQuadrantPolicy<T> {
    fn playlist(
        &self,
        request: &PlaylistRequest<'_, T>,
        catalog: &Catalog,
        labels: &Labels<T>,
        created_at: u64,
    ) -> Result<Playlist<T>, RecommendError> {
        rank_for_target(self.quadrant, ActionMode::Regulation, request.profile, catalog, labels, &self.config, created_at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeedbackKind {
    Liked,
    Skipped,
    Played,
}

impl fmt::Display for FeedbackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackKind::Liked => "Liked",
            FeedbackKind::Skipped => "Skipped",
            FeedbackKind::Played => "Played",
        })
    }
}

impl FromStr for FeedbackKind {
    type Err = RecommendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "liked" | "like" => Ok(FeedbackKind::Liked),
            "skipped" | "skip" => Ok(FeedbackKind::Skipped),
            "played" | "play" => Ok(FeedbackKind::Played),
            other => Err(RecommendError::FeedbackRow(format!("unknown feedback kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub timestamp: u64,
    pub user_id: String,
    pub track_id: String,
    pub kind: FeedbackKind,
}

impl FeedbackEvent {
    /// `timestamp,userId,trackId,kind`
    pub fn to_row(&self) -> String {
        format!("{},{},{},{}", self.timestamp, self.user_id, self.track_id, self.kind)
    }

    pub fn from_row(row: &str) -> Result<Self, RecommendError> {
        let cols: Vec<&str> = row.trim().split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(RecommendError::FeedbackRow(format!("expected 4 columns, found {}", cols.len())));
        }
        Self::from_fields(&cols)
    }

    pub(crate) fn from_fields(cols: &[&str]) -> Result<Self, RecommendError> {
        let timestamp = cols[0]
            .parse()
            .map_err(|_| RecommendError::FeedbackRow(format!("invalid timestamp `{}`", cols[0])))?;
        if cols[1].is_empty() || cols[2].is_empty() {
            return Err(RecommendError::FeedbackRow("empty user or track id".into()));
        }
        Ok(FeedbackEvent {
            timestamp,
            user_id: cols[1].to_string(),
            track_id: cols[2].to_string(),
            kind: cols[3].parse()?,
        })
    }
}

/// Returns the updated profile; the input is left untouched.
pub fn apply_feedback<T: Real>(
    profile: &UserProfile<T>,
    event: &FeedbackEvent,
    catalog: &Catalog,
) -> Result<UserProfile<T>, RecommendError> {
    if !catalog.contains(&event.track_id) {
        return Err(RecommendError::UnknownTrack(event.track_id.clone()));
    }
    let mut updated = profile.clone();
    match event.kind {
        FeedbackKind::Liked => {
            updated.liked.insert(event.track_id.clone());
            updated.skip_counts.remove(&event.track_id);
        }
        FeedbackKind::Skipped => {
            *updated.skip_counts.entry(event.track_id.clone()).or_insert(0) += 1;
        }
        FeedbackKind::Played => {
            tracing::debug!(track = %event.track_id, user = %event.user_id, "played");
        }
    }
    Ok(updated)
}
