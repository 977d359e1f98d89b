//! Mood-aware music recommendation for drivers.
//!
//! Tracks are labeled into the four circumplex quadrants from their social
//! tags; driver mood comes from heart-rate variability relative to a personal
//! baseline, cross-checked against a jerk-based driving-style flag; playlists
//! steer the driver one quadrant at a time toward a time-of-day target.
//!
//! Every numeric type is generic over a [`Real`] scalar (`f32` or `f64`).
//! The aliases at the crate root fix the scalar for common use.

pub mod classify;
pub mod context;
pub mod hrv;
pub mod model;
pub mod mood;
pub mod num;
pub mod recommend;
pub mod sim;
pub mod telemetry;
pub mod trace;

pub use classify::{classify_catalog, classify_track, cluster_scores, load_lexicon, ClusterScores, MoodLexicon};
pub use context::{action_mode, day_phase, plan_shift, target_mood, ActionMode, DayPhase, DayWindow, ShiftPlan};
pub use hrv::{calibrate_baseline, compute_features, detect_mood, Baseline, DetectorConfig, HrvFeatures, RrSample};
pub use model::{Catalog, ContextSnapshot, Labels, MoodLabel, Track, UserProfile};
pub use mood::{centroid_of, levels_to_quadrant, quadrant_of, quadrant_to_levels, Level, LevelPair, MoodQuadrant, ValenceArousal};
pub use num::Real;
pub use recommend::{
    apply_feedback, auto_select, fuse_mood, generate_playlist, preference, score_track, FeedbackEvent, FeedbackKind,
    FusedMood, Playlist, RecommenderConfig, ScoredTrack,
};
pub use sim::{replay_trace, run_session, DriverModel, Engine, SessionConfig, SessionReport};
pub use telemetry::{classify_style, estimate_acceleration, estimate_jerk, DriveScenario, ScenarioThresholds, SpeedSample, StyleFlag};



pub type ValenceArousal64 = mood::ValenceArousal<f64>;
pub type ValenceArousal32 = mood::ValenceArousal<f32>;
pub type MoodLabel64 = model::MoodLabel<f64>;
pub type MoodLabel32 = model::MoodLabel<f32>;
pub type Lexicon64 = classify::MoodLexicon<f64>;
pub type Lexicon32 = classify::MoodLexicon<f32>;
pub type HrvFeatures64 = hrv::HrvFeatures<f64>;
pub type HrvFeatures32 = hrv::HrvFeatures<f32>;
pub type Baseline64 = hrv::Baseline<f64>;
pub type Baseline32 = hrv::Baseline<f32>;
pub type SpeedSample64 = telemetry::SpeedSample<f64>;
pub type SpeedSample32 = telemetry::SpeedSample<f32>;
pub type Profile64 = model::UserProfile<f64>;
pub type Profile32 = model::UserProfile<f32>;
pub type Playlist64 = recommend::Playlist<f64>;
pub type Playlist32 = recommend::Playlist<f32>;
pub type SessionConfig64 = sim::SessionConfig<f64>;
pub type SessionConfig32 = sim::SessionConfig<f32>;
pub type SessionReport64 = sim::SessionReport<f64>;
pub type SessionReport32 = sim::SessionReport<f32>;
