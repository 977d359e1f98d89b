//! Closed-loop drive sessions against a synthetic driver, and open-loop
//! replay of recorded traces.
//!
//! The synthetic driver's mood contracts toward the centroid of whatever
//! quadrant the played track is labeled with, plus optional Gaussian noise.
//! Its heart and driving signals are generated so the estimators recover the
//! intended features, which closes the loop through the real detection,
//! fusion, planning and ranking code.

use chrono::{Duration, NaiveTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{day_phase, plan_shift, target_mood, DayWindow};
use crate::hrv::{
    calibrate_baseline, compute_features, Baseline, DetectorConfig, HrvError, HrvFeatures, MoodDetector,
    RrSample, ThresholdDetector, MIN_CALIBRATION_WINDOWS, MIN_WINDOW_SAMPLES, RR_RANGE_MS,
};
use crate::model::{Catalog, ContextSnapshot, Labels, UserProfile};
use crate::mood::{MoodError, MoodQuadrant, ValenceArousal};
use crate::num::Real;
use crate::recommend::{
    apply_feedback, auto_select, fuse_mood, FeedbackEvent, FeedbackKind, FusedMood, Playlist, PlaylistPolicy,
    PlaylistRequest, RecommendError,
};
use crate::telemetry::{
    DriveScenario, JerkTracker, ScenarioThresholds, SpeedSample, StyleFlag, TelemetryError, DEFAULT_STYLE_WINDOW_S,
};
use crate::trace::TraceEvent;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("trace has no events")]
    EmptyTrace,
    #[error("played track `{0}` has no label entry")]
    MissingLabel(String),
    #[error(transparent)]
    Hrv(#[from] HrvError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Mood(#[from] MoodError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DriverParams<T: Real = f64> {
    /// Fraction of the gap to the played centroid closed per track, in [0, 1].
    pub inertia: T,
    /// Per-component noise standard deviation.
    pub noise_std: T,
    pub base_hr: T,
    pub base_rmssd: T,
    /// bpm per unit arousal.
    pub hr_gain: T,
    /// Relative RMSSD change per unit valence.
    pub rmssd_gain: T,
    /// Mean |jerk| (m/s³) at valence -1, arousal +1.
    pub jerk_max: T,
    pub cruise_speed: T,
    /// Coordinate magnitude of the quadrant centroids the state contracts toward.
    pub centroid_magnitude: T,
}

impl<T: Real> Default for DriverParams<T> {
    fn default() -> Self {
        DriverParams {
            inertia: T::lit(0.2),
            noise_std: T::zero(),
            base_hr: T::lit(70.0),
            base_rmssd: T::lit(40.0),
            hr_gain: T::lit(20.0),
            rmssd_gain: T::lit(0.5),
            jerk_max: T::lit(3.0),
            cruise_speed: T::lit(14.0),
            centroid_magnitude: T::lit(crate::mood::CENTROID_MAGNITUDE),
        }
    }
}

impl<T: Real> DriverParams<T> {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        let fin = |x: T| x.is_finite();
        if !(fin(self.inertia) && self.inertia >= T::zero() && self.inertia <= T::one()) {
            return bad("inertia must lie in [0, 1]");
        }
        if !(fin(self.noise_std) && self.noise_std >= T::zero()) {
            return bad("noise_std must be non-negative");
        }
        if !(fin(self.base_hr) && self.base_hr > T::zero() && fin(self.base_rmssd) && self.base_rmssd > T::zero()) {
            return bad("base_hr and base_rmssd must be positive");
        }
        if !(fin(self.hr_gain) && self.hr_gain >= T::zero() && self.hr_gain < self.base_hr) {
            return bad("hr_gain must lie in [0, base_hr)");
        }
        if !(fin(self.rmssd_gain) && self.rmssd_gain >= T::zero()) {
            return bad("rmssd_gain must be non-negative");
        }
        if !(fin(self.jerk_max) && self.jerk_max >= T::zero() && fin(self.cruise_speed) && self.cruise_speed >= T::zero()) {
            return bad("jerk_max and cruise_speed must be non-negative");
        }
        let m = self.centroid_magnitude;
        if !(fin(m) && m > T::zero() && m <= T::one()) {
            return bad("centroid_magnitude must lie in (0, 1]");
        }
        Ok(())
    }
}

/// Synthetic driver: mood state, response constants and a seeded generator.
#[derive(Debug, Clone)]
pub struct DriverModel<T: Real = f64> {
    pub state: ValenceArousal<T>,
    pub params: DriverParams<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> DriverModel<T> {
    pub fn new(state: ValenceArousal<T>, params: DriverParams<T>, seed: u64) -> Self {
        DriverModel { state, params, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Moves the state toward the centroid of `played` (if any) and adds noise.
    pub fn step(&mut self, played: Option<MoodQuadrant>) {
        let alpha = self.params.inertia;
        let (mut v, mut a) = (self.state.valence(), self.state.arousal());
        if let Some(q) = played {
            let c = q.centroid_scaled(self.params.centroid_magnitude);
            let keep = T::one() - alpha;
            v = keep * v + alpha * c.valence();
            a = keep * a + alpha * c.arousal();
        }
        let sigma = self.params.noise_std.to_f64_lossy();
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("validated noise std");
            v = v + T::lit(normal.sample(&mut self.rng));
            a = a + T::lit(normal.sample(&mut self.rng));
        }
        self.state = ValenceArousal::new(v, a).expect("finite state stays finite");
    }

    pub fn target_hr(&self) -> T {
        self.params.base_hr + self.params.hr_gain * self.state.arousal()
    }

    pub fn target_rmssd(&self) -> T {
        (self.params.base_rmssd * (T::one() + self.params.rmssd_gain * self.state.valence())).max(T::one())
    }

    pub fn target_jerk(&self) -> T {
        self.params.jerk_max * self.state.arousal().max(T::zero()) * (-self.state.valence()).max(T::zero())
    }

    /// RR series whose mean gives exactly the target heart rate and whose
    /// successive differences give the target RMSSD: values alternate around
    /// the mean interval, with a final sample at the mean when the length is odd.
    pub fn emit_biometrics(&self, window_len: usize, start_ms: u64) -> Vec<RrSample<T>> {
        let n = window_len.max(MIN_WINDOW_SAMPLES);
        let lo = T::lit(RR_RANGE_MS.0 + 1.0);
        let hi = T::lit(RR_RANGE_MS.1 - 1.0);
        let mean_rr = (T::lit(60_000.0) / self.target_hr()).clamp_to(lo, hi);
        let rmssd = self.target_rmssd();
        let mut half = if n.is_multiple_of(2) {
            rmssd / T::lit(2.0)
        } else {
            let nf = n as f64;
            rmssd * T::lit(((nf - 1.0) / (4.0 * nf - 7.0)).sqrt())
        };
        let room = (mean_rr - lo).min(hi - mean_rr);
        if half > room {
            tracing::warn!("requested RMSSD exceeds the plausible RR range; emitted swing reduced");
            half = room;
        }
        let mut t = start_ms;
        (0..n)
            .map(|i| {
                let rr = if !n.is_multiple_of(2) && i == n - 1 {
                    mean_rr
                } else if i % 2 == 0 {
                    mean_rr + half
                } else {
                    mean_rr - half
                };
                t += rr.to_f64_lossy().round().max(1.0) as u64;
                RrSample::new(t, rr)
            })
            .collect()
    }

    /// Speed series whose jerk estimates all have magnitude equal to the
    /// target jerk: acceleration cycles through 0, +JΔt, 0, -JΔt.
    pub fn emit_telemetry(&self, sample_count: usize, dt: T, start_s: T) -> Vec<SpeedSample<T>> {
        let n = sample_count.max(3);
        let step = self.target_jerk() * dt;
        let pattern = [T::zero(), T::one(), T::zero(), -T::one()];
        let mut speed = self.params.cruise_speed;
        let mut out = Vec::with_capacity(n);
        out.push(SpeedSample { timestamp: start_s, speed });
        for k in 1..n {
            speed = (speed + step * pattern[(k - 1) % 4] * dt).max(T::zero());
            out.push(SpeedSample { timestamp: start_s + dt * T::lit(k as f64), speed });
        }
        out
    }
}

/// Functional form of [`DriverModel::step`].
pub fn step_driver<T: Real>(model: &DriverModel<T>, played: MoodQuadrant) -> DriverModel<T> {
    let mut next = model.clone();
    next.step(Some(played));
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SessionConfig<T: Real = f64> {
    pub track_count: usize,
    pub start_state: ValenceArousal<T>,
    pub clock_start: NaiveTime,
    pub scenario: DriveScenario,
    pub day_window: DayWindow,
    pub detector: DetectorConfig<T>,
    pub thresholds: ScenarioThresholds<T>,
    pub driver: DriverParams<T>,
    pub seed: u64,
    /// RR samples per biometric window.
    pub bio_window: usize,
    /// Speed samples per telemetry window.
    pub telemetry_samples: usize,
    pub telemetry_dt: T,
    pub style_window_s: T,
    /// Wall-clock minutes that pass per played track.
    pub track_minutes: u32,
}

impl<T: Real> SessionConfig<T> {
    pub fn new(seed: u64) -> Self {
        SessionConfig {
            track_count: 30,
            start_state: ValenceArousal::origin(),
            clock_start: NaiveTime::from_hms_opt(12, 0, 0).expect("valid time"),
            scenario: DriveScenario::Urban,
            day_window: DayWindow::default(),
            detector: DetectorConfig::default(),
            thresholds: ScenarioThresholds::default(),
            driver: DriverParams::default(),
            seed,
            bio_window: 60,
            telemetry_samples: 31,
            telemetry_dt: T::one(),
            style_window_s: T::lit(DEFAULT_STYLE_WINDOW_S),
            track_minutes: 4,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if self.track_count == 0 {
            return bad("track_count must be at least 1");
        }
        if self.bio_window < MIN_WINDOW_SAMPLES {
            return bad("bio_window must be at least 10");
        }
        if self.telemetry_samples < 3 {
            return bad("telemetry_samples must be at least 3");
        }
        if !(self.telemetry_dt.is_finite() && self.telemetry_dt > T::zero()) {
            return bad("telemetry_dt must be positive");
        }
        if !(self.style_window_s.is_finite() && self.style_window_s > T::zero()) {
            return bad("style_window_s must be positive");
        }
        self.driver.validate()
    }
}

/// One detection cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrajectoryRow<T: Real = f64> {
    pub step: usize,
    /// Driver state in simulation; detected continuous point in replay.
    pub point: ValenceArousal<T>,
    pub fused: FusedMood,
    pub style: StyleFlag,
    pub target: MoodQuadrant,
    /// Track auto-selected after this detection, if any.
    pub played: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SessionReport<T: Real = f64> {
    pub trajectory: Vec<TrajectoryRow<T>>,
    pub played_tracks: Vec<String>,
    pub playlists: Vec<Playlist<T>>,
    pub feedback: Vec<FeedbackEvent>,
    pub aggressive_fraction: T,
    pub steps_to_target: Option<usize>,
    pub final_quadrant: MoodQuadrant,
    pub final_profile: UserProfile<T>,
}

impl<T: Real> SessionReport<T> {
    /// Share of rows in `rows` with an Aggressive style flag.
    pub fn aggressive_fraction_of(rows: &[TrajectoryRow<T>]) -> T {
        if rows.is_empty() {
            return T::zero();
        }
        let n = rows.iter().filter(|r| r.style == StyleFlag::Aggressive).count();
        T::lit(n as f64) / T::lit(rows.len() as f64)
    }

    pub fn fused_sequence(&self) -> Vec<MoodQuadrant> {
        self.trajectory.iter().map(|r| r.fused.quadrant).collect()
    }
}

/// Components a session runs against.
pub struct Engine<'a, T: Real = f64> {
    pub catalog: &'a Catalog,
    pub labels: &'a Labels<T>,
    pub policy: &'a dyn PlaylistPolicy<T>,
    pub detector: &'a dyn MoodDetector<T>,
}

struct Cycle<'a, T: Real> {
    features: &'a HrvFeatures<T>,
    telemetry: &'a [SpeedSample<T>],
    context: ContextSnapshot,
    created_at: u64,
}

struct CycleOutcome<T: Real> {
    point: ValenceArousal<T>,
    fused: FusedMood,
    style: StyleFlag,
    target: MoodQuadrant,
    playlist: Playlist<T>,
}

fn run_cycle<T: Real>(
    engine: &Engine<'_, T>,
    profile: &UserProfile<T>,
    baseline: &Baseline<T>,
    thresholds: &ScenarioThresholds<T>,
    style_window_s: T,
    cycle: Cycle<'_, T>,
) -> Result<CycleOutcome<T>, SimError> {
    let detection = engine.detector.detect(cycle.features, baseline)?;
    let mut tracker = JerkTracker::new(style_window_s);
    for s in cycle.telemetry {
        tracker.push(*s)?;
    }
    let style = tracker.style(cycle.context.scenario, thresholds)?;
    let fused = fuse_mood(detection.levels, style);
    let target = target_mood(cycle.context.day_phase());
    let plan = plan_shift(fused.quadrant, target);
    let request = PlaylistRequest { profile, fused, context: &cycle.context, plan: &plan };
    let playlist = engine.policy.playlist(&request, engine.catalog, engine.labels, cycle.created_at)?;
    Ok(CycleOutcome { point: detection.point, fused, style, target, playlist })
}

fn clock_at(start: NaiveTime, minutes: i64) -> NaiveTime {
    start.overflowing_add_signed(Duration::minutes(minutes)).0
}

fn finish_report<T: Real>(
    trajectory: Vec<TrajectoryRow<T>>,
    playlists: Vec<Playlist<T>>,
    feedback: Vec<FeedbackEvent>,
    final_profile: UserProfile<T>,
) -> Result<SessionReport<T>, SimError> {
    let final_quadrant = trajectory.last().map(|r| r.fused.quadrant).ok_or(SimError::EmptyTrace)?;
    let steps_to_target = trajectory.iter().position(|r| r.fused.quadrant == r.target);
    let played_tracks = trajectory.iter().filter_map(|r| r.played.clone()).collect();
    Ok(SessionReport {
        aggressive_fraction: SessionReport::aggressive_fraction_of(&trajectory),
        trajectory,
        played_tracks,
        playlists,
        feedback,
        steps_to_target,
        final_quadrant,
        final_profile,
    })
}

/// Runs `track_count` play cycles plus a final detection, so the trajectory
/// holds `track_count + 1` rows. Without a stored baseline the driver is
/// calibrated from three windows emitted at the resting state.
pub fn run_session<T: Real>(
    config: &SessionConfig<T>,
    profile: &UserProfile<T>,
    engine: &Engine<'_, T>,
) -> Result<SessionReport<T>, SimError> {
    config.validate()?;
    if engine.catalog.is_empty() {
        return Err(SimError::EmptyCatalog);
    }
    let mut driver = DriverModel::new(config.start_state, config.driver, config.seed);
    let step_ms = u64::from(config.track_minutes) * 60_000;

    let baseline = match profile.baseline {
        Some(b) => b,
        None => {
            let rest = DriverModel::new(ValenceArousal::origin(), config.driver, config.seed);
            let windows = (0..MIN_CALIBRATION_WINDOWS)
                .map(|i| compute_features(&rest.emit_biometrics(config.bio_window, i as u64 * 120_000)))
                .collect::<Result<Vec<_>, _>>()?;
            calibrate_baseline(&windows)?
        }
    };
    let mut profile = profile.clone();
    if profile.baseline.is_none() {
        profile.baseline = Some(baseline);
    }

    let mut trajectory = Vec::with_capacity(config.track_count + 1);
    let mut playlists = Vec::with_capacity(config.track_count);
    let mut feedback = Vec::with_capacity(config.track_count);

    for step in 0..=config.track_count {
        let t_ms = step as u64 * step_ms;
        let t_s = T::lit(t_ms as f64 / 1000.0);
        let local = clock_at(config.clock_start, step as i64 * i64::from(config.track_minutes));
        let context = ContextSnapshot::new(local, &config.day_window, config.scenario);
        let features = compute_features(&driver.emit_biometrics(config.bio_window, t_ms))?;
        let telemetry = driver.emit_telemetry(config.telemetry_samples, config.telemetry_dt, t_s);
        let outcome = run_cycle(
            engine,
            &profile,
            &baseline,
            &config.thresholds,
            config.style_window_s,
            Cycle { features: &features, telemetry: &telemetry, context, created_at: t_ms },
        )?;

        let mut row = TrajectoryRow {
            step,
            point: driver.state,
            fused: outcome.fused,
            style: outcome.style,
            target: outcome.target,
            played: None,
        };
        if step < config.track_count {
            let played = auto_select(&outcome.playlist, None)?;
            let event = FeedbackEvent {
                timestamp: t_ms,
                user_id: profile.user_id.clone(),
                track_id: played.clone(),
                kind: FeedbackKind::Played,
            };
            profile = apply_feedback(&profile, &event, engine.catalog)?;
            let label = engine.labels.get(&played).ok_or_else(|| SimError::MissingLabel(played.clone()))?;
            driver.step(label.map(|l| l.quadrant));
            feedback.push(event);
            playlists.push(outcome.playlist);
            row.played = Some(played);
        }
        trajectory.push(row);
    }
    finish_report(trajectory, playlists, feedback, profile)
}

/// Settings for open-loop replay.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayConfig<T: Real = f64> {
    /// Context used until the trace's first `C` marker.
    pub clock_start: NaiveTime,
    pub scenario: DriveScenario,
    pub day_window: DayWindow,
    pub thresholds: ScenarioThresholds<T>,
    pub style_window_s: T,
}

impl<T: Real> Default for ReplayConfig<T> {
    fn default() -> Self {
        ReplayConfig {
            clock_start: NaiveTime::from_hms_opt(12, 0, 0).expect("valid time"),
            scenario: DriveScenario::Urban,
            day_window: DayWindow::default(),
            thresholds: ScenarioThresholds::default(),
            style_window_s: T::lit(DEFAULT_STYLE_WINDOW_S),
        }
    }
}

/// Replays recorded signals open-loop.
///
/// Biometric and telemetry samples accumulate until a cycle boundary: a
/// `Played` or `Skipped` feedback event, or the end of the trace. At a
/// boundary with at least 10 plausible RR samples and 3 speed samples the
/// buffered windows are consumed: without a stored baseline the first three
/// such windows calibrate it; afterwards each window yields one detection and
/// one playlist. Implausible RR samples are dropped. Feedback is applied to
/// the profile as it is read.
pub fn replay_trace<T: Real>(
    events: &[TraceEvent<T>],
    profile: &UserProfile<T>,
    engine: &Engine<'_, T>,
    config: &ReplayConfig<T>,
) -> Result<SessionReport<T>, SimError> {
    if events.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    if engine.catalog.is_empty() {
        return Err(SimError::EmptyCatalog);
    }
    let mut profile = profile.clone();
    let mut context = ContextSnapshot::new(config.clock_start, &config.day_window, config.scenario);
    let mut bio: Vec<RrSample<T>> = Vec::new();
    let mut tele: Vec<SpeedSample<T>> = Vec::new();
    let mut calibration: Vec<HrvFeatures<T>> = Vec::new();
    let mut trajectory = Vec::new();
    let mut playlists = Vec::new();
    let mut feedback = Vec::new();

    let mut flush = |bio: &mut Vec<RrSample<T>>,
                     tele: &mut Vec<SpeedSample<T>>,
                     profile: &mut UserProfile<T>,
                     context: &ContextSnapshot|
     -> Result<(), SimError> {
        let plausible: Vec<RrSample<T>> = bio.iter().copied().filter(RrSample::is_plausible).collect();
        if plausible.len() < MIN_WINDOW_SAMPLES || tele.len() < 3 {
            return Ok(());
        }
        if plausible.len() < bio.len() {
            tracing::warn!(dropped = bio.len() - plausible.len(), "dropped implausible RR samples");
        }
        let features = compute_features(&plausible)?;
        let created_at = plausible.last().map_or(0, |s| s.timestamp_ms);
        bio.clear();
        let telemetry = std::mem::take(tele);
        let baseline = match profile.baseline {
            Some(b) => b,
            None => {
                calibration.push(features);
                if calibration.len() >= MIN_CALIBRATION_WINDOWS {
                    profile.baseline = Some(calibrate_baseline(&calibration)?);
                }
                return Ok(());
            }
        };
        let outcome = run_cycle(
            engine,
            profile,
            &baseline,
            &config.thresholds,
            config.style_window_s,
            Cycle { features: &features, telemetry: &telemetry, context: *context, created_at },
        )?;
        let played = auto_select(&outcome.playlist, None)?;
        trajectory.push(TrajectoryRow {
            step: trajectory.len(),
            point: outcome.point,
            fused: outcome.fused,
            style: outcome.style,
            target: outcome.target,
            played: Some(played),
        });
        playlists.push(outcome.playlist);
        Ok(())
    };

    for event in events {
        match event {
            TraceEvent::Biometric(s) => bio.push(*s),
            TraceEvent::Telemetry(s) => tele.push(*s),
            TraceEvent::Context { time, scenario } => {
                context = ContextSnapshot::new(*time, &config.day_window, *scenario);
            }
            TraceEvent::Feedback(f) => {
                profile = apply_feedback(&profile, f, engine.catalog)?;
                feedback.push(f.clone());
                if matches!(f.kind, FeedbackKind::Played | FeedbackKind::Skipped) {
                    flush(&mut bio, &mut tele, &mut profile, &context)?;
                }
            }
        }
    }
    flush(&mut bio, &mut tele, &mut profile, &context)?;

    if trajectory.is_empty() {
        // No detection cycle completed; report the feedback-only outcome.
        return Ok(SessionReport {
            trajectory,
            played_tracks: Vec::new(),
            playlists,
            feedback,
            aggressive_fraction: T::zero(),
            steps_to_target: None,
            final_quadrant: target_mood(day_phase(context.local_time(), &config.day_window)),
            final_profile: profile,
        });
    }
    finish_report(trajectory, playlists, feedback, profile)
}

/// Default wiring: threshold detector with the given constants.
pub fn threshold_detector<T: Real>(config: DetectorConfig<T>) -> ThresholdDetector<T> {
    ThresholdDetector { config }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hrv::Detection;
    use crate::mood::centroid_of;
    use crate::model::{MoodLabel, Track};
    use crate::recommend::{FixedQuadrantPolicy, MoodRecommender, RecommenderConfig};
    use crate::telemetry::jerk_series;
    use MoodQuadrant::*;

    fn va(v: f64, a: f64) -> ValenceArousal {
        ValenceArousal::new(v, a).unwrap()
    }

    fn driver(state: ValenceArousal, inertia: f64) -> DriverModel {
        DriverModel::new(state, DriverParams { inertia, ..DriverParams::default() }, 7)
    }

    fn four_quadrant_catalog() -> (Catalog, Labels) {
        let mut tracks = Vec::new();
        let mut labels = Labels::new();
        for q in MoodQuadrant::ALL {
            for k in 0..2 {
                let id = format!("{}-{k}", q.name().to_lowercase());
                tracks.push(Track::new(&id, &id, "a", "g", [(q.name(), 1)]).unwrap());
                labels.insert(id, Some(MoodLabel { quadrant: q, confidence: 1.0 }));
            }
        }
        (Catalog::from_tracks(tracks).unwrap(), labels)
    }

    #[test]
    fn step_examples() {
        let d = driver(va(-0.9, 0.7), 1.0);
        assert_eq!(step_driver(&d, Tender).state, va(0.5, -0.5));
        let d = driver(va(-0.9, 0.7), 0.0);
        assert_eq!(step_driver(&d, Happy).state, va(-0.9, 0.7));
        let d = driver(va(-0.8, 0.8), 0.5);
        let s = step_driver(&d, Sad).state;
        assert!((s.valence() + 0.65).abs() < 1e-12);
        assert!((s.arousal() - 0.15).abs() < 1e-12);
        // original untouched
        assert_eq!(d.state, va(-0.8, 0.8));
    }

    #[test]
    fn noise_is_seeded_and_clamped() {
        let params = DriverParams { noise_std: 0.5, ..DriverParams::default() };
        let mut a = DriverModel::new(va(0.9, 0.9), params, 11);
        let mut b = DriverModel::new(va(0.9, 0.9), params, 11);
        let mut c = DriverModel::new(va(0.9, 0.9), params, 12);
        for _ in 0..50 {
            a.step(Some(Happy));
            b.step(Some(Happy));
            c.step(Some(Happy));
            assert_eq!(a.state, b.state);
            assert!(a.state.valence().abs() <= 1.0 && a.state.arousal().abs() <= 1.0);
        }
        assert_ne!(a.state, c.state);
    }

    #[test]
    fn biometric_emission_round_trip() {
        let d = DriverModel::new(va(0.0, 0.0), DriverParams { base_hr: 60.0, ..DriverParams::default() }, 1);
        let f = compute_features(&d.emit_biometrics(20, 0)).unwrap();
        assert!((f.mean_hr - 60.0).abs() < 1e-9);

        let d = DriverModel::new(va(0.0, 1.0), DriverParams { base_hr: 60.0, hr_gain: 20.0, ..DriverParams::default() }, 1);
        let f = compute_features(&d.emit_biometrics(20, 0)).unwrap();
        assert!((f.mean_hr - 80.0).abs() < 1e-6);

        for n in [10, 11, 37, 60] {
            let d = DriverModel::new(va(-1.0, 0.3), DriverParams { base_rmssd: 50.0, rmssd_gain: 0.5, ..DriverParams::default() }, 1);
            let f = compute_features(&d.emit_biometrics(n, 500)).unwrap();
            assert!((f.rmssd - 25.0).abs() / 25.0 < 0.05, "n={n} rmssd={}", f.rmssd);
            assert!((f.mean_hr - d.target_hr()).abs() / d.target_hr() < 1e-6);
            assert_eq!(f.sample_count, n);
        }
    }

    #[test]
    fn telemetry_emission_round_trip() {
        let calm = driver(va(0.5, -0.5), 0.2);
        let samples = calm.emit_telemetry(20, 1.0, 0.0);
        assert!(samples.iter().all(|s| s.speed == samples[0].speed));
        assert!(jerk_series(&samples).unwrap().iter().all(|j| j.jerk == 0.0));

        let angry = DriverModel::new(va(-1.0, 1.0), DriverParams { jerk_max: 3.0, ..DriverParams::default() }, 1);
        for dt in [1.0, 0.5] {
            let j = jerk_series(&angry.emit_telemetry(31, dt, 10.0)).unwrap();
            let mean = j.iter().map(|e| e.jerk.abs()).sum::<f64>() / j.len() as f64;
            assert!((mean - 3.0).abs() / 3.0 < 0.05, "dt={dt}: {mean}");
        }
    }

    #[test]
    fn session_lengths_and_determinism() {
        let (catalog, labels) = four_quadrant_catalog();
        let policy = MoodRecommender::<f64>::default();
        let detector = ThresholdDetector::<f64>::default();
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
        let mut cfg = SessionConfig::new(3);
        cfg.track_count = 1;
        let r = run_session(&cfg, &UserProfile::new("u"), &engine).unwrap();
        assert_eq!(r.trajectory.len(), 2);
        assert_eq!(r.played_tracks.len(), 1);
        assert_eq!(r.playlists.len(), 1);
        assert_eq!(r.feedback.len(), 1);

        cfg.track_count = 12;
        cfg.driver.noise_std = 0.1;
        cfg.start_state = va(-0.7, 0.6);
        let a = run_session(&cfg, &UserProfile::new("u"), &engine).unwrap();
        let b = run_session(&cfg, &UserProfile::new("u"), &engine).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn maintenance_fixed_point() {
        let (catalog, labels) = four_quadrant_catalog();
        let policy = MoodRecommender::<f64>::default();
        let detector = ThresholdDetector::<f64>::default();
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
        let mut cfg = SessionConfig::new(5);
        cfg.track_count = 10;
        cfg.start_state = centroid_of(Tender);
        let r = run_session(&cfg, &UserProfile::new("u"), &engine).unwrap();
        assert_eq!(r.steps_to_target, Some(0));
        assert_eq!(r.final_quadrant, Tender);
        assert!(r.trajectory.iter().all(|row| row.fused.quadrant == Tender));
    }

    #[test]
    fn empty_catalog_and_bad_config() {
        let policy = MoodRecommender::<f64>::default();
        let detector = ThresholdDetector::<f64>::default();
        let catalog = Catalog::default();
        let labels = Labels::new();
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
        assert!(matches!(
            run_session(&SessionConfig::new(1), &UserProfile::new("u"), &engine),
            Err(SimError::EmptyCatalog)
        ));
        let mut cfg = SessionConfig::<f64>::new(1);
        cfg.track_count = 0;
        assert!(cfg.validate().is_err());
        cfg.track_count = 1;
        cfg.driver.inertia = 1.5;
        assert!(cfg.validate().is_err());
    }

    struct AlwaysAngry;
    impl MoodDetector<f64> for AlwaysAngry {
        fn detect(&self, _: &HrvFeatures, _: &Baseline) -> Result<Detection, HrvError> {
            Ok(Detection { levels: Angry.levels(), point: centroid_of(Angry) })
        }
    }

    #[test]
    fn detector_is_pluggable() {
        let (catalog, labels) = four_quadrant_catalog();
        let policy = FixedQuadrantPolicy { quadrant: Happy, config: RecommenderConfig::default() };
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &AlwaysAngry };
        let mut cfg = SessionConfig::new(1);
        cfg.track_count = 3;
        let r = run_session(&cfg, &UserProfile::new("u"), &engine).unwrap();
        assert!(r.fused_sequence().iter().all(|q| *q == Angry));
        assert!(r.played_tracks.iter().all(|t| t.starts_with("happy")));
    }

    fn bio_block(start: u64, rr: f64, n: usize) -> Vec<TraceEvent> {
        (0..n)
            .map(|i| {
                let swing = if i % 2 == 0 { 50.0 } else { -50.0 };
                TraceEvent::Biometric(RrSample::new(start + i as u64 * 1000, rr + swing))
            })
            .collect()
    }

    fn tele_block(start: f64, n: usize) -> Vec<TraceEvent> {
        (0..n)
            .map(|i| TraceEvent::Telemetry(SpeedSample::new(start + i as f64, 12.0).unwrap()))
            .collect()
    }

    #[test]
    fn replay_single_cycle_and_feedback() {
        let (catalog, labels) = four_quadrant_catalog();
        let policy = MoodRecommender::<f64>::default();
        let detector = ThresholdDetector::<f64>::default();
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
        let mut profile = UserProfile::new("u");
        profile.baseline = Some(Baseline::new(60.0, 10.0).unwrap());

        let mut events = bio_block(0, 1000.0, 12);
        events.extend(tele_block(0.0, 5));
        let r = replay_trace(&events, &profile, &engine, &ReplayConfig::default()).unwrap();
        assert_eq!(r.playlists.len(), 1);
        assert_eq!(r.trajectory.len(), 1);

        events.push(TraceEvent::Feedback(FeedbackEvent {
            timestamp: 99,
            user_id: "u".into(),
            track_id: "sad-1".into(),
            kind: FeedbackKind::Liked,
        }));
        let r = replay_trace(&events, &profile, &engine, &ReplayConfig::default()).unwrap();
        assert!(r.final_profile.is_liked("sad-1"));
        assert!(!profile.is_liked("sad-1"));

        assert!(matches!(
            replay_trace(&[], &profile, &engine, &ReplayConfig::default()),
            Err(SimError::EmptyTrace)
        ));
    }

    #[test]
    fn replay_cold_start_calibrates_from_first_three_windows() {
        let (catalog, labels) = four_quadrant_catalog();
        let policy = MoodRecommender::<f64>::default();
        let detector = ThresholdDetector::<f64>::default();
        let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
        let mut events = Vec::new();
        for k in 0..5u64 {
            events.extend(bio_block(k * 100_000, 1000.0, 10));
            events.extend(tele_block(k as f64 * 100.0, 4));
            events.push(TraceEvent::Feedback(FeedbackEvent {
                timestamp: k,
                user_id: "u".into(),
                track_id: "happy-0".into(),
                kind: FeedbackKind::Played,
            }));
        }
        let r = replay_trace(&events, &UserProfile::new("u"), &engine, &ReplayConfig::default()).unwrap();
        assert_eq!(r.trajectory.len(), 2);
        let b = r.final_profile.baseline.unwrap();
        assert!((b.hr - 60.0).abs() < 1e-9);
        assert!((b.rmssd - 100.0).abs() < 1e-9);
    }
}
