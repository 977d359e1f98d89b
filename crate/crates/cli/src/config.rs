//! Flat `key = value` configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are rejected.
//! Later assignments (including `--set key=value` overrides) win.

use std::path::{Path, PathBuf};

use chrono::NaiveTime;
use drivetune_core::context::{parse_hhmm, DayWindow};
use drivetune_core::hrv::DetectorConfig;
use drivetune_core::recommend::RecommenderConfig;
use drivetune_core::sim::{DriverParams, ReplayConfig, SessionConfig};
use drivetune_core::telemetry::{DriveScenario, ScenarioThresholds, DEFAULT_STYLE_WINDOW_S};
use drivetune_core::ValenceArousal;

use crate::error::{AppError, AppResult};

pub const KEYS: &[&str] = &[
    "data_dir",
    "day_start",
    "day_end",
    "detector.arousal_delta",
    "detector.valence_delta",
    "detector.arousal_scale",
    "jerk_threshold.urban",
    "jerk_threshold.suburban",
    "jerk_threshold.highway",
    "style_window_s",
    "weights.regulation.mood",
    "weights.regulation.pref",
    "weights.maintenance.mood",
    "weights.maintenance.pref",
    "preference.neutral",
    "preference.skip_penalty",
    "playlist.k",
    "sim.user",
    "sim.track_count",
    "sim.start_valence",
    "sim.start_arousal",
    "sim.clock_start",
    "sim.scenario",
    "sim.inertia",
    "sim.noise_std",
    "sim.base_hr",
    "sim.base_rmssd",
    "sim.hr_gain",
    "sim.rmssd_gain",
    "sim.jerk_max",
    "sim.cruise_speed",
    "sim.centroid_magnitude",
    "sim.bio_window",
    "sim.telemetry_samples",
    "sim.telemetry_dt",
    "sim.track_minutes",
    "replay.clock_start",
    "replay.scenario",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AppConfig {
    pub data_dir: Option<PathBuf>,
    pub day_window: DayWindow,
    pub detector: DetectorConfig<f64>,
    pub thresholds: ScenarioThresholds<f64>,
    pub style_window_s: f64,
    pub recommender: RecommenderConfig<f64>,
    pub sim_user: String,
    pub track_count: usize,
    pub start_valence: f64,
    pub start_arousal: f64,
    pub clock_start: NaiveTime,
    pub scenario: DriveScenario,
    pub driver: DriverParams<f64>,
    pub bio_window: usize,
    pub telemetry_samples: usize,
    pub telemetry_dt: f64,
    pub track_minutes: u32,
    pub replay_clock_start: NaiveTime,
    pub replay_scenario: DriveScenario,
}

impl Default for AppConfig {
    fn default() -> Self {
        let sim = SessionConfig::<f64>::new(0);
        AppConfig {
            data_dir: None,
            day_window: DayWindow::default(),
            detector: DetectorConfig::default(),
            thresholds: ScenarioThresholds::default(),
            style_window_s: DEFAULT_STYLE_WINDOW_S,
            recommender: RecommenderConfig::default(),
            sim_user: "driver".to_string(),
            track_count: sim.track_count,
            start_valence: 0.0,
            start_arousal: 0.0,
            clock_start: sim.clock_start,
            scenario: sim.scenario,
            driver: sim.driver,
            bio_window: sim.bio_window,
            telemetry_samples: sim.telemetry_samples,
            telemetry_dt: sim.telemetry_dt,
            track_minutes: sim.track_minutes,
            replay_clock_start: sim.clock_start,
            replay_scenario: sim.scenario,
        }
    }
}

fn real(key: &str, raw: &str) -> AppResult<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| AppError::data(format!("`{key}`: expected a number, got `{raw}`")))
}

fn count(key: &str, raw: &str) -> AppResult<usize> {
    raw.parse::<usize>()
        .map_err(|_| AppError::data(format!("`{key}`: expected a non-negative integer, got `{raw}`")))
}

fn time(key: &str, raw: &str) -> AppResult<NaiveTime> {
    parse_hhmm(raw).map_err(|e| AppError::data(format!("`{key}`: {e}")))
}

fn scenario(key: &str, raw: &str) -> AppResult<DriveScenario> {
    raw.parse().map_err(|e| AppError::data(format!("`{key}`: {e}")))
}

impl AppConfig {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::data(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = AppConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> AppResult<()> {
        for (idx, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| AppError::data(format!("config line {}: expected `key = value`", idx + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| AppError::data(format!("config line {}: {e}", idx + 1)))?;
        }
        self.validate()
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> AppResult<()> {
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| AppError::Usage(format!("override `{o}` must look like key=value")))?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, v: &str) -> AppResult<()> {
        let th = |s: &mut Self, sc: DriveScenario| -> AppResult<()> {
            s.thresholds = s.thresholds.with(sc, real(key, v)?).map_err(AppError::data)?;
            Ok(())
        };
        match key {
            "data_dir" => self.data_dir = Some(PathBuf::from(v)),
            "day_start" => {
                self.day_window = DayWindow::new(time(key, v)?, self.day_window.end()).map_err(AppError::data)?
            }
            "day_end" => {
                self.day_window = DayWindow::new(self.day_window.start(), time(key, v)?).map_err(AppError::data)?
            }
            "detector.arousal_delta" => self.detector.arousal_delta = real(key, v)?,
            "detector.valence_delta" => self.detector.valence_delta = real(key, v)?,
            "detector.arousal_scale" => self.detector.arousal_scale = real(key, v)?,
            "jerk_threshold.urban" => th(self, DriveScenario::Urban)?,
            "jerk_threshold.suburban" => th(self, DriveScenario::Suburban)?,
            "jerk_threshold.highway" => th(self, DriveScenario::Highway)?,
            "style_window_s" => self.style_window_s = real(key, v)?,
            "weights.regulation.mood" => self.recommender.weights.regulation.mood = real(key, v)?,
            "weights.regulation.pref" => self.recommender.weights.regulation.pref = real(key, v)?,
            "weights.maintenance.mood" => self.recommender.weights.maintenance.mood = real(key, v)?,
            "weights.maintenance.pref" => self.recommender.weights.maintenance.pref = real(key, v)?,
            "preference.neutral" => self.recommender.preference.neutral = real(key, v)?,
            "preference.skip_penalty" => self.recommender.preference.skip_penalty = real(key, v)?,
            "playlist.k" => self.recommender.playlist_len = count(key, v)?,
            "sim.user" => self.sim_user = v.to_string(),
            "sim.track_count" => self.track_count = count(key, v)?,
            "sim.start_valence" => self.start_valence = real(key, v)?,
            "sim.start_arousal" => self.start_arousal = real(key, v)?,
            "sim.clock_start" => self.clock_start = time(key, v)?,
            "sim.scenario" => self.scenario = scenario(key, v)?,
            "sim.inertia" => self.driver.inertia = real(key, v)?,
            "sim.noise_std" => self.driver.noise_std = real(key, v)?,
            "sim.base_hr" => self.driver.base_hr = real(key, v)?,
            "sim.base_rmssd" => self.driver.base_rmssd = real(key, v)?,
            "sim.hr_gain" => self.driver.hr_gain = real(key, v)?,
            "sim.rmssd_gain" => self.driver.rmssd_gain = real(key, v)?,
            "sim.jerk_max" => self.driver.jerk_max = real(key, v)?,
            "sim.cruise_speed" => self.driver.cruise_speed = real(key, v)?,
            "sim.centroid_magnitude" => self.driver.centroid_magnitude = real(key, v)?,
            "sim.bio_window" => self.bio_window = count(key, v)?,
            "sim.telemetry_samples" => self.telemetry_samples = count(key, v)?,
            "sim.telemetry_dt" => self.telemetry_dt = real(key, v)?,
            "sim.track_minutes" => {
                self.track_minutes =
                    v.parse().map_err(|_| AppError::data(format!("`{key}`: expected minutes, got `{v}`")))?
            }
            "replay.clock_start" => self.replay_clock_start = time(key, v)?,
            "replay.scenario" => self.replay_scenario = scenario(key, v)?,
            other => return Err(AppError::data(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> AppResult<()> {
        let unit_open = |name: &str, x: f64| {
            if x > 0.0 && x < 1.0 {
                Ok(())
            } else {
                Err(AppError::data(format!("`{name}` must lie in (0, 1), got {x}")))
            }
        };
        unit_open("detector.arousal_delta", self.detector.arousal_delta)?;
        unit_open("detector.valence_delta", self.detector.valence_delta)?;
        if self.detector.arousal_scale <= 0.0 {
            return Err(AppError::data("`detector.arousal_scale` must be positive"));
        }
        if self.style_window_s <= 0.0 {
            return Err(AppError::data("`style_window_s` must be positive"));
        }
        for (name, x) in [("sim.start_valence", self.start_valence), ("sim.start_arousal", self.start_arousal)] {
            if !(-1.0..=1.0).contains(&x) {
                return Err(AppError::data(format!("`{name}` must lie in [-1, 1], got {x}")));
            }
        }
        self.recommender.validate().map_err(AppError::data)?;
        self.session(0)?.validate().map_err(AppError::data)?;
        Ok(())
    }

    pub fn session(&self, seed: u64) -> AppResult<SessionConfig<f64>> {
        Ok(SessionConfig {
            track_count: self.track_count,
            start_state: ValenceArousal::new(self.start_valence, self.start_arousal).map_err(AppError::data)?,
            clock_start: self.clock_start,
            scenario: self.scenario,
            day_window: self.day_window,
            detector: self.detector,
            thresholds: self.thresholds,
            driver: self.driver,
            seed,
            bio_window: self.bio_window,
            telemetry_samples: self.telemetry_samples,
            telemetry_dt: self.telemetry_dt,
            style_window_s: self.style_window_s,
            track_minutes: self.track_minutes,
        })
    }

    pub fn replay(&self) -> ReplayConfig<f64> {
        ReplayConfig {
            clock_start: self.replay_clock_start,
            scenario: self.replay_scenario,
            day_window: self.day_window,
            thresholds: self.thresholds,
            style_window_s: self.style_window_s,
        }
    }
}
