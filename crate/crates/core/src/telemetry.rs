//! Speed trace → acceleration → jerk, and jerk-based driving style.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

/// Default aggregation window for the style decision, seconds.
pub const DEFAULT_STYLE_WINDOW_S: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelemetryError {
    #[error("timestamps must strictly increase ({prev} s then {curr} s)")]
    Ordering { prev: f64, curr: f64 },
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { got: usize, needed: usize },
    #[error("invalid speed sample at {timestamp} s: {speed} m/s")]
    InvalidSpeed { timestamp: f64, speed: f64 },
    #[error("jerk threshold for {0} must be positive and finite")]
    InvalidThreshold(DriveScenario),
    #[error("unknown drive scenario `{0}`")]
    UnknownScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SpeedSample<T: Real = f64> {
    /// Seconds since session start.
    pub timestamp: T,
    /// Average speed over the preceding sampling interval, m/s.
    pub speed: T,
}

impl<T: Real> SpeedSample<T> {
    pub fn new(timestamp: T, speed: T) -> Result<Self, TelemetryError> {
        if !(timestamp.is_finite() && speed.is_finite() && speed >= T::zero()) {
            return Err(TelemetryError::InvalidSpeed {
                timestamp: timestamp.to_f64_lossy(),
                speed: speed.to_f64_lossy(),
            });
        }
        Ok(SpeedSample { timestamp, speed })
    }
}

/// Acceleration attributed to the later of the two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Acceleration<T: Real = f64> {
    pub timestamp: T,
    pub value: T,
}

/// Jerk attributed to the newest of the three samples that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct JerkEstimate<T: Real = f64> {
    pub timestamp: T,
    pub jerk: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DriveScenario {
    Urban,
    Suburban,
    Highway,
}

impl DriveScenario {
    pub const ALL: [DriveScenario; 3] = [DriveScenario::Urban, DriveScenario::Suburban, DriveScenario::Highway];

    pub fn key(self) -> &'static str {
        match self {
            DriveScenario::Urban => "urban",
            DriveScenario::Suburban => "suburban",
            DriveScenario::Highway => "highway",
        }
    }
}

impl fmt::Display for DriveScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriveScenario::Urban => "Urban",
            DriveScenario::Suburban => "Suburban",
            DriveScenario::Highway => "Highway",
        })
    }
}

impl FromStr for DriveScenario {
    type Err = TelemetryError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "urban" => Ok(DriveScenario::Urban),
            "suburban" => Ok(DriveScenario::Suburban),
            "highway" => Ok(DriveScenario::Highway),
            _ => Err(TelemetryError::UnknownScenario(s.to_string())),
        }
    }
}

/// Mean-absolute-jerk threshold per scenario, m/s³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScenarioThresholds<T: Real = f64> {
    urban: T,
    suburban: T,
    highway: T,
}

impl<T: Real> ScenarioThresholds<T> {
    pub fn new(urban: T, suburban: T, highway: T) -> Result<Self, TelemetryError> {
        let t = ScenarioThresholds { urban, suburban, highway };
        for s in DriveScenario::ALL {
            let v = t.get(s);
            if !(v.is_finite() && v > T::zero()) {
                return Err(TelemetryError::InvalidThreshold(s));
            }
        }
        Ok(t)
    }

    pub fn get(&self, scenario: DriveScenario) -> T {
        match scenario {
            DriveScenario::Urban => self.urban,
            DriveScenario::Suburban => self.suburban,
            DriveScenario::Highway => self.highway,
        }
    }

    pub fn with(mut self, scenario: DriveScenario, value: T) -> Result<Self, TelemetryError> {
        match scenario {
            DriveScenario::Urban => self.urban = value,
            DriveScenario::Suburban => self.suburban = value,
            DriveScenario::Highway => self.highway = value,
        }
        Self::new(self.urban, self.suburban, self.highway)
    }
}

impl<T: Real> Default for ScenarioThresholds<T> {
    /// Placeholder values; real deployments should configure their own.
    fn default() -> Self {
        ScenarioThresholds { urban: T::lit(0.9), suburban: T::lit(0.6), highway: T::lit(0.3) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StyleFlag {
    Aggressive,
    Calm,
}

impl fmt::Display for StyleFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StyleFlag::Aggressive => "Aggressive",
            StyleFlag::Calm => "Calm",
        })
    }
}

pub fn estimate_acceleration<T: Real>(
    prev: &SpeedSample<T>,
    curr: &SpeedSample<T>,
) -> Result<Acceleration<T>, TelemetryError> {
    let dt = curr.timestamp - prev.timestamp;
    if dt.is_nan() || dt <= T::zero() {
        return Err(TelemetryError::Ordering {
            prev: prev.timestamp.to_f64_lossy(),
            curr: curr.timestamp.to_f64_lossy(),
        });
    }
    Ok(Acceleration { timestamp: curr.timestamp, value: (curr.speed - prev.speed) / dt })
}

/// Jerk from three consecutive samples: difference of the two acceleration
/// estimates over the gap between their attribution times.
pub fn estimate_jerk<T: Real>(samples: &[SpeedSample<T>; 3]) -> Result<JerkEstimate<T>, TelemetryError> {
    let a1 = estimate_acceleration(&samples[0], &samples[1])?;
    let a2 = estimate_acceleration(&samples[1], &samples[2])?;
    Ok(JerkEstimate {
        timestamp: a2.timestamp,
        jerk: (a2.value - a1.value) / (a2.timestamp - a1.timestamp),
    })
}

/// One jerk estimate per interior-and-later sample (`len - 2` estimates).
pub fn jerk_series<T: Real>(samples: &[SpeedSample<T>]) -> Result<Vec<JerkEstimate<T>>, TelemetryError> {
    if samples.len() < 3 {
        return Err(TelemetryError::InsufficientData { got: samples.len(), needed: 3 });
    }
    samples
        .windows(3)
        .map(|w| estimate_jerk(&[w[0], w[1], w[2]]))
        .collect()
}

pub fn mean_abs_jerk<T: Real>(jerks: &[JerkEstimate<T>]) -> Option<T> {
    if jerks.is_empty() {
        return None;
    }
    let sum: T = jerks.iter().map(|j| j.jerk.abs()).sum();
    Some(sum / T::lit(jerks.len() as f64))
}

/// Aggressive iff mean |jerk| strictly exceeds the scenario threshold.
pub fn classify_style<T: Real>(
    jerks: &[JerkEstimate<T>],
    scenario: DriveScenario,
    thresholds: &ScenarioThresholds<T>,
) -> Result<StyleFlag, TelemetryError> {
    let mean = mean_abs_jerk(jerks).ok_or(TelemetryError::InsufficientData { got: 0, needed: 1 })?;
    Ok(if mean > thresholds.get(scenario) { StyleFlag::Aggressive } else { StyleFlag::Calm })
}

/// Streaming jerk estimator over a three-sample ring, keeping the jerks that
/// fall inside a trailing time window for the style decision.
#[derive(Debug, Clone)]
pub struct JerkTracker<T: Real = f64> {
    ring: VecDeque<SpeedSample<T>>,
    window_s: T,
    recent: VecDeque<JerkEstimate<T>>,
}

impl<T: Real> JerkTracker<T> {
    pub fn new(window_s: T) -> Self {
        JerkTracker { ring: VecDeque::with_capacity(3), window_s, recent: VecDeque::new() }
    }

    /// Feeds one sample; returns the new jerk estimate once three samples are buffered.
    pub fn push(&mut self, sample: SpeedSample<T>) -> Result<Option<JerkEstimate<T>>, TelemetryError> {
        if let Some(last) = self.ring.back() {
            if sample.timestamp.is_nan() || sample.timestamp <= last.timestamp {
                return Err(TelemetryError::Ordering {
                    prev: last.timestamp.to_f64_lossy(),
                    curr: sample.timestamp.to_f64_lossy(),
                });
            }
        }
        if self.ring.len() == 3 {
            self.ring.pop_front();
        }
        self.ring.push_back(sample);
        if self.ring.len() < 3 {
            return Ok(None);
        }
        let jerk = estimate_jerk(&[self.ring[0], self.ring[1], self.ring[2]])?;
        self.recent.push_back(jerk);
        while let Some(front) = self.recent.front() {
            if jerk.timestamp - front.timestamp > self.window_s {
                self.recent.pop_front();
            } else {
                break;
            }
        }
        Ok(Some(jerk))
    }

    pub fn window(&self) -> Vec<JerkEstimate<T>> {
        self.recent.iter().copied().collect()
    }

    pub fn style(
        &self,
        scenario: DriveScenario,
        thresholds: &ScenarioThresholds<T>,
    ) -> Result<StyleFlag, TelemetryError> {
        classify_style(&self.window(), scenario, thresholds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(t: f64, v: f64) -> SpeedSample {
        SpeedSample::new(t, v).unwrap()
    }

    fn j(x: f64) -> JerkEstimate {
        JerkEstimate { timestamp: 0.0, jerk: x }
    }

    #[test]
    fn acceleration_examples() {
        assert_eq!(estimate_acceleration(&s(0.0, 10.0), &s(1.0, 10.0)).unwrap().value, 0.0);
        let a = estimate_acceleration(&s(0.0, 10.0), &s(1.0, 13.0)).unwrap();
        assert_eq!((a.timestamp, a.value), (1.0, 3.0));
        assert!(matches!(
            estimate_acceleration(&s(1.0, 10.0), &s(1.0, 13.0)),
            Err(TelemetryError::Ordering { .. })
        ));
        assert!(estimate_acceleration(&s(2.0, 10.0), &s(1.0, 13.0)).is_err());
    }

    #[test]
    fn jerk_of_quadratic_is_exact() {
        let est = estimate_jerk(&[s(0.0, 0.0), s(1.0, 3.0), s(2.0, 12.0)]).unwrap();
        assert_eq!(est.jerk, 6.0);
        assert_eq!(est.timestamp, 2.0);
    }

    #[test]
    fn jerk_of_linear_and_constant_is_zero() {
        assert_eq!(estimate_jerk(&[s(0.0, 5.0), s(1.0, 7.0), s(2.0, 9.0)]).unwrap().jerk, 0.0);
        assert_eq!(estimate_jerk(&[s(0.0, 5.0), s(1.0, 5.0), s(2.0, 5.0)]).unwrap().jerk, 0.0);
    }

    #[test]
    fn jerk_with_jittered_sampling() {
        // a1 = (4-0)/2 = 2 at t=2, a2 = (7-4)/0.5 = 6 at t=2.5 -> jerk 8
        let est = estimate_jerk(&[s(0.0, 0.0), s(2.0, 4.0), s(2.5, 7.0)]).unwrap();
        assert_eq!(est.jerk, 8.0);
    }

    #[test]
    fn style_rule() {
        let th = ScenarioThresholds::new(1.0, 0.5, 0.25).unwrap();
        assert_eq!(classify_style(&[j(0.0), j(0.0)], DriveScenario::Urban, &th).unwrap(), StyleFlag::Calm);
        assert_eq!(classify_style(&[j(2.0), j(-2.0)], DriveScenario::Urban, &th).unwrap(), StyleFlag::Aggressive);
        assert_eq!(classify_style(&[j(1.0), j(-1.0)], DriveScenario::Urban, &th).unwrap(), StyleFlag::Calm);
        assert_eq!(classify_style(&[j(1.0)], DriveScenario::Highway, &th).unwrap(), StyleFlag::Aggressive);
        assert!(matches!(
            classify_style::<f64>(&[], DriveScenario::Urban, &th),
            Err(TelemetryError::InsufficientData { .. })
        ));
    }

    #[test]
    fn thresholds_validate() {
        assert!(ScenarioThresholds::new(1.0, 0.0, 1.0).is_err());
        assert!(ScenarioThresholds::new(1.0, 1.0, f64::NAN).is_err());
        let d = ScenarioThresholds::<f64>::default();
        assert_eq!(d.get(DriveScenario::Suburban), 0.6);
        assert_eq!(d.with(DriveScenario::Highway, 2.0).unwrap().get(DriveScenario::Highway), 2.0);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(SpeedSample::new(0.0, -1.0).is_err());
        assert!(SpeedSample::new(f64::NAN, 1.0).is_err());
        assert!(jerk_series(&[s(0.0, 1.0), s(1.0, 1.0)]).is_err());
    }

    #[test]
    fn tracker_keeps_trailing_window() {
        let mut tr = JerkTracker::new(5.0);
        assert_eq!(tr.push(s(0.0, 0.0)).unwrap(), None);
        assert_eq!(tr.push(s(1.0, 3.0)).unwrap(), None);
        for k in 2..20 {
            let t = k as f64;
            let est = tr.push(s(t, 3.0 * t * t)).unwrap().unwrap();
            assert_eq!(est.jerk, 6.0);
        }
        let w = tr.window();
        assert_eq!(w.len(), 6);
        assert_eq!(w.last().unwrap().timestamp, 19.0);
        assert!(tr.push(s(19.0, 1.0)).is_err());
        let th = ScenarioThresholds::new(6.0, 5.0, 1.0).unwrap();
        assert_eq!(tr.style(DriveScenario::Urban, &th).unwrap(), StyleFlag::Calm);
        assert_eq!(tr.style(DriveScenario::Suburban, &th).unwrap(), StyleFlag::Aggressive);
    }

    #[test]
    fn scenario_names() {
        assert_eq!("Highway".parse::<DriveScenario>().unwrap(), DriveScenario::Highway);
        assert_eq!("urban".parse::<DriveScenario>().unwrap(), DriveScenario::Urban);
        assert!("rural".parse::<DriveScenario>().is_err());
    }

    proptest! {
        #[test]
        fn translation_and_time_shift_invariance(
            speeds in proptest::collection::vec(0.0f64..40.0, 3..20),
            dts in proptest::collection::vec(0.2f64..3.0, 20),
            offset in 0.0f64..20.0,
            shift in -100.0f64..100.0,
        ) {
            let mut t = 0.0;
            let base: Vec<SpeedSample> = speeds.iter().zip(&dts).map(|(&v, &dt)| { t += dt; s(t, v) }).collect();
            let moved: Vec<SpeedSample> = base.iter().map(|x| s(x.timestamp, x.speed + offset)).collect();
            let shifted: Vec<SpeedSample> = base.iter().map(|x| SpeedSample { timestamp: x.timestamp + shift, speed: x.speed }).collect();
            let j0 = jerk_series(&base).unwrap();
            let j1 = jerk_series(&moved).unwrap();
            let j2 = jerk_series(&shifted).unwrap();
            for ((a, b), c) in j0.iter().zip(&j1).zip(&j2) {
                let tol = 1e-9 * (1.0 + a.jerk.abs());
                prop_assert!((a.jerk - b.jerk).abs() <= tol * 1e3);
                prop_assert!((a.jerk - c.jerk).abs() <= tol * 1e3);
            }
        }

        #[test]
        fn raising_threshold_never_makes_aggressive(
            jerks in proptest::collection::vec(-5.0f64..5.0, 1..30),
            th in 0.01f64..5.0, bump in 0.0f64..5.0,
        ) {
            let js: Vec<_> = jerks.iter().map(|&x| j(x)).collect();
            let lo = ScenarioThresholds::new(th, th, th).unwrap();
            let hi = ScenarioThresholds::new(th + bump, th + bump, th + bump).unwrap();
            let a = classify_style(&js, DriveScenario::Urban, &lo).unwrap();
            let b = classify_style(&js, DriveScenario::Urban, &hi).unwrap();
            prop_assert!(!(a == StyleFlag::Calm && b == StyleFlag::Aggressive));
        }
    }
}
