//! Heart-rate-variability features over RR-interval windows and a
//! baseline-relative threshold mood detector.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mood::{Level, LevelPair, MoodError, ValenceArousal};
use crate::num::Real;

pub const MIN_WINDOW_SAMPLES: usize = 10;
pub const MIN_CALIBRATION_WINDOWS: usize = 3;
/// Accepted RR range in milliseconds, both ends exclusive.
pub const RR_RANGE_MS: (f64, f64) = (300.0, 2000.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HrvError {
    #[error("window has {got} samples, at least {needed} required")]
    InsufficientData { got: usize, needed: usize },
    #[error("sample {index} at {timestamp_ms} ms: RR {rr_ms} ms outside (300, 2000)")]
    Artifact { index: usize, timestamp_ms: u64, rr_ms: f64 },
    #[error("sample {index} at {timestamp_ms} ms is not after the previous sample")]
    Unordered { index: usize, timestamp_ms: u64 },
    #[error("calibration needs at least {needed} windows, got {got}")]
    InsufficientCalibration { got: usize, needed: usize },
    #[error("baseline values must be positive and finite")]
    InvalidBaseline,
    #[error(transparent)]
    Mood(#[from] MoodError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RrSample<T: Real = f64> {
    pub timestamp_ms: u64,
    pub rr_ms: T,
}

impl<T: Real> RrSample<T> {
    pub fn new(timestamp_ms: u64, rr_ms: T) -> Self {
        RrSample { timestamp_ms, rr_ms }
    }

    pub fn is_plausible(&self) -> bool {
        let rr = self.rr_ms;
        rr.is_finite() && rr > T::lit(RR_RANGE_MS.0) && rr < T::lit(RR_RANGE_MS.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HrvFeatures<T: Real = f64> {
    /// Beats per minute.
    pub mean_hr: T,
    /// Population standard deviation of RR, ms.
    pub sdnn: T,
    /// Root mean square of successive RR differences, ms.
    pub rmssd: T,
    pub window_start_ms: u64,
    pub window_end_ms: u64,
    pub sample_count: usize,
}

/// Streaming accumulator: Welford running mean/variance plus a running sum of
/// squared successive differences.
#[derive(Debug, Clone)]
pub struct HrvAccumulator<T: Real = f64> {
    count: usize,
    mean: T,
    m2: T,
    diff_sq_sum: T,
    prev: Option<RrSample<T>>,
    first_ms: u64,
}

impl<T: Real> Default for HrvAccumulator<T> {
    fn default() -> Self {
        HrvAccumulator {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
            diff_sq_sum: T::zero(),
            prev: None,
            first_ms: 0,
        }
    }
}

impl<T: Real> HrvAccumulator<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn push(&mut self, sample: RrSample<T>) -> Result<(), HrvError> {
        let index = self.count;
        if !sample.is_plausible() {
            return Err(HrvError::Artifact {
                index,
                timestamp_ms: sample.timestamp_ms,
                rr_ms: sample.rr_ms.to_f64_lossy(),
            });
        }
        match self.prev {
            Some(prev) => {
                if sample.timestamp_ms <= prev.timestamp_ms {
                    return Err(HrvError::Unordered { index, timestamp_ms: sample.timestamp_ms });
                }
                let d = sample.rr_ms - prev.rr_ms;
                self.diff_sq_sum = self.diff_sq_sum + d * d;
            }
            None => self.first_ms = sample.timestamp_ms,
        }
        self.count += 1;
        let n = T::lit(self.count as f64);
        let delta = sample.rr_ms - self.mean;
        self.mean = self.mean + delta / n;
        self.m2 = self.m2 + delta * (sample.rr_ms - self.mean);
        self.prev = Some(sample);
        Ok(())
    }

    pub fn features(&self) -> Result<HrvFeatures<T>, HrvError> {
        if self.count < MIN_WINDOW_SAMPLES {
            return Err(HrvError::InsufficientData { got: self.count, needed: MIN_WINDOW_SAMPLES });
        }
        let n = T::lit(self.count as f64);
        let variance = (self.m2 / n).max(T::zero());
        let rmssd = (self.diff_sq_sum / (n - T::one())).sqrt();
        Ok(HrvFeatures {
            mean_hr: T::lit(60_000.0) / self.mean,
            sdnn: variance.sqrt(),
            rmssd,
            window_start_ms: self.first_ms,
            window_end_ms: self.prev.map_or(self.first_ms, |p| p.timestamp_ms),
            sample_count: self.count,
        })
    }
}

pub fn compute_features<T: Real>(window: &[RrSample<T>]) -> Result<HrvFeatures<T>, HrvError> {
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(HrvError::InsufficientData { got: window.len(), needed: MIN_WINDOW_SAMPLES });
    }
    let mut acc = HrvAccumulator::new();
    for s in window {
        acc.push(*s)?;
    }
    acc.features()
}

/// Features for each window of `size` samples, advancing by `step` samples.
/// A trailing partial window is dropped.
pub fn sliding_features<T: Real>(
    samples: &[RrSample<T>],
    size: usize,
    step: usize,
) -> impl Iterator<Item = Result<HrvFeatures<T>, HrvError>> + '_ {
    let step = step.max(1);
    let count = if samples.len() >= size && size > 0 { (samples.len() - size) / step + 1 } else { 0 };
    (0..count).map(move |i| compute_features(&samples[i * step..i * step + size]))
}

/// Personal resting reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Baseline<T: Real = f64> {
    pub hr: T,
    pub rmssd: T,
}

impl<T: Real> Baseline<T> {
    pub fn new(hr: T, rmssd: T) -> Result<Self, HrvError> {
        let ok = |x: T| x.is_finite() && x > T::zero();
        if ok(hr) && ok(rmssd) {
            Ok(Baseline { hr, rmssd })
        } else {
            Err(HrvError::InvalidBaseline)
        }
    }
}

fn median<T: Real>(mut xs: Vec<T>) -> T {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / T::lit(2.0)
    }
}

/// Median heart rate and median RMSSD over at least three windows.
pub fn calibrate_baseline<T: Real>(windows: &[HrvFeatures<T>]) -> Result<Baseline<T>, HrvError> {
    if windows.len() < MIN_CALIBRATION_WINDOWS {
        return Err(HrvError::InsufficientCalibration {
            got: windows.len(),
            needed: MIN_CALIBRATION_WINDOWS,
        });
    }
    let hr = median(windows.iter().map(|w| w.mean_hr).collect());
    let rmssd = median(windows.iter().map(|w| w.rmssd).collect());
    Baseline::new(hr, rmssd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DetectorConfig<T: Real = f64> {
    /// Relative heart-rate rise above baseline needed for High arousal.
    pub arousal_delta: T,
    /// Relative RMSSD drop below baseline tolerated before valence turns Low.
    pub valence_delta: T,
    /// Heart-rate excursion, as a fraction of baseline, that maps to arousal ±1.
    pub arousal_scale: T,
}

impl<T: Real> Default for DetectorConfig<T> {
    fn default() -> Self {
        DetectorConfig {
            arousal_delta: T::lit(0.05),
            valence_delta: T::lit(0.10),
            arousal_scale: T::lit(0.25),
        }
    }
}

/// Binary levels (which drive recommendation) plus an advisory continuous point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Detection<T: Real = f64> {
    pub levels: LevelPair,
    pub point: ValenceArousal<T>,
}

/// Pluggable driver-mood detector.
pub trait MoodDetector<T: Real> {
    fn detect(&self, features: &HrvFeatures<T>, baseline: &Baseline<T>) -> Result<Detection<T>, HrvError>;
}

/// meanHr drives arousal, RMSSD drives valence, both relative to the baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThresholdDetector<T: Real = f64> {
    pub config: DetectorConfig<T>,
}

impl<T: Real> MoodDetector<T> for ThresholdDetector<T> {
    fn detect(&self, features: &HrvFeatures<T>, baseline: &Baseline<T>) -> Result<Detection<T>, HrvError> {
        detect_mood(features, baseline, &self.config)
    }
}

pub fn detect_mood<T: Real>(
    features: &HrvFeatures<T>,
    baseline: &Baseline<T>,
    config: &DetectorConfig<T>,
) -> Result<Detection<T>, HrvError> {
    let one = T::one();
    let arousal = if features.mean_hr > baseline.hr * (one + config.arousal_delta) {
        Level::High
    } else {
        Level::Low
    };
    let valence = if features.rmssd >= baseline.rmssd * (one - config.valence_delta) {
        Level::High
    } else {
        Level::Low
    };
    let a = ((features.mean_hr - baseline.hr) / (config.arousal_scale * baseline.hr)).clamp_to(-one, one);
    let v = ((features.rmssd - baseline.rmssd) / baseline.rmssd).clamp_to(-one, one);
    Ok(Detection {
        levels: LevelPair::new(valence, arousal),
        point: ValenceArousal::new(v, a)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(rrs: &[f64]) -> Vec<RrSample> {
        let mut t = 0u64;
        rrs.iter()
            .map(|&rr| {
                t += rr.round() as u64;
                RrSample::new(t, rr)
            })
            .collect()
    }

    fn features(mean_hr: f64, rmssd: f64) -> HrvFeatures {
        HrvFeatures { mean_hr, sdnn: 0.0, rmssd, window_start_ms: 0, window_end_ms: 0, sample_count: 10 }
    }

    #[test]
    fn constant_series() {
        let f = compute_features(&series(&[1000.0; 10])).unwrap();
        assert_eq!(f.mean_hr, 60.0);
        assert_eq!(f.sdnn, 0.0);
        assert_eq!(f.rmssd, 0.0);
        assert_eq!(f.sample_count, 10);
    }

    #[test]
    fn alternating_series() {
        let rrs: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 800.0 } else { 1000.0 }).collect();
        let f = compute_features(&series(&rrs)).unwrap();
        assert!((f.mean_hr - 60_000.0 / 900.0).abs() < 1e-9);
        assert!((f.rmssd - 200.0).abs() < 1e-9);
        assert!((f.sdnn - 100.0).abs() < 1e-9);
    }

    #[test]
    fn window_errors() {
        let err = compute_features(&series(&[1000.0; 5])).unwrap_err();
        assert_eq!(err, HrvError::InsufficientData { got: 5, needed: 10 });
        let mut rrs = vec![1000.0; 10];
        rrs[4] = 250.0;
        assert!(matches!(compute_features(&series(&rrs)), Err(HrvError::Artifact { index: 4, .. })));
        rrs[4] = 2000.0;
        assert!(matches!(compute_features(&series(&rrs)), Err(HrvError::Artifact { index: 4, .. })));
        let mut s = series(&[1000.0; 10]);
        s[3].timestamp_ms = s[2].timestamp_ms;
        assert!(matches!(compute_features(&s), Err(HrvError::Unordered { index: 3, .. })));
    }

    #[test]
    fn sliding_windows() {
        let s = series(&[1000.0; 25]);
        let ws: Vec<_> = sliding_features(&s, 10, 5).collect::<Result<_, _>>().unwrap();
        assert_eq!(ws.len(), 4);
        assert_eq!(ws[1].window_start_ms, s[5].timestamp_ms);
        assert_eq!(sliding_features(&s[..9], 10, 5).count(), 0);
    }

    #[test]
    fn baseline_median() {
        let ws = [features(60.0, 40.0), features(70.0, 50.0), features(62.0, 45.0)];
        let b = calibrate_baseline(&ws).unwrap();
        assert_eq!(b.hr, 62.0);
        assert_eq!(b.rmssd, 45.0);
        let same = [features(64.0, 33.0); 3];
        assert_eq!(calibrate_baseline(&same).unwrap(), Baseline { hr: 64.0, rmssd: 33.0 });
        assert!(matches!(
            calibrate_baseline(&ws[..2]),
            Err(HrvError::InsufficientCalibration { got: 2, needed: 3 })
        ));
        let four = [features(60.0, 1.0), features(62.0, 2.0), features(70.0, 3.0), features(80.0, 4.0)];
        assert_eq!(calibrate_baseline(&four).unwrap().hr, 66.0);
    }

    #[test]
    fn detector_examples() {
        let base = Baseline::new(60.0, 50.0).unwrap();
        let cfg = DetectorConfig::default();
        let d = detect_mood(&features(60.0, 50.0), &base, &cfg).unwrap();
        assert_eq!(d.levels, LevelPair::new(Level::High, Level::Low));
        assert_eq!((d.point.valence(), d.point.arousal()), (0.0, 0.0));

        let d = detect_mood(&features(75.0, 50.0), &base, &cfg).unwrap();
        assert_eq!(d.point.arousal(), 1.0);
        assert_eq!(d.levels.arousal, Level::High);

        let d = detect_mood(&features(60.0, 0.0), &base, &cfg).unwrap();
        assert_eq!(d.point.valence(), -1.0);
        assert_eq!(d.levels.valence, Level::Low);
    }

    #[test]
    fn detector_threshold_edges() {
        // Thresholds chosen so the products are exact in binary floating point.
        let base = Baseline::new(64.0, 64.0).unwrap();
        let cfg = DetectorConfig { arousal_delta: 0.25, valence_delta: 0.25, arousal_scale: 0.5 };
        let at = detect_mood(&features(80.0, 48.0), &base, &cfg).unwrap();
        assert_eq!(at.levels.arousal, Level::Low, "strict at the arousal threshold");
        assert_eq!(at.levels.valence, Level::High, "inclusive at the valence threshold");
        let above = detect_mood(&features(80.0 + 1e-9, 48.0 - 1e-9), &base, &cfg).unwrap();
        assert_eq!(above.levels, LevelPair::new(Level::Low, Level::High));
        assert_eq!(above.levels.arousal, Level::High);
        assert!(above.point.arousal() > 0.25 / 0.5);
    }

    #[test]
    fn baseline_rejects_non_positive() {
        assert!(Baseline::new(0.0, 10.0).is_err());
        assert!(Baseline::new(60.0, f64::NAN).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s: Vec<RrSample<f32>> = (0..12).map(|i| RrSample::new(i * 1000 + 1000, 1000.0f32)).collect();
        let f = compute_features(&s).unwrap();
        assert_eq!(f.mean_hr, 60.0f32);
        let d = ThresholdDetector::default().detect(&f, &Baseline::new(60.0f32, 1.0).unwrap()).unwrap();
        assert_eq!(d.levels.arousal, Level::Low);
    }

    proptest! {
        #[test]
        fn detector_is_monotone(
            hr in 40.0f64..140.0, dhr in 0.0f64..30.0,
            rmssd in 0.0f64..150.0, drm in 0.0f64..50.0,
            bhr in 45.0f64..90.0, brm in 10.0f64..100.0,
        ) {
            let base = Baseline::new(bhr, brm).unwrap();
            let cfg = DetectorConfig::default();
            let lo = detect_mood(&features(hr, rmssd), &base, &cfg).unwrap();
            let hi_hr = detect_mood(&features(hr + dhr, rmssd), &base, &cfg).unwrap();
            let hi_rm = detect_mood(&features(hr, rmssd + drm), &base, &cfg).unwrap();
            prop_assert!(hi_hr.point.arousal() >= lo.point.arousal());
            prop_assert!(hi_rm.point.valence() >= lo.point.valence());
            if lo.levels.arousal == Level::High {
                prop_assert!(lo.point.arousal() > 0.05 / 0.25 - 1e-12);
                prop_assert_eq!(hi_hr.levels.arousal, Level::High);
            }
            if lo.levels.valence == Level::High {
                prop_assert_eq!(hi_rm.levels.valence, Level::High);
            }
        }

        #[test]
        fn detector_depends_only_on_ratios(
            hr in 40.0f64..140.0, rmssd in 1.0f64..150.0,
            bhr in 45.0f64..90.0, brm in 10.0f64..100.0,
            exp in -8i32..8,
        ) {
            let c = 2f64.powi(exp);
            let cfg = DetectorConfig::default();
            let a = detect_mood(&features(hr, rmssd), &Baseline::new(bhr, brm).unwrap(), &cfg).unwrap();
            let b = detect_mood(&features(hr * c, rmssd * c), &Baseline::new(bhr * c, brm * c).unwrap(), &cfg).unwrap();
            prop_assert_eq!(a.levels, b.levels);
        }
    }
}
