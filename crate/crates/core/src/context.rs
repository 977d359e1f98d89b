//! Time-of-day target moods and gradual quadrant-by-quadrant shift plans.

use std::fmt;

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mood::{levels_to_quadrant, Level, MoodQuadrant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("day window start and end must differ")]
    EmptyWindow,
    #[error("invalid time `{0}` (expected HH:MM)")]
    InvalidTime(String),
}

pub fn parse_hhmm(s: &str) -> Result<NaiveTime, ContextError> {
    NaiveTime::parse_from_str(s.trim(), "%H:%M").map_err(|_| ContextError::InvalidTime(s.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DayPhase {
    Day,
    Night,
}

impl fmt::Display for DayPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DayPhase::Day => "Day",
            DayPhase::Night => "Night",
        })
    }
}

/// Half-open `[start, end)` daytime interval. A window with `start > end`
/// wraps past midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayWindow {
    start: NaiveTime,
    end: NaiveTime,
}

impl DayWindow {
    pub fn new(start: NaiveTime, end: NaiveTime) -> Result<Self, ContextError> {
        if start == end {
            return Err(ContextError::EmptyWindow);
        }
        Ok(DayWindow { start, end })
    }

    pub fn start(&self) -> NaiveTime {
        self.start
    }

    pub fn end(&self) -> NaiveTime {
        self.end
    }

    pub fn contains(&self, t: NaiveTime) -> bool {
        if self.start < self.end {
            self.start <= t && t < self.end
        } else {
            t >= self.start || t < self.end
        }
    }
}

impl Default for DayWindow {
    /// 07:00 to 20:00.
    fn default() -> Self {
        DayWindow {
            start: NaiveTime::from_hms_opt(7, 0, 0).expect("valid time"),
            end: NaiveTime::from_hms_opt(20, 0, 0).expect("valid time"),
        }
    }
}

pub fn day_phase(local_time: NaiveTime, window: &DayWindow) -> DayPhase {
    if window.contains(local_time) {
        DayPhase::Day
    } else {
        DayPhase::Night
    }
}

/// Calm Tender music by day; alerting Happy music at night.
pub fn target_mood(phase: DayPhase) -> MoodQuadrant {
    match phase {
        DayPhase::Day => MoodQuadrant::Tender,
        DayPhase::Night => MoodQuadrant::Happy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionMode {
    Regulation,
    Maintenance,
}

pub fn action_mode(current: MoodQuadrant, target: MoodQuadrant) -> ActionMode {
    if current == target {
        ActionMode::Maintenance
    } else {
        ActionMode::Regulation
    }
}

/// Quadrant path from the current mood to the target, one axis per step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPlan {
    steps: Vec<MoodQuadrant>,
}

impl ShiftPlan {
    pub fn steps(&self) -> &[MoodQuadrant] {
        &self.steps
    }

    pub fn current(&self) -> MoodQuadrant {
        self.steps[0]
    }

    pub fn target(&self) -> MoodQuadrant {
        *self.steps.last().expect("plan is never empty")
    }

    /// Quadrant the next playlist should aim at.
    pub fn next_step(&self) -> MoodQuadrant {
        self.steps.get(1).copied().unwrap_or(self.steps[0])
    }

    pub fn mode(&self) -> ActionMode {
        action_mode(self.current(), self.target())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Diagonal moves go through one intermediate quadrant: arousal flips first
/// when the driver is currently aroused, valence first otherwise.
pub fn plan_shift(current: MoodQuadrant, target: MoodQuadrant) -> ShiftPlan {
    let from = current.levels();
    let to = target.levels();
    let mut steps = vec![current];
    let dv = from.valence != to.valence;
    let da = from.arousal != to.arousal;
    if dv && da {
        let mut mid = from;
        if from.arousal == Level::High {
            mid.arousal = mid.arousal.flipped();
        } else {
            mid.valence = mid.valence.flipped();
        }
        steps.push(levels_to_quadrant(mid));
    }
    if dv || da {
        steps.push(target);
    }
    ShiftPlan { steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MoodQuadrant::*;

    fn t(s: &str) -> NaiveTime {
        parse_hhmm(s).unwrap()
    }

    #[test]
    fn day_phase_examples() {
        let w = DayWindow::default();
        assert_eq!(day_phase(t("12:00"), &w), DayPhase::Day);
        assert_eq!(day_phase(t("23:30"), &w), DayPhase::Night);
        assert_eq!(day_phase(t("20:00"), &w), DayPhase::Night);
        assert_eq!(day_phase(t("07:00"), &w), DayPhase::Day);
        assert_eq!(day_phase(t("06:59"), &w), DayPhase::Night);
    }

    #[test]
    fn wrapping_window() {
        let w = DayWindow::new(t("22:00"), t("06:00")).unwrap();
        assert_eq!(day_phase(t("23:00"), &w), DayPhase::Day);
        assert_eq!(day_phase(t("05:59"), &w), DayPhase::Day);
        assert_eq!(day_phase(t("06:00"), &w), DayPhase::Night);
        assert!(DayWindow::new(t("08:00"), t("08:00")).is_err());
    }

    #[test]
    fn day_phase_total_over_clock() {
        let w = DayWindow::default();
        let days = (0..24 * 60)
            .map(|m| NaiveTime::from_hms_opt(m / 60, m % 60, 0).unwrap())
            .filter(|&x| day_phase(x, &w) == DayPhase::Day)
            .count();
        assert_eq!(days, 13 * 60);
    }

    #[test]
    fn targets() {
        assert_eq!(target_mood(DayPhase::Day), Tender);
        assert_eq!(target_mood(DayPhase::Night), Happy);
        for p in [DayPhase::Day, DayPhase::Night] {
            assert_eq!(target_mood(p).levels().valence, Level::High);
        }
    }

    #[test]
    fn modes() {
        assert_eq!(action_mode(Tender, Tender), ActionMode::Maintenance);
        assert_eq!(action_mode(Angry, Tender), ActionMode::Regulation);
        assert_eq!(action_mode(Sad, Happy), ActionMode::Regulation);
    }

    #[test]
    fn plan_examples() {
        assert_eq!(plan_shift(Tender, Tender).steps(), [Tender]);
        assert_eq!(plan_shift(Angry, Tender).steps(), [Angry, Sad, Tender]);
        assert_eq!(plan_shift(Sad, Happy).steps(), [Sad, Tender, Happy]);
        assert_eq!(plan_shift(Happy, Sad).steps(), [Happy, Tender, Sad]);
        assert_eq!(plan_shift(Tender, Angry).steps(), [Tender, Sad, Angry]);
        assert_eq!(plan_shift(Angry, Happy).steps(), [Angry, Happy]);
        assert_eq!(plan_shift(Angry, Sad).next_step(), Sad);
        assert_eq!(plan_shift(Tender, Tender).next_step(), Tender);
        assert_eq!(plan_shift(Tender, Tender).mode(), ActionMode::Maintenance);
    }

    #[test]
    fn parse_times() {
        assert!(parse_hhmm("7:5x").is_err());
        assert_eq!(parse_hhmm("07:30").unwrap(), NaiveTime::from_hms_opt(7, 30, 0).unwrap());
    }
}
