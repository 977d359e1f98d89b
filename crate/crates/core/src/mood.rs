//! Circumplex mood plane: continuous valence/arousal points and the four
//! quadrants they fall into.
//!
//! Quadrant table (valence level, arousal level):
//!
//! | quadrant | valence | arousal |
//! |----------|---------|---------|
//! | Happy    | High    | High    |
//! | Tender   | High    | Low     |
//! | Sad      | Low     | Low     |
//! | Angry    | Low     | High    |
//!
//! A component counts as `High` when it is `>= 0`, so the origin is Happy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

/// Default magnitude of each centroid coordinate.
pub const CENTROID_MAGNITUDE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoodError {
    #[error("non-finite {axis} component")]
    NonFinite { axis: &'static str },
    #[error("unknown mood quadrant `{0}` (expected Happy, Tender, Sad or Angry)")]
    UnknownQuadrant(String),
}

/// A point in the valence/arousal plane, both components within `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint<T>", into = "RawPoint<T>", bound = "")]
pub struct ValenceArousal<T: Real = f64> {
    valence: T,
    arousal: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct RawPoint<T: Real> {
    valence: T,
    arousal: T,
}

impl<T: Real> TryFrom<RawPoint<T>> for ValenceArousal<T> {
    type Error = MoodError;

    fn try_from(raw: RawPoint<T>) -> Result<Self, Self::Error> {
        Self::new(raw.valence, raw.arousal)
    }
}

impl<T: Real> From<ValenceArousal<T>> for RawPoint<T> {
    fn from(p: ValenceArousal<T>) -> Self {
        RawPoint {
            valence: p.valence,
            arousal: p.arousal,
        }
    }
}

impl<T: Real> ValenceArousal<T> {
    /// Builds a point, clamping finite out-of-range components into `[-1, 1]`.
    pub fn new(valence: T, arousal: T) -> Result<Self, MoodError> {
        if !valence.is_finite() {
            return Err(MoodError::NonFinite { axis: "valence" });
        }
        if !arousal.is_finite() {
            return Err(MoodError::NonFinite { axis: "arousal" });
        }
        let one = T::one();
        let clamped = Self {
            valence: valence.clamp_to(-one, one),
            arousal: arousal.clamp_to(-one, one),
        };
        if clamped.valence != valence || clamped.arousal != arousal {
            tracing::debug!(%valence, %arousal, "mood point clamped into [-1, 1]");
        }
        Ok(clamped)
    }

    pub fn origin() -> Self {
        Self {
            valence: T::zero(),
            arousal: T::zero(),
        }
    }

    pub fn valence(&self) -> T {
        self.valence
    }

    pub fn arousal(&self) -> T {
        self.arousal
    }

    pub fn quadrant(&self) -> MoodQuadrant {
        quadrant_of(self)
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.valence - other.valence).hypot(self.arousal - other.arousal)
    }
}

impl<T: Real> Default for ValenceArousal<T> {
    fn default() -> Self {
        Self::origin()
    }
}

/// The four circumplex subplanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoodQuadrant {
    Happy,
    Tender,
    Sad,
    Angry,
}

impl MoodQuadrant {
    pub const ALL: [MoodQuadrant; 4] = [
        MoodQuadrant::Happy,
        MoodQuadrant::Tender,
        MoodQuadrant::Sad,
        MoodQuadrant::Angry,
    ];

    /// Stable dense index, matching the order of [`MoodQuadrant::ALL`].
    pub fn index(self) -> usize {
        match self {
            MoodQuadrant::Happy => 0,
            MoodQuadrant::Tender => 1,
            MoodQuadrant::Sad => 2,
            MoodQuadrant::Angry => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MoodQuadrant::Happy => "Happy",
            MoodQuadrant::Tender => "Tender",
            MoodQuadrant::Sad => "Sad",
            MoodQuadrant::Angry => "Angry",
        }
    }

    pub fn levels(self) -> LevelPair {
        quadrant_to_levels(self)
    }

    /// Canonical mid-quadrant point at `(±0.5, ±0.5)`.
    pub fn centroid<T: Real>(self) -> ValenceArousal<T> {
        centroid_of(self)
    }

    /// Mid-quadrant point at `(±magnitude, ±magnitude)`; `magnitude` must lie in `(0, 1]`.
    pub fn centroid_scaled<T: Real>(self, magnitude: T) -> ValenceArousal<T> {
        let levels = self.levels();
        let sign = |l: Level| if l == Level::High { magnitude } else { -magnitude };
        ValenceArousal {
            valence: sign(levels.valence),
            arousal: sign(levels.arousal),
        }
    }
}

impl fmt::Display for MoodQuadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MoodQuadrant {
    type Err = MoodError;

    /// Case-sensitive: exactly `Happy`, `Tender`, `Sad` or `Angry`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Happy" => Ok(MoodQuadrant::Happy),
            "Tender" => Ok(MoodQuadrant::Tender),
            "Sad" => Ok(MoodQuadrant::Sad),
            "Angry" => Ok(MoodQuadrant::Angry),
            other => Err(MoodError::UnknownQuadrant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Low,
    High,
}

impl Level {
    pub fn flipped(self) -> Level {
        match self {
            Level::Low => Level::High,
            Level::High => Level::Low,
        }
    }

    fn of<T: Real>(x: T) -> Level {
        if x >= T::zero() {
            Level::High
        } else {
            Level::Low
        }
    }
}

/// Binary valence and arousal levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelPair {
    pub valence: Level,
    pub arousal: Level,
}

impl LevelPair {
    pub fn new(valence: Level, arousal: Level) -> Self {
        Self { valence, arousal }
    }

    pub fn quadrant(self) -> MoodQuadrant {
        levels_to_quadrant(self)
    }

    pub const ALL: [LevelPair; 4] = [
        LevelPair { valence: Level::High, arousal: Level::High },
        LevelPair { valence: Level::High, arousal: Level::Low },
        LevelPair { valence: Level::Low, arousal: Level::Low },
        LevelPair { valence: Level::Low, arousal: Level::High },
    ];
}

pub fn quadrant_of<T: Real>(point: &ValenceArousal<T>) -> MoodQuadrant {
    levels_to_quadrant(LevelPair {
        valence: Level::of(point.valence),
        arousal: Level::of(point.arousal),
    })
}

pub fn centroid_of<T: Real>(quadrant: MoodQuadrant) -> ValenceArousal<T> {
    quadrant.centroid_scaled(T::lit(CENTROID_MAGNITUDE))
}

pub fn levels_to_quadrant(levels: LevelPair) -> MoodQuadrant {
    match (levels.valence, levels.arousal) {
        (Level::High, Level::High) => MoodQuadrant::Happy,
        (Level::High, Level::Low) => MoodQuadrant::Tender,
        (Level::Low, Level::Low) => MoodQuadrant::Sad,
        (Level::Low, Level::High) => MoodQuadrant::Angry,
    }
}

pub fn quadrant_to_levels(quadrant: MoodQuadrant) -> LevelPair {
    match quadrant {
        MoodQuadrant::Happy => LevelPair::new(Level::High, Level::High),
        MoodQuadrant::Tender => LevelPair::new(Level::High, Level::Low),
        MoodQuadrant::Sad => LevelPair::new(Level::Low, Level::Low),
        MoodQuadrant::Angry => LevelPair::new(Level::Low, Level::High),
    }
}
