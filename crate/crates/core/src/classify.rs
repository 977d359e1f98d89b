//! Tag-vote mood classification of tracks against a folksonomy lexicon.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{normalize_tag, Labels, ModelError, MoodLabel, Track};
use crate::mood::MoodQuadrant;
use crate::num::Real;

/// Argmax tie-break order, most preferred first.
pub const TIE_BREAK_ORDER: [MoodQuadrant; 4] = [
    MoodQuadrant::Tender,
    MoodQuadrant::Happy,
    MoodQuadrant::Sad,
    MoodQuadrant::Angry,
];

const SEED_LEXICON: &str = include_str!("../data/seed_lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: empty tag")]
    EmptyTag { line: usize },
    #[error("line {line}: unknown quadrant `{name}`")]
    UnknownQuadrant { line: usize, name: String },
    #[error("line {line}: invalid weight `{raw}` (must be a positive number)")]
    InvalidWeight { line: usize, raw: String },
    #[error("line {line}: duplicate tag `{tag}`")]
    DuplicateTag { line: usize, tag: String },
    #[error("tag `{0}`: weight must be positive and finite")]
    NonPositiveWeight(String),
    #[error("read error at line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LexiconEntry<T: Real = f64> {
    pub quadrant: MoodQuadrant,
    pub weight: T,
}

/// Mapping from normalized tag to mood cluster and vote weight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoodLexicon<T: Real = f64> {
    entries: BTreeMap<String, LexiconEntry<T>>,
}

impl<T: Real> MoodLexicon<T> {
    pub fn new() -> Self {
        MoodLexicon { entries: BTreeMap::new() }
    }

    /// The bundled placeholder lexicon.
    pub fn seed() -> Self {
        load_lexicon(SEED_LEXICON.as_bytes()).expect("bundled seed lexicon parses")
    }

    pub fn insert(&mut self, tag: &str, quadrant: MoodQuadrant, weight: T) -> Result<(), LexiconError> {
        let key = normalize_tag(tag);
        if key.is_empty() {
            return Err(LexiconError::EmptyTag { line: 0 });
        }
        if !(weight.is_finite() && weight > T::zero()) {
            return Err(LexiconError::NonPositiveWeight(key));
        }
        if self.entries.contains_key(&key) {
            return Err(LexiconError::DuplicateTag { line: 0, tag: key });
        }
        self.entries.insert(key, LexiconEntry { quadrant, weight });
        Ok(())
    }

    pub fn get(&self, tag: &str) -> Option<&LexiconEntry<T>> {
        self.entries.get(tag)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LexiconEntry<T>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Copy with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: T) -> Self {
        MoodLexicon {
            entries: self
                .entries
                .iter()
                .map(|(k, e)| (k.clone(), LexiconEntry { quadrant: e.quadrant, weight: e.weight * factor }))
                .collect(),
        }
    }
}

/// Parses the `tag<TAB>quadrant<TAB>weight` format. Blank lines and lines
/// starting with `#` are skipped.
pub fn load_lexicon<T: Real, R: BufRead>(source: R) -> Result<MoodLexicon<T>, LexiconError> {
    let mut lexicon = MoodLexicon::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| LexiconError::Io { line: line_no, source })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() != 3 {
            return Err(LexiconError::ColumnCount { line: line_no, found: cols.len() });
        }
        let tag = normalize_tag(cols[0]);
        if tag.is_empty() {
            return Err(LexiconError::EmptyTag { line: line_no });
        }
        let quadrant: MoodQuadrant = cols[1].trim().parse().map_err(|_| LexiconError::UnknownQuadrant {
            line: line_no,
            name: cols[1].to_string(),
        })?;
        let invalid = || LexiconError::InvalidWeight { line: line_no, raw: cols[2].to_string() };
        let weight: f64 = cols[2].trim().parse().map_err(|_| invalid())?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(invalid());
        }
        if lexicon.entries.contains_key(&tag) {
            return Err(LexiconError::DuplicateTag { line: line_no, tag });
        }
        lexicon.entries.insert(tag, LexiconEntry { quadrant, weight: T::lit(weight) });
    }
    Ok(lexicon)
}

/// Normalized vote per quadrant; all zero when no tag matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterScores<T: Real = f64> {
    scores: [T; 4],
}

impl<T: Real> ClusterScores<T> {
    pub fn get(&self, q: MoodQuadrant) -> T {
        self.scores[q.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.scores.iter().all(|s| *s == T::zero())
    }

    pub fn total(&self) -> T {
        self.scores.iter().copied().sum()
    }
}

/// Per-quadrant sum of `count × weight` over matching tags, before normalization.
pub fn raw_scores<T: Real>(track: &Track, lexicon: &MoodLexicon<T>) -> [T; 4] {
    let mut raw = [T::zero(); 4];
    for (tag, &count) in &track.tags {
        if let Some(entry) = lexicon.get(tag) {
            raw[entry.quadrant.index()] = raw[entry.quadrant.index()] + T::lit(f64::from(count)) * entry.weight;
        }
    }
    raw
}

pub fn cluster_scores<T: Real>(track: &Track, lexicon: &MoodLexicon<T>) -> ClusterScores<T> {
    let raw = raw_scores(track, lexicon);
    let total: T = raw.iter().copied().sum();
    if total <= T::zero() {
        return ClusterScores { scores: [T::zero(); 4] };
    }
    ClusterScores { scores: raw.map(|r| r / total) }
}

/// Winning quadrant and its normalized score, or `None` with no evidence.
pub fn label_from_scores<T: Real>(scores: &ClusterScores<T>) -> Option<MoodLabel<T>> {
    if scores.is_empty() {
        return None;
    }
    let mut best = TIE_BREAK_ORDER[0];
    for &q in &TIE_BREAK_ORDER[1..] {
        if scores.get(q) > scores.get(best) {
            best = q;
        }
    }
    Some(MoodLabel { quadrant: best, confidence: scores.get(best) })
}

pub fn classify_track<T: Real>(track: &Track, lexicon: &MoodLexicon<T>) -> Option<MoodLabel<T>> {
    label_from_scores(&cluster_scores(track, lexicon))
}

/// Labels every track; duplicate ids are rejected.
pub fn classify_catalog<'a, T: Real>(
    tracks: impl IntoIterator<Item = &'a Track>,
    lexicon: &MoodLexicon<T>,
) -> Result<Labels<T>, ModelError> {
    let mut labels = Labels::new();
    for track in tracks {
        if labels.contains_key(&track.id) {
            return Err(ModelError::DuplicateTrack(track.id.clone()));
        }
        labels.insert(track.id.clone(), classify_track(track, lexicon));
    }
    Ok(labels)
}
