//! On-disk layout under the data directory.
//!
//! ```text
//! <data_dir>/catalog.jsonl         one track object per line, sorted by id
//! <data_dir>/labels.json           track id -> label (null when unlabeled)
//! <data_dir>/profiles/<user>.json  one profile per user
//! <data_dir>/feedback.log          timestamp,userId,trackId,kind
//! <data_dir>/.lock                 held by mutating commands
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use drivetune_core::{Catalog, FeedbackEvent, Labels, Track, UserProfile};

use crate::error::{AppError, AppResult};

pub struct Store {
    root: PathBuf,
}

/// Exclusive hold on a data directory; released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn io_err(path: &Path, e: std::io::Error) -> AppError {
    AppError::data(format!("{}: {e}", path.display()))
}

/// Parses line-delimited track records; blank lines are skipped.
pub fn parse_catalog(text: &str) -> AppResult<Vec<Track>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut tracks = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let track: Track =
            serde_json::from_str(line).map_err(|e| AppError::data(format!("line {}: {e}", idx + 1)))?;
        if !seen.insert(track.id.clone()) {
            return Err(AppError::data(format!("line {}: duplicate track id `{}`", idx + 1, track.id)));
        }
        tracks.push(track);
    }
    Ok(tracks)
}

pub fn validate_user_id(user: &str) -> AppResult<()> {
    let ok = !user.is_empty()
        && !user.starts_with('.')
        && user.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(AppError::Usage(format!("invalid user id `{user}` (use letters, digits, `_`, `-`, `.`)")))
    }
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn catalog_path(&self) -> PathBuf {
        self.root.join("catalog.jsonl")
    }

    fn labels_path(&self) -> PathBuf {
        self.root.join("labels.json")
    }

    fn profile_path(&self, user: &str) -> PathBuf {
        self.root.join("profiles").join(format!("{user}.json"))
    }

    fn ensure_root(&self) -> AppResult<()> {
        fs::create_dir_all(&self.root).map_err(|e| io_err(&self.root, e))
    }

    pub fn lock(&self) -> AppResult<DirLock> {
        self.ensure_root()?;
        let path = self.root.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(AppError::engine(format!(
                "data directory {} is locked by another command (remove {} if stale)",
                self.root.display(),
                path.display()
            ))),
            Err(e) => Err(io_err(&path, e)),
        }
    }

    pub fn save_catalog(&self, catalog: &Catalog) -> AppResult<()> {
        self.ensure_root()?;
        let mut out = String::new();
        for t in catalog.iter() {
            out.push_str(&serde_json::to_string(t).map_err(AppError::engine)?);
            out.push('\n');
        }
        let path = self.catalog_path();
        fs::write(&path, out).map_err(|e| io_err(&path, e))?;
        let labels = self.labels_path();
        if labels.exists() {
            fs::remove_file(&labels).map_err(|e| io_err(&labels, e))?;
        }
        Ok(())
    }

    pub fn load_catalog(&self) -> AppResult<Catalog> {
        let path = self.catalog_path();
        let text = fs::read_to_string(&path).map_err(|_| {
            AppError::data(format!(
                "no catalog in {}; run `drivetune catalog ingest <file>` first",
                self.root.display()
            ))
        })?;
        let tracks = parse_catalog(&text).map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
        Catalog::from_tracks(tracks).map_err(AppError::data)
    }

    pub fn save_labels(&self, labels: &Labels) -> AppResult<()> {
        let mut text = serde_json::to_string_pretty(labels).map_err(AppError::engine)?;
        text.push('\n');
        let path = self.labels_path();
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }

    pub fn load_labels(&self) -> AppResult<Labels> {
        let path = self.labels_path();
        let text = fs::read_to_string(&path).map_err(|_| {
            AppError::data(format!(
                "no labels in {}; run `drivetune catalog classify --lexicon <file>` first",
                self.root.display()
            ))
        })?;
        serde_json::from_str(&text).map_err(|e| AppError::data(format!("{}: {e}", path.display())))
    }

    /// Stored profile, or a fresh one when none exists.
    pub fn load_profile(&self, user: &str) -> AppResult<UserProfile> {
        validate_user_id(user)?;
        let path = self.profile_path(user);
        if !path.exists() {
            return Ok(UserProfile::new(user));
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::data(format!("{}: {e}", path.display())))
    }

    pub fn save_profile(&self, profile: &UserProfile) -> AppResult<()> {
        validate_user_id(&profile.user_id)?;
        let path = self.profile_path(&profile.user_id);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        let mut text = serde_json::to_string_pretty(profile).map_err(AppError::engine)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    }

    pub fn append_feedback(&self, events: &[FeedbackEvent]) -> AppResult<()> {
        if events.is_empty() {
            return Ok(());
        }
        self.ensure_root()?;
        let path = self.root.join("feedback.log");
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| io_err(&path, e))?;
        for e in events {
            writeln!(f, "{}", e.to_row()).map_err(|err| io_err(&path, err))?;
        }
        Ok(())
    }

    pub fn read_feedback(&self) -> AppResult<Vec<FeedbackEvent>> {
        let path = self.root.join("feedback.log");
        let Ok(f) = File::open(&path) else {
            return Ok(Vec::new());
        };
        BufReader::new(f)
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let line = line.map_err(|e| io_err(&path, e))?;
                FeedbackEvent::from_row(&line).map_err(|e| AppError::data(format!("feedback.log line {}: {e}", i + 1)))
            })
            .collect()
    }
}
