//! Command implementations. Each returns the text to print on stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use drivetune_core::classify::{classify_catalog, load_lexicon, MoodLexicon};
use drivetune_core::hrv::ThresholdDetector;
use drivetune_core::recommend::MoodRecommender;
use drivetune_core::sim::{replay_trace, run_session, Engine};
use drivetune_core::trace::{parse_trace, TraceEvent};
use drivetune_core::{apply_feedback, Catalog, FeedbackEvent, FeedbackKind, Labels, MoodQuadrant, SessionReport};

use crate::config::AppConfig;
use crate::error::{AppError, AppResult};
use crate::report;
use crate::store::{parse_catalog, Store};

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn catalog_ingest(store: &Store, path: &Path) -> AppResult<String> {
    let text = fs::read_to_string(path).map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let tracks = parse_catalog(&text).map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    let catalog = Catalog::from_tracks(tracks).map_err(AppError::data)?;
    let _lock = store.lock()?;
    store.save_catalog(&catalog)?;
    Ok(format!("{} tracks ingested\n", catalog.len()))
}

pub fn load_lexicon_file(path: &Path) -> AppResult<MoodLexicon> {
    let f = fs::File::open(path).map_err(|e| AppError::data(format!("{}: {e}", path.display())))?;
    load_lexicon(BufReader::new(f)).map_err(|e| AppError::data(format!("{}: {e}", path.display())))
}

pub fn classify_labels(catalog: &Catalog, lexicon: &MoodLexicon) -> AppResult<Labels> {
    classify_catalog(catalog.iter(), lexicon).map_err(AppError::data)
}

pub fn catalog_classify(store: &Store, lexicon_path: &Path) -> AppResult<String> {
    let lexicon = load_lexicon_file(lexicon_path)?;
    let catalog = store.load_catalog()?;
    if lexicon.is_empty() {
        tracing::warn!("lexicon {} is empty; every track will be Unlabeled", lexicon_path.display());
        eprintln!("warning: lexicon is empty; every track will be Unlabeled");
    }
    let labels = classify_labels(&catalog, &lexicon)?;
    let _lock = store.lock()?;
    store.save_labels(&labels)?;

    let mut histogram: BTreeMap<MoodQuadrant, usize> = MoodQuadrant::ALL.iter().map(|q| (*q, 0)).collect();
    let mut unlabeled = 0;
    for label in labels.values() {
        match label {
            Some(l) => *histogram.entry(l.quadrant).or_default() += 1,
            None => unlabeled += 1,
        }
    }
    let mut out = format!("{} tracks classified\n", labels.len());
    for q in MoodQuadrant::ALL {
        out.push_str(&format!("{q}: {}\n", histogram[&q]));
    }
    out.push_str(&format!("Unlabeled: {unlabeled}\n"));
    Ok(out)
}

pub enum ProfileAction<'a> {
    Like(&'a str),
    Reset,
    Show,
}

pub fn profile(store: &Store, user: &str, action: ProfileAction<'_>) -> AppResult<String> {
    match action {
        ProfileAction::Show => {
            let p = store.load_profile(user)?;
            let mut out = format!("user: {}\n", p.user_id);
            let liked: Vec<&str> = p.liked.iter().map(String::as_str).collect();
            out.push_str(&format!("liked: {}\n", if liked.is_empty() { "(none)".into() } else { liked.join(", ") }));
            let skips: Vec<String> = p.skip_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("skips: {}\n", if skips.is_empty() { "(none)".into() } else { skips.join(", ") }));
            match p.baseline {
                Some(b) => out.push_str(&format!("baseline: hr={} rmssd={}\n", b.hr, b.rmssd)),
                None => out.push_str("baseline: (none)\n"),
            }
            Ok(out)
        }
        ProfileAction::Reset => {
            let _lock = store.lock()?;
            let mut p = store.load_profile(user)?;
            p.liked.clear();
            p.skip_counts.clear();
            store.save_profile(&p)?;
            Ok(format!("profile {user} reset\n"))
        }
        ProfileAction::Like(track_id) => {
            let catalog = store.load_catalog()?;
            let _lock = store.lock()?;
            let p = store.load_profile(user)?;
            let event = FeedbackEvent {
                timestamp: now_secs(),
                user_id: user.to_string(),
                track_id: track_id.to_string(),
                kind: FeedbackKind::Liked,
            };
            let updated = apply_feedback(&p, &event, &catalog).map_err(AppError::data)?;
            store.save_profile(&updated)?;
            store.append_feedback(&[event])?;
            Ok(format!("{user} likes {track_id}\n"))
        }
    }
}

/// Runs a closed-loop session from persisted catalog, labels and profile.
pub fn simulate_report(store: &Store, config: &AppConfig, seed: u64) -> AppResult<SessionReport> {
    let catalog = store.load_catalog()?;
    let labels = store.load_labels()?;
    let profile = store.load_profile(&config.sim_user)?;
    simulate_with(&catalog, &labels, &profile, config, seed)
}

pub fn simulate_with(
    catalog: &Catalog,
    labels: &Labels,
    profile: &drivetune_core::UserProfile,
    config: &AppConfig,
    seed: u64,
) -> AppResult<SessionReport> {
    let session = config.session(seed)?;
    let policy = MoodRecommender { config: config.recommender };
    let detector = ThresholdDetector { config: config.detector };
    let engine = Engine { catalog, labels, policy: &policy, detector: &detector };
    run_session(&session, profile, &engine).map_err(AppError::engine)
}

pub fn simulate(store: &Store, config: &AppConfig, seed: u64, out: &Path) -> AppResult<String> {
    let report = simulate_report(store, config, seed)?;
    write_report(&report, out)?;
    Ok(report::summary(&report))
}

pub fn write_report(report: &SessionReport, out: &Path) -> AppResult<()> {
    let text = report::render(report)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::data(format!("{}: {e}", dir.display())))?;
    }
    fs::write(out, text).map_err(|e| AppError::data(format!("{}: {e}", out.display())))
}

pub fn replay(store: &Store, config: &AppConfig, trace: &Path, user: &str, out: &Path) -> AppResult<String> {
    let f = fs::File::open(trace).map_err(|e| AppError::data(format!("{}: {e}", trace.display())))?;
    let events: Vec<TraceEvent> =
        parse_trace(BufReader::new(f)).map_err(|e| AppError::data(format!("{}: {e}", trace.display())))?;
    if events.is_empty() {
        return Err(AppError::data(format!("{}: trace has no events", trace.display())));
    }
    let events: Vec<TraceEvent> = events
        .into_iter()
        .filter(|e| match e {
            TraceEvent::Feedback(f) if f.user_id != user => {
                tracing::warn!(user = %f.user_id, "ignoring feedback for another user");
                false
            }
            _ => true,
        })
        .collect();

    let catalog = store.load_catalog()?;
    let labels = store.load_labels()?;
    let _lock = store.lock()?;
    let profile = store.load_profile(user)?;
    let policy = MoodRecommender { config: config.recommender };
    let detector = ThresholdDetector { config: config.detector };
    let engine = Engine { catalog: &catalog, labels: &labels, policy: &policy, detector: &detector };
    let report = replay_trace(&events, &profile, &engine, &config.replay()).map_err(|e| match e {
        drivetune_core::sim::SimError::Recommend(drivetune_core::recommend::RecommendError::UnknownTrack(id)) => {
            AppError::data(format!("{}: feedback for unknown track `{id}`", trace.display()))
        }
        other => AppError::engine(other),
    })?;
    store.save_profile(&report.final_profile)?;
    store.append_feedback(&report.feedback)?;
    write_report(&report, out)?;
    Ok(format!("{} cycles replayed\n{}", report.trajectory.len(), report::summary(&report)))
}
