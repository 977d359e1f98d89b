//! Plain-text session report: a `key = value` header followed by CSV sections.

use std::fmt::Write as _;

use drivetune_core::SessionReport;

use crate::error::{AppError, AppResult};

pub fn render(report: &SessionReport) -> AppResult<String> {
    let mut out = String::new();
    let w = &mut out;
    // fmt::Write into a String cannot fail
    let _ = writeln!(w, "# drivetune session report");
    let _ = writeln!(w, "final_quadrant = {}", report.final_quadrant);
    match report.steps_to_target {
        Some(s) => {
            let _ = writeln!(w, "steps_to_target = {s}");
        }
        None => {
            let _ = writeln!(w, "steps_to_target = none");
        }
    }
    let _ = writeln!(w, "aggressive_fraction = {}", report.aggressive_fraction);
    let _ = writeln!(w, "played_count = {}", report.played_tracks.len());

    let _ = writeln!(w, "\n[trajectory]");
    let _ = writeln!(w, "step,valence,arousal,fused,conflict,style,target,played");
    for r in &report.trajectory {
        let _ = writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.step,
            r.point.valence(),
            r.point.arousal(),
            r.fused.quadrant,
            r.fused.conflict,
            r.style,
            r.target,
            r.played.as_deref().unwrap_or("")
        );
    }

    let _ = writeln!(w, "\n[playlists]");
    let _ = writeln!(w, "cycle,created_at,segment_target,mode,rank,track_id,score,mood_component,pref_component");
    for (cycle, p) in report.playlists.iter().enumerate() {
        for (rank, e) in p.entries.iter().enumerate() {
            let _ = writeln!(
                w,
                "{cycle},{},{},{:?},{},{},{},{},{}",
                p.created_at,
                p.segment_target,
                p.mode,
                rank + 1,
                e.track_id,
                e.score,
                e.mood_component,
                e.pref_component
            );
        }
    }

    let _ = writeln!(w, "\n[feedback]");
    let _ = writeln!(w, "timestamp,userId,trackId,kind");
    for f in &report.feedback {
        let _ = writeln!(w, "{}", f.to_row());
    }

    let _ = writeln!(w, "\n[profile]");
    let profile = serde_json::to_string(&report.final_profile).map_err(AppError::engine)?;
    let _ = writeln!(w, "{profile}");
    Ok(out)
}

/// Human summary printed after a run.
pub fn summary(report: &SessionReport) -> String {
    format!(
        "final_quadrant: {}\nsteps_to_target: {}\naggressive_fraction: {:.4}\n",
        report.final_quadrant,
        report.steps_to_target.map_or_else(|| "none".to_string(), |s| s.to_string()),
        report.aggressive_fraction
    )
}
