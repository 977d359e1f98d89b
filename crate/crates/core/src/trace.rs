//! Line-oriented session trace files.
//!
//! ```text
//! B,<timestamp_ms>,<rr_ms>                      biometric sample
//! T,<timestamp_s>,<speed_mps>                   telemetry sample
//! F,<timestamp>,<userId>,<trackId>,<kind>       feedback event
//! C,<HH:MM>,<scenario>                          context marker
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::io::BufRead;

use chrono::NaiveTime;
use thiserror::Error;

use crate::context::parse_hhmm;
use crate::hrv::RrSample;
use crate::num::Real;
use crate::recommend::FeedbackEvent;
use crate::telemetry::{DriveScenario, SpeedSample};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("read error at line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent<T: Real = f64> {
    Biometric(RrSample<T>),
    Telemetry(SpeedSample<T>),
    Feedback(FeedbackEvent),
    Context { time: NaiveTime, scenario: DriveScenario },
}

impl<T: Real> TraceEvent<T> {
    pub fn to_row(&self) -> String {
        match self {
            TraceEvent::Biometric(s) => format!("B,{},{}", s.timestamp_ms, s.rr_ms),
            TraceEvent::Telemetry(s) => format!("T,{},{}", s.timestamp, s.speed),
            TraceEvent::Feedback(f) => format!("F,{}", f.to_row()),
            TraceEvent::Context { time, scenario } => format!("C,{},{}", time.format("%H:%M"), scenario),
        }
    }
}

fn parse_real<T: Real>(raw: &str, what: &str) -> Result<T, String> {
    raw.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(T::lit)
        .ok_or_else(|| format!("invalid {what} `{raw}`"))
}

pub fn parse_event<T: Real>(line: &str) -> Result<TraceEvent<T>, String> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    let expect = |n: usize| {
        if cols.len() == n {
            Ok(())
        } else {
            Err(format!("`{}` record needs {} fields, found {}", cols[0], n - 1, cols.len() - 1))
        }
    };
    match cols[0] {
        "B" => {
            expect(3)?;
            let ts = cols[1].parse::<u64>().map_err(|_| format!("invalid timestamp `{}`", cols[1]))?;
            Ok(TraceEvent::Biometric(RrSample::new(ts, parse_real(cols[2], "RR interval")?)))
        }
        "T" => {
            expect(3)?;
            let sample = SpeedSample::new(parse_real(cols[1], "timestamp")?, parse_real(cols[2], "speed")?)
                .map_err(|e| e.to_string())?;
            Ok(TraceEvent::Telemetry(sample))
        }
        "F" => {
            expect(5)?;
            FeedbackEvent::from_fields(&cols[1..]).map(TraceEvent::Feedback).map_err(|e| e.to_string())
        }
        "C" => {
            expect(3)?;
            let time = parse_hhmm(cols[1]).map_err(|e| e.to_string())?;
            let scenario = cols[2].parse().map_err(|e: crate::telemetry::TelemetryError| e.to_string())?;
            Ok(TraceEvent::Context { time, scenario })
        }
        other => Err(format!("unknown record type `{other}`")),
    }
}

pub fn parse_trace<T: Real, R: BufRead>(source: R) -> Result<Vec<TraceEvent<T>>, TraceError> {
    let mut events = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| TraceError::Io { line: line_no, source })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let event = parse_event(trimmed).map_err(|message| TraceError::Parse { line: line_no, message })?;
        events.push(event);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommend::FeedbackKind;

    #[test]
    fn parses_all_record_kinds() {
        let src = "# drive\nC,08:15,Urban\nB,1000,812.5\nT,1.0,13.4\n\nF,5,alice,t1,Liked\n";
        let events: Vec<TraceEvent> = parse_trace(src.as_bytes()).unwrap();
        assert_eq!(events.len(), 4);
        assert!(matches!(events[0], TraceEvent::Context { scenario: DriveScenario::Urban, .. }));
        assert_eq!(events[1], TraceEvent::Biometric(RrSample::new(1000, 812.5)));
        match &events[3] {
            TraceEvent::Feedback(f) => assert_eq!(f.kind, FeedbackKind::Liked),
            other => panic!("{other:?}"),
        }
        for e in &events {
            assert_eq!(&parse_event::<f64>(&e.to_row()).unwrap(), e);
        }
    }

    #[test]
    fn errors_cite_line_numbers() {
        let src = "B,1,800\nB,2,800\nT,1,5\nT,2,5\nT,3,5\nC,08:00,Urban\nX,1,2\n";
        match parse_trace::<f64, _>(src.as_bytes()) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        for bad in ["B,1", "B,x,800", "T,1,-3", "C,25:00,Urban", "C,08:00,Rural", "F,1,u,t,Hated", "B,1,nan"] {
            assert!(parse_event::<f64>(bad).is_err(), "{bad}");
        }
    }
}
