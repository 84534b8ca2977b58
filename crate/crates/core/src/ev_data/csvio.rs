//! Sessions CSV format: `user_id,start,end,avg_power_kw`, ISO-8601 UTC
//! timestamps at second resolution, LF line endings.

use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{ChargingSession, EvDataError, SessionDatasetSummary};

const HEADER: [&str; 4] = ["user_id", "start", "end", "avg_power_kw"];

/// Parses a sessions CSV. Invalid rows abort in strict mode; otherwise they
/// are counted in the summary and skipped. Output is sorted by
/// `(user_id, start)`. Rows with zero power are valid but dropped.
pub fn parse_sessions(
    path: &Path,
    strict: bool,
) -> Result<(Vec<ChargingSession>, SessionDatasetSummary), EvDataError> {
    let file = std::fs::File::open(path).map_err(|source| EvDataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| EvDataError::MalformedHeader(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(EvDataError::MalformedHeader(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }

    let mut sessions = Vec::new();
    let mut n_rejected = 0usize;
    let mut n_zero = 0usize;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let parsed = record
            .map_err(|e| e.to_string())
            .and_then(|rec| parse_record(&rec));
        match parsed {
            Ok(session) => match session.validate() {
                Ok(()) if session.avg_power_kw == 0.0 => n_zero += 1,
                Ok(()) => sessions.push(session),
                Err(reason) => {
                    if strict {
                        return Err(EvDataError::InvalidRow { line, reason });
                    }
                    n_rejected += 1;
                }
            },
            Err(reason) => {
                if strict {
                    return Err(EvDataError::InvalidRow { line, reason });
                }
                n_rejected += 1;
            }
        }
    }

    sessions.sort_by(|a, b| (a.user_id.as_str(), a.start).cmp(&(b.user_id.as_str(), b.start)));

    let summary = summarize(&sessions, n_rejected, n_zero);
    Ok((sessions, summary))
}

fn parse_record(rec: &csv::StringRecord) -> Result<ChargingSession, String> {
    if rec.len() != 4 {
        return Err(format!("expected 4 fields, got {}", rec.len()));
    }
    let user_id = rec[0].to_string();
    if user_id.is_empty() {
        return Err("empty user_id".into());
    }
    let start = parse_ts(&rec[1])?;
    let end = parse_ts(&rec[2])?;
    let avg_power_kw: f64 = rec[3]
        .parse()
        .map_err(|e| format!("bad avg_power_kw `{}`: {e}", &rec[3]))?;
    Ok(ChargingSession {
        user_id,
        start,
        end,
        avg_power_kw,
    })
}

fn parse_ts(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("bad timestamp `{s}`: {e}"))
}

fn summarize(
    sessions: &[ChargingSession],
    n_rejected: usize,
    n_zero_power_dropped: usize,
) -> SessionDatasetSummary {
    let n_users = {
        let mut users: Vec<&str> = sessions.iter().map(|s| s.user_id.as_str()).collect();
        users.dedup();
        users.len()
    };
    let date_range = if sessions.is_empty() {
        None
    } else {
        let first = sessions.iter().map(|s| s.start).min().unwrap();
        let last = sessions.iter().map(|s| s.end).max().unwrap();
        Some((first, last))
    };
    SessionDatasetSummary {
        n_users,
        n_sessions: sessions.len(),
        date_range,
        total_energy_kwh: sessions.iter().map(|s| s.energy_kwh()).sum(),
        n_rejected,
        n_zero_power_dropped,
    }
}

/// Writes sessions in the same format `parse_sessions` reads; parsing the
/// output reproduces the input list exactly.
pub fn write_sessions(path: &Path, sessions: &[ChargingSession]) -> Result<(), EvDataError> {
    let mut out = String::with_capacity(64 * (sessions.len() + 1));
    out.push_str("user_id,start,end,avg_power_kw\n");
    for s in sessions {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.user_id,
            s.start.to_rfc3339_opts(SecondsFormat::Secs, true),
            s.end.to_rfc3339_opts(SecondsFormat::Secs, true),
            s.avg_power_kw
        ));
    }
    std::fs::write(path, out).map_err(|source| EvDataError::Io {
        path: path.display().to_string(),
        source,
    })
}
