//! Charging-session ingestion and per-user daily profile construction.
//!
//! Raw plug-in events are rasterized onto a minute-of-day grid (1,440 cells
//! per calendar day), averaged into one representative daily curve per user,
//! and reduced to robust power statistics. A seeded synthetic generator
//! stands in for non-redistributable production datasets.

mod csvio;
mod raster;
mod synth;

pub use csvio::{parse_sessions, write_sessions};
pub use raster::{
    average_profile, build_profile, max_charging_power, rasterize_user, top_decile_max,
    UserRaster,
};
pub use synth::{synth_sessions, Archetype, SynthOutput, SynthSpec};

use chrono::{DateTime, Utc};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::MINUTES_PER_DAY;

/// One plug-in event of one EV user. Power is the session average; the
/// raster holds it constant over the session.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargingSession {
    pub user_id: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub avg_power_kw: f64,
}

/// Longest plausible single session; longer rows are treated as corrupt.
pub const MAX_SESSION_DAYS: i64 = 7;

impl ChargingSession {
    /// Checks the row-level invariants; `Err` carries the reason.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.end > self.start) {
            return Err("end must be after start".into());
        }
        if !self.avg_power_kw.is_finite() || self.avg_power_kw < 0.0 {
            return Err("avg_power_kw must be a finite non-negative number".into());
        }
        if self.end - self.start > chrono::Duration::days(MAX_SESSION_DAYS) {
            return Err(format!("session longer than {MAX_SESSION_DAYS} days"));
        }
        Ok(())
    }

    pub fn duration_hours(&self) -> f64 {
        (self.end - self.start).num_seconds() as f64 / 3600.0
    }

    pub fn energy_kwh(&self) -> f64 {
        self.avg_power_kw * self.duration_hours()
    }
}

/// A user's average daily charging curve plus derived statistics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvProfile {
    pub user_id: String,
    /// Mean charging power per minute of day, zeros included in the mean.
    pub avg_profile_kw: Vec<f64>,
    /// Fraction of observed days with charging activity at each minute.
    pub frac_charging: Vec<f64>,
    /// 90th-percentile-of-nonzero-samples maximum charging power.
    pub p_max_kw: f64,
    /// Number of calendar days the averages run over.
    pub n_days: usize,
}

impl EvProfile {
    pub fn validate(&self) -> Result<(), String> {
        if self.avg_profile_kw.len() != MINUTES_PER_DAY
            || self.frac_charging.len() != MINUTES_PER_DAY
        {
            return Err("profile arrays must have 1,440 entries".into());
        }
        if self.n_days == 0 {
            return Err("n_days must be positive".into());
        }
        if self.frac_charging.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err("frac_charging out of [0,1]".into());
        }
        if self.avg_profile_kw.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err("avg_profile_kw must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Which calendar days a raster keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayFilter {
    All,
    Weekdays,
    Weekends,
}

impl DayFilter {
    pub fn keeps(self, date: chrono::NaiveDate) -> bool {
        use chrono::Datelike;
        let wd = date.weekday().number_from_monday();
        match self {
            DayFilter::All => true,
            DayFilter::Weekdays => wd <= 5,
            DayFilter::Weekends => wd > 5,
        }
    }
}

/// Headline counts for a parsed session file.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionDatasetSummary {
    pub n_users: usize,
    pub n_sessions: usize,
    pub date_range: Option<(DateTime<Utc>, DateTime<Utc>)>,
    pub total_energy_kwh: f64,
    /// Rows rejected for violating session invariants.
    pub n_rejected: usize,
    /// Valid rows dropped because avg_power_kw was exactly zero.
    pub n_zero_power_dropped: usize,
}

#[derive(Debug, Error)]
pub enum EvDataError {
    #[error("cannot read sessions file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed header: expected `user_id,start,end,avg_power_kw`, got `{0}`")]
    MalformedHeader(String),
    #[error("invalid row at line {line}: {reason}")]
    InvalidRow { line: usize, reason: String },
    #[error("user has no sessions")]
    NoSessions,
    #[error("sessions span multiple users: {0} and {1}")]
    MixedUsers(String, String),
    #[error("user never charged (no nonzero power samples)")]
    NeverCharged,
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),
}

/// Groups sessions by user and builds the full profile set for one day
/// filter. Users whose raster is empty under the filter are skipped.
pub fn build_profiles(
    sessions: &[ChargingSession],
    day_filter: DayFilter,
) -> Result<BTreeMap<String, EvProfile>, EvDataError> {
    let mut by_user: BTreeMap<&str, Vec<&ChargingSession>> = BTreeMap::new();
    for s in sessions {
        by_user.entry(&s.user_id).or_default().push(s);
    }
    let mut out = BTreeMap::new();
    for (user, group) in by_user {
        match build_profile(&group, day_filter) {
            Ok(profile) => {
                out.insert(user.to_string(), profile);
            }
            // A user whose observed days all fall outside the filter, or who
            // never charged, contributes nothing to the feature set.
            Err(EvDataError::NoSessions) | Err(EvDataError::NeverCharged) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
