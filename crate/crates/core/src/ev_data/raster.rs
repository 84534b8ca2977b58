//! Minute-grid rasterization and the per-user statistics computed from it.

use chrono::{Duration, NaiveDate, TimeZone, Utc};

use super::{ChargingSession, DayFilter, EvDataError, EvProfile};
use crate::MINUTES_PER_DAY;

/// Daily kW matrix for one user: one row per kept calendar day, 1,440
/// columns. Rows are stored row-major in `data`.
#[derive(Debug, Clone)]
pub struct UserRaster {
    pub user_id: String,
    pub days: Vec<NaiveDate>,
    data: Vec<f64>,
}

impl UserRaster {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn row(&self, d: usize) -> &[f64] {
        &self.data[d * MINUTES_PER_DAY..(d + 1) * MINUTES_PER_DAY]
    }

    pub fn cells(&self) -> &[f64] {
        &self.data
    }

    /// Total energy in kWh implied by the raster (each cell is one minute).
    pub fn energy_kwh(&self) -> f64 {
        self.data.iter().sum::<f64>() / 60.0
    }
}

fn minute_floor(t: chrono::DateTime<Utc>) -> i64 {
    t.timestamp().div_euclid(60)
}

fn minute_ceil(t: chrono::DateTime<Utc>) -> i64 {
    let s = t.timestamp();
    s.div_euclid(60) + i64::from(s.rem_euclid(60) != 0)
}

fn minute_to_date(m: i64) -> NaiveDate {
    Utc.timestamp_opt(m * 60, 0).unwrap().date_naive()
}

/// Places each session's average power on every minute it covers. Session
/// boundaries are rounded outward to whole minutes (start floors, end
/// ceils); overlapping sessions of the same user sum. Every calendar day
/// between the user's first and last observed minute appears, so inactive
/// days count toward later averages; days outside `day_filter` are omitted.
pub fn rasterize_user(
    sessions: &[&ChargingSession],
    day_filter: DayFilter,
) -> Result<UserRaster, EvDataError> {
    let first = sessions.first().ok_or(EvDataError::NoSessions)?;
    let user_id = first.user_id.clone();
    for s in sessions {
        if s.user_id != user_id {
            return Err(EvDataError::MixedUsers(user_id, s.user_id.clone()));
        }
    }

    let span_start = sessions.iter().map(|s| minute_floor(s.start)).min().unwrap();
    let span_end = sessions.iter().map(|s| minute_ceil(s.end)).max().unwrap();
    let first_day = minute_to_date(span_start);
    let last_day = minute_to_date(span_end - 1);

    let mut days = Vec::new();
    let mut day_index_of = std::collections::HashMap::new();
    let mut d = first_day;
    while d <= last_day {
        if day_filter.keeps(d) {
            day_index_of.insert(d, days.len());
            days.push(d);
        }
        d += Duration::days(1);
    }
    if days.is_empty() {
        return Err(EvDataError::NoSessions);
    }

    let mut data = vec![0.0; days.len() * MINUTES_PER_DAY];
    for s in sessions {
        let m0 = minute_floor(s.start);
        let m1 = minute_ceil(s.end);
        for m in m0..m1 {
            let date = minute_to_date(m);
            if let Some(&di) = day_index_of.get(&date) {
                let minute_of_day = m.rem_euclid(MINUTES_PER_DAY as i64) as usize;
                data[di * MINUTES_PER_DAY + minute_of_day] += s.avg_power_kw;
            }
        }
    }

    Ok(UserRaster {
        user_id,
        days,
        data,
    })
}

/// Column means and activity fractions of a raster: the representative
/// daily curve obtained by averaging every kept day, zeros included.
pub fn average_profile(raster: &UserRaster) -> (Vec<f64>, Vec<f64>, usize) {
    let n_days = raster.n_days();
    let mut avg = vec![0.0; MINUTES_PER_DAY];
    let mut frac = vec![0.0; MINUTES_PER_DAY];
    for d in 0..n_days {
        let row = raster.row(d);
        for (t, &p) in row.iter().enumerate() {
            avg[t] += p;
            if p > 0.0 {
                frac[t] += 1.0;
            }
        }
    }
    let inv = 1.0 / n_days as f64;
    for t in 0..MINUTES_PER_DAY {
        avg[t] *= inv;
        frac[t] *= inv;
    }
    (avg, frac, n_days)
}

/// Maximum after discarding the strictly-top decile of samples: the 90th
/// percentile of the multiset, taken as the smallest value whose empirical
/// CDF reaches 0.9 (`sorted[ceil(0.9 n) - 1]`). Being a true quantile of
/// the empirical distribution makes it invariant to sample order and to
/// duplicating the entire multiset; a single sample degenerates to the
/// plain maximum.
pub fn top_decile_max(samples: &[f64]) -> Result<f64, EvDataError> {
    if samples.is_empty() {
        return Err(EvDataError::NeverCharged);
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let keep = (0.9 * n as f64).ceil() as usize;
    Ok(sorted[keep.clamp(1, n) - 1])
}

/// Robust per-user maximum charging power: the top-decile-excluded maximum
/// over all nonzero minute samples, all days included.
pub fn max_charging_power(sessions: &[&ChargingSession]) -> Result<f64, EvDataError> {
    let raster = rasterize_user(sessions, DayFilter::All)?;
    let nonzero: Vec<f64> = raster.cells().iter().copied().filter(|&p| p > 0.0).collect();
    top_decile_max(&nonzero)
}

/// Full profile for one user: averages under `day_filter`, robust maximum
/// over all days.
pub fn build_profile(
    sessions: &[&ChargingSession],
    day_filter: DayFilter,
) -> Result<EvProfile, EvDataError> {
    let raster = rasterize_user(sessions, day_filter)?;
    let (avg_profile_kw, frac_charging, n_days) = average_profile(&raster);
    let p_max_kw = max_charging_power(sessions)?;
    Ok(EvProfile {
        user_id: raster.user_id,
        avg_profile_kw,
        frac_charging,
        p_max_kw,
        n_days,
    })
}
