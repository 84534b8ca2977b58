//! Seeded synthetic session generator. Substitutes for charge-point logs
//! that cannot be redistributed; archetypes plant known behaviour groups
//! that clustering should recover.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, TimeZone, Utc};

use super::{ChargingSession, EvDataError};
use crate::rng::KeyedRng;

/// One behaviour template. Start time and duration are normal draws
/// (std 0 gives degenerate, fixed values); power is a fixed level.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Archetype {
    pub name: String,
    /// Mean plug-in minute of day (0..1440).
    pub start_minute_mean: f64,
    pub start_minute_std: f64,
    pub duration_mean_min: f64,
    pub duration_std_min: f64,
    pub power_kw: f64,
    /// Probability the user charges on any given day.
    pub charge_prob: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub n_users: usize,
    pub days: u32,
    pub start_date: NaiveDate,
    /// `(archetype, weight)` pairs; weights must sum to 1.
    pub mix: Vec<(Archetype, f64)>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub sessions: Vec<ChargingSession>,
    /// Which archetype each user was drawn from, keyed by user id.
    pub archetype_of: BTreeMap<String, String>,
}

const MIN_DURATION_MIN: i64 = 15;
const MAX_DURATION_MIN: i64 = 16 * 60;

/// Generates sessions for `n_users` over `days` days. Each user is drawn
/// from exactly one archetype; every draw is keyed on (seed, user index),
/// so output is byte-stable for a fixed spec.
pub fn synth_sessions(spec: &SynthSpec) -> Result<SynthOutput, EvDataError> {
    validate(spec)?;
    let weights: Vec<f64> = spec.mix.iter().map(|(_, w)| *w).collect();
    let width = (spec.n_users.max(2) as f64).log10().ceil() as usize;

    let mut sessions = Vec::new();
    let mut archetype_of = BTreeMap::new();
    for u in 0..spec.n_users {
        let user_id = format!("ev{u:0width$}");
        let mut rng = KeyedRng::from_parts(spec.seed, &[crate::rng::fnv1a64(b"synth"), u as u64]);
        let arch = &spec.mix[rng.next_categorical(&weights)].0;
        archetype_of.insert(user_id.clone(), arch.name.clone());

        for d in 0..spec.days {
            if rng.next_f64() >= arch.charge_prob {
                continue;
            }
            let start_minute = rng
                .next_normal(arch.start_minute_mean, arch.start_minute_std)
                .round()
                .clamp(0.0, 1439.0) as i64;
            let duration = rng
                .next_normal(arch.duration_mean_min, arch.duration_std_min)
                .round()
                .clamp(MIN_DURATION_MIN as f64, MAX_DURATION_MIN as f64)
                as i64;
            let day = spec.start_date + Duration::days(i64::from(d));
            let start = Utc
                .from_utc_datetime(&day.and_hms_opt(0, 0, 0).unwrap())
                + Duration::minutes(start_minute);
            sessions.push(ChargingSession {
                user_id: user_id.clone(),
                start,
                end: start + Duration::minutes(duration),
                avg_power_kw: arch.power_kw,
            });
        }
    }

    debug_assert!(sessions.iter().all(|s| s.validate().is_ok()));
    Ok(SynthOutput {
        sessions,
        archetype_of,
    })
}

fn validate(spec: &SynthSpec) -> Result<(), EvDataError> {
    if spec.n_users == 0 {
        return Err(EvDataError::InvalidSynthSpec("n_users must be >= 1".into()));
    }
    if spec.days == 0 {
        return Err(EvDataError::InvalidSynthSpec("days must be >= 1".into()));
    }
    if spec.mix.is_empty() {
        return Err(EvDataError::InvalidSynthSpec("mix must be non-empty".into()));
    }
    let total: f64 = spec.mix.iter().map(|(_, w)| *w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(EvDataError::InvalidSynthSpec(format!(
            "mix weights sum to {total}, expected 1"
        )));
    }
    for (a, w) in &spec.mix {
        if *w < 0.0 {
            return Err(EvDataError::InvalidSynthSpec(format!(
                "archetype {} has negative weight",
                a.name
            )));
        }
        if !(0.0..=1.0).contains(&a.charge_prob) {
            return Err(EvDataError::InvalidSynthSpec(format!(
                "archetype {} charge_prob out of [0,1]",
                a.name
            )));
        }
        if a.power_kw <= 0.0 || !a.power_kw.is_finite() {
            return Err(EvDataError::InvalidSynthSpec(format!(
                "archetype {} power_kw must be positive",
                a.name
            )));
        }
        if a.start_minute_std < 0.0 || a.duration_std_min < 0.0 {
            return Err(EvDataError::InvalidSynthSpec(format!(
                "archetype {} has negative std",
                a.name
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn night_archetype(charge_prob: f64) -> Archetype {
        Archetype {
            name: "night".into(),
            start_minute_mean: 0.0,
            start_minute_std: 0.0,
            duration_mean_min: 240.0,
            duration_std_min: 0.0,
            power_kw: 7.0,
            charge_prob,
        }
    }

    fn day_archetype(charge_prob: f64) -> Archetype {
        Archetype {
            name: "day".into(),
            start_minute_mean: 660.0,
            start_minute_std: 90.0,
            duration_mean_min: 150.0,
            duration_std_min: 40.0,
            power_kw: 11.0,
            charge_prob,
        }
    }

    #[test]
    fn degenerate_distributions_give_identical_sessions() {
        let spec = SynthSpec {
            n_users: 1,
            days: 10,
            start_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            mix: vec![(night_archetype(1.0), 1.0)],
            seed: 5,
        };
        let out = synth_sessions(&spec).unwrap();
        assert_eq!(out.sessions.len(), 10);
        for s in &out.sessions {
            assert_eq!(s.avg_power_kw, 7.0);
            assert_eq!(s.start.time(), chrono::NaiveTime::from_hms_opt(0, 0, 0).unwrap());
            assert_eq!(s.end - s.start, Duration::minutes(240));
        }
    }

    #[test]
    fn same_seed_twice_is_identical() {
        let spec = SynthSpec {
            n_users: 20,
            days: 30,
            start_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            mix: vec![(night_archetype(0.5), 0.6), (day_archetype(0.4), 0.4)],
            seed: 99,
        };
        let a = synth_sessions(&spec).unwrap();
        let b = synth_sessions(&spec).unwrap();
        assert_eq!(a.sessions, b.sessions);
        assert_eq!(a.archetype_of, b.archetype_of);
    }

    #[test]
    fn archetype_counts_within_binomial_99_interval() {
        let spec = SynthSpec {
            n_users: 100,
            days: 1,
            start_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            mix: vec![(night_archetype(1.0), 0.5), (day_archetype(1.0), 0.5)],
            seed: 123,
        };
        let out = synth_sessions(&spec).unwrap();
        let night = out
            .archetype_of
            .values()
            .filter(|name| name.as_str() == "night")
            .count() as f64;
        // Binomial(100, 0.5): 99% interval is 50 +/- 2.576*5.
        assert!((night - 50.0).abs() <= 12.9, "night count {night}");
    }

    #[test]
    fn invalid_mix_is_rejected() {
        let spec = SynthSpec {
            n_users: 1,
            days: 1,
            start_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            mix: vec![(night_archetype(1.0), 0.7)],
            seed: 0,
        };
        assert!(matches!(
            synth_sessions(&spec),
            Err(EvDataError::InvalidSynthSpec(_))
        ));
    }

    #[test]
    fn generated_sessions_satisfy_invariants() {
        let spec = SynthSpec {
            n_users: 50,
            days: 20,
            start_date: NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
            mix: vec![(night_archetype(0.8), 0.5), (day_archetype(0.6), 0.5)],
            seed: 7,
        };
        let out = synth_sessions(&spec).unwrap();
        assert!(!out.sessions.is_empty());
        for s in &out.sessions {
            s.validate().unwrap();
            assert!(s.avg_power_kw > 0.0);
        }
    }
}
