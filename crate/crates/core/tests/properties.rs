//! Property tests for the data pipeline invariants.

use chrono::{DateTime, Duration, TimeZone, Utc};
use proptest::prelude::*;

use flexgrid_core::ev_data::{
    average_profile, parse_sessions, rasterize_user, top_decile_max, write_sessions,
    ChargingSession, DayFilter,
};

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 6, 1, 0, 0, 0).unwrap()
}

prop_compose! {
    /// Minute-aligned session within a two-week window.
    fn aligned_session()(
        start_min in 0i64..(14 * 1440),
        duration_min in 1i64..600,
        power in 0.5f64..22.0,
    ) -> ChargingSession {
        let start = base_time() + Duration::minutes(start_min);
        ChargingSession {
            user_id: "u".into(),
            start,
            end: start + Duration::minutes(duration_min),
            avg_power_kw: power,
        }
    }
}

proptest! {
    #[test]
    fn rasterization_conserves_energy(sessions in prop::collection::vec(aligned_session(), 1..20)) {
        let refs: Vec<&ChargingSession> = sessions.iter().collect();
        let raster = rasterize_user(&refs, DayFilter::All).unwrap();
        let expected: f64 = sessions.iter().map(ChargingSession::energy_kwh).sum();
        prop_assert!((raster.energy_kwh() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn scaling_powers_scales_average_but_not_fraction(
        sessions in prop::collection::vec(aligned_session(), 1..15),
        scale in 0.1f64..8.0,
    ) {
        let refs: Vec<&ChargingSession> = sessions.iter().collect();
        let raster = rasterize_user(&refs, DayFilter::All).unwrap();
        let (avg, frac, _) = average_profile(&raster);

        let scaled: Vec<ChargingSession> = sessions
            .iter()
            .map(|s| ChargingSession { avg_power_kw: s.avg_power_kw * scale, ..s.clone() })
            .collect();
        let scaled_refs: Vec<&ChargingSession> = scaled.iter().collect();
        let scaled_raster = rasterize_user(&scaled_refs, DayFilter::All).unwrap();
        let (scaled_avg, scaled_frac, _) = average_profile(&scaled_raster);

        for t in 0..1440 {
            prop_assert!((scaled_avg[t] - avg[t] * scale).abs() <= 1e-9 * (avg[t] * scale).max(1e-12));
            prop_assert_eq!(scaled_frac[t], frac[t]);
        }
    }

    #[test]
    fn top_decile_ignores_order_and_duplication(
        mut samples in prop::collection::vec(0.01f64..50.0, 1..200),
    ) {
        let base = top_decile_max(&samples).unwrap();
        samples.reverse();
        prop_assert_eq!(top_decile_max(&samples).unwrap(), base);
        let doubled: Vec<f64> = samples.iter().chain(samples.iter()).copied().collect();
        prop_assert_eq!(top_decile_max(&doubled).unwrap(), base);
    }

    #[test]
    fn sessions_csv_round_trips(
        n_users in 1usize..5,
        raw in prop::collection::vec((0i64..(7 * 1440), 1i64..400, 1u32..2200), 1..30),
    ) {
        let mut sessions: Vec<ChargingSession> = raw
            .iter()
            .enumerate()
            .map(|(i, &(start_min, dur, power_centi))| {
                let start = base_time() + Duration::minutes(start_min);
                ChargingSession {
                    user_id: format!("user{}", i % n_users),
                    start,
                    end: start + Duration::minutes(dur),
                    avg_power_kw: f64::from(power_centi) / 100.0,
                }
            })
            .collect();
        sessions.sort_by(|a, b| (a.user_id.as_str(), a.start).cmp(&(b.user_id.as_str(), b.start)));

        let file = tempfile::NamedTempFile::new().unwrap();
        write_sessions(file.path(), &sessions).unwrap();
        let (parsed, summary) = parse_sessions(file.path(), true).unwrap();
        prop_assert_eq!(parsed, sessions);
        prop_assert_eq!(summary.n_rejected, 0);
    }
}
