//! Feature construction from average daily profiles.

use super::{FeatureMode, FeatureVector};
use crate::ev_data::EvProfile;
use crate::MINUTES_PER_DAY;

/// The average daily curve itself, verbatim, as a 1,440-dimensional point.
pub fn feature_standard(profile: &EvProfile) -> FeatureVector {
    FeatureVector {
        user_id: profile.user_id.clone(),
        mode: FeatureMode::Standard,
        values: profile.avg_profile_kw.clone(),
    }
}

/// 2-D reduction of the curve: the first circular Fourier pair
/// `x1 = sum_t sin(2*pi*t/24h) * P(t)`, `x2 = sum_t cos(2*pi*t/24h) * P(t)`
/// with `t` running over the 1,440 minute indices (t = m/60 hours). The
/// angle encodes *when* the user charges, the radius how much; circularly
/// shifting a profile rotates the feature by the same phase.
pub fn feature_polar(profile: &EvProfile) -> FeatureVector {
    let mut x1 = 0.0;
    let mut x2 = 0.0;
    for (m, &p) in profile.avg_profile_kw.iter().enumerate() {
        let angle = std::f64::consts::TAU * m as f64 / MINUTES_PER_DAY as f64;
        x1 += angle.sin() * p;
        x2 += angle.cos() * p;
    }
    FeatureVector {
        user_id: profile.user_id.clone(),
        mode: FeatureMode::Polar,
        values: vec![x1, x2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile_with(values: Vec<f64>) -> EvProfile {
        EvProfile {
            user_id: "u".into(),
            frac_charging: values.iter().map(|&p| f64::from(p > 0.0)).collect(),
            avg_profile_kw: values,
            p_max_kw: 7.0,
            n_days: 1,
        }
    }

    fn impulse(minute: usize, kw: f64) -> EvProfile {
        let mut v = vec![0.0; MINUTES_PER_DAY];
        v[minute] = kw;
        profile_with(v)
    }

    #[test]
    fn standard_is_identity_on_the_curve() {
        let mut v = vec![0.0; MINUTES_PER_DAY];
        v[..60].fill(7.0);
        let p = profile_with(v.clone());
        let f = feature_standard(&p);
        assert_eq!(f.values, v);
        assert_eq!(f.mode, FeatureMode::Standard);
    }

    #[test]
    fn standard_distance_is_root_sum_square() {
        let mut a = vec![0.0; MINUTES_PER_DAY];
        let mut b = vec![0.0; MINUTES_PER_DAY];
        a[10] = 3.0;
        b[20] = 4.0;
        let fa = feature_standard(&profile_with(a));
        let fb = feature_standard(&profile_with(b));
        let d2: f64 = fa
            .values
            .iter()
            .zip(&fb.values)
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        assert!((d2.sqrt() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn polar_constant_profile_vanishes() {
        let p = profile_with(vec![3.0; MINUTES_PER_DAY]);
        let f = feature_polar(&p);
        let bound = 1e-9 * 3.0 * MINUTES_PER_DAY as f64;
        assert!(f.values[0].abs() <= bound);
        assert!(f.values[1].abs() <= bound);
    }

    #[test]
    fn polar_impulse_at_six_am() {
        let f = feature_polar(&impulse(360, 1.0));
        assert!((f.values[0] - 1.0).abs() < 1e-12);
        assert!(f.values[1].abs() < 1e-12);
    }

    #[test]
    fn polar_impulse_at_six_pm() {
        let f = feature_polar(&impulse(1080, 7.0));
        assert!((f.values[0] + 7.0).abs() < 1e-12);
        assert!(f.values[1].abs() < 1e-12);
    }

    #[test]
    fn polar_is_linear() {
        let mut a = vec![0.0; MINUTES_PER_DAY];
        let mut b = vec![0.0; MINUTES_PER_DAY];
        for m in 0..MINUTES_PER_DAY {
            a[m] = (m as f64 / 97.0).sin().abs();
            b[m] = ((m + 13) as f64 / 211.0).cos().abs();
        }
        let (alpha, beta) = (2.5, -0.75);
        let combo: Vec<f64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let fa = feature_polar(&profile_with(a));
        let fb = feature_polar(&profile_with(b));
        let fc = feature_polar(&profile_with(combo));
        for i in 0..2 {
            let want = alpha * fa.values[i] + beta * fb.values[i];
            assert!(
                (fc.values[i] - want).abs() <= 1e-12 * want.abs().max(1.0),
                "component {i}"
            );
        }
    }

    #[test]
    fn circular_shift_rotates_the_feature() {
        // Oracle: rotate the unshifted feature by the explicit 2x2 matrix.
        let mut rng = crate::rng::KeyedRng::from_parts(17, &[3]);
        for case in 0..20 {
            let values: Vec<f64> = (0..MINUTES_PER_DAY).map(|_| rng.next_f64()).collect();
            let shift = (rng.next_u64() % MINUTES_PER_DAY as u64) as usize;
            let shifted: Vec<f64> = (0..MINUTES_PER_DAY)
                .map(|m| values[(m + MINUTES_PER_DAY - shift) % MINUTES_PER_DAY])
                .collect();
            let f0 = feature_polar(&profile_with(values));
            let f1 = feature_polar(&profile_with(shifted));
            let theta = std::f64::consts::TAU * shift as f64 / MINUTES_PER_DAY as f64;
            let (s, c) = theta.sin_cos();
            // Shifting later in the day advances the phase: x = (sin, cos)
            // picks up angle addition in the (x1, x2) plane.
            let want1 = c * f0.values[0] + s * f0.values[1];
            let want2 = -s * f0.values[0] + c * f0.values[1];
            assert!(
                (f1.values[0] - want1).abs() < 1e-9 && (f1.values[1] - want2).abs() < 1e-9,
                "case {case}: shift {shift}"
            );
        }
    }
}
