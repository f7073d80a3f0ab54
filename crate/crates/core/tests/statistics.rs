use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use torus_cpd::calibration::CalibrationSample;
use torus_cpd::circular::{circular_mean, curved_variance, mean_resultant_length};
use torus_cpd::cusum::scaled_cusum;
use torus_cpd::special::{bessel_i0, bessel_ratio_i1_i0};
use torus_cpd::{AngleSeries, Law};

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn bessel_reference_values() {
    // Frozen from 30-digit evaluations.
    assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    assert!((bessel_i0(2.0) - 2.279_585_302_336_067_3).abs() < 1e-14);
    assert!((bessel_ratio_i1_i0(2.0) - 0.697_774_657_964_008).abs() < 1e-14);
    assert!((bessel_i0(50.0) / 2.932553783849336e20 - 1.0).abs() < 1e-13);
    assert!((bessel_i0(700.0) / 1.5295933476718737e302 - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn mean_direction_rotates_with_the_data(
        values in prop::collection::vec(0.0..1.5f64, 3..40), shift in 0.0..TAU
    ) {
        let mu = circular_mean(&values).unwrap();
        let rotated = AngleSeries::new(values.clone()).unwrap().rotate(shift);
        let mu_r = circular_mean(rotated.as_slice()).unwrap();
        prop_assert!(circ_dist(mu_r, mu + shift) < 1e-9);
        prop_assert!((mean_resultant_length(rotated.as_slice()) - mean_resultant_length(&values)).abs() < 1e-12);
    }

    #[test]
    fn curved_variance_is_bounded_and_rotation_invariant(
        values in prop::collection::vec(0.0..TAU, 2..40), shift in 0.0..TAU
    ) {
        if let Ok(v) = curved_variance(&values, None) {
            prop_assert!((0.0..=0.25).contains(&v));
            let rotated = AngleSeries::new(values.clone()).unwrap().rotate(shift);
            let w = curved_variance(rotated.as_slice(), None).unwrap();
            prop_assert!((v - w).abs() < 1e-9);
        }
    }

    #[test]
    fn cusum_is_affine_invariant(
        values in prop::collection::vec(-5.0..5.0f64, 3..60), a in 0.1..10.0f64, b in -3.0..3.0f64
    ) {
        if let Ok(s) = scaled_cusum(&values) {
            let moved: Vec<f64> = values.iter().map(|x| a * x + b).collect();
            let t = scaled_cusum(&moved).unwrap();
            prop_assert!((s.statistic - t.statistic).abs() <= 1e-8 * s.statistic.max(1.0));
        }
    }

    #[test]
    fn critical_value_agrees_with_p_value(
        values in prop::collection::vec(0.0..10.0f64, 100..400), alpha in 0.02..0.5f64, probe in 0.0..10.0f64
    ) {
        let s = CalibrationSample::from_values(Law::BInfinity, 10, 0, None, values).unwrap();
        let c = s.critical_value(alpha).unwrap();
        let p = s.p_value(probe).unwrap();
        prop_assert_eq!(probe > c, p < alpha);
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn bessel_ratio_monotone(a in 0.0..50.0f64, b in 0.0..50.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bessel_ratio_i1_i0(lo) <= bessel_ratio_i1_i0(hi) + 1e-15);
        prop_assert!(bessel_ratio_i1_i0(hi) < 1.0);
    }
}

#[test]
fn antipodal_mean_is_undefined() {
    assert!(circular_mean(&[0.0, PI]).is_err());
}
