mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use proptest::prelude::*;
use torus_cpd::geometry::{corner_areas, proportionate_area, square_angle, square_angle_from_distance};
use torus_cpd::{TorusPoint, TorusPointF32, TorusShape};

fn pt(phi: f64, theta: f64) -> TorusPoint {
    TorusPoint::new(phi, theta).unwrap()
}

#[test]
fn corners_match_quadrature_on_fixed_cases() {
    let cases = [
        ((0.0, 0.0), (FRAC_PI_2, FRAC_PI_2), 1.0),
        ((0.3, 5.9), (4.0, 0.2), 0.4),
        ((6.0, 3.0), (1.0, 3.1), 0.9),
        ((2.0, 2.0), (2.0, 2.0), 1.0),
    ];
    for (a, b, ratio) in cases {
        let shape = TorusShape::new(ratio).unwrap();
        let closed = corner_areas(&pt(a.0, a.1), &pt(b.0, b.1), &shape).as_array();
        let numeric = common::quadrature_corners(a, b, &shape);
        for (c, q) in closed.iter().zip(numeric) {
            assert!((c - q).abs() < 1e-8, "{a:?} {b:?} {ratio}: {c} vs {q}");
        }
    }
}

#[test]
fn square_angle_quarter_turn_oracle() {
    // Area of [0, π/2]² under (1 + cos θ), over 4π².
    let quad = common::quadrature_corners((0.0, 0.0), (FRAC_PI_2, FRAC_PI_2), &TorusShape::horn())[0]
        / (4.0 * PI * PI);
    let expected = 1.0 / 16.0 + 1.0 / (8.0 * PI);
    assert!((quad - expected).abs() < 1e-12);
    assert!((square_angle(FRAC_PI_2) - expected).abs() < 1e-12);
    assert!((expected - 0.10228873577297383).abs() < 1e-16);
}

#[test]
fn f32_agrees_with_f64() {
    for i in 0..200 {
        let t = i as f64 * TAU / 200.0;
        let d = (square_angle(t as f32) as f64 - square_angle(t)).abs();
        assert!(d < 1e-6, "{t}: {d}");
    }
    let a = TorusPointF32::new(1.0, 2.0).unwrap();
    let b = TorusPointF32::new(4.0, 0.5).unwrap();
    let total = corner_areas(&a, &b, &torus_cpd::geometry::TorusShape::<f32>::horn()).total();
    assert!((total - 4.0 * std::f32::consts::PI.powi(2)).abs() < 1e-3);
}

proptest! {
    #[test]
    fn corner_total_is_full_surface(
        p1 in (0.0..TAU, 0.0..TAU), p2 in (0.0..TAU, 0.0..TAU), ratio in 0.01f64..=1.0
    ) {
        let shape = TorusShape::new(ratio).unwrap();
        let a = corner_areas(&pt(p1.0, p1.1), &pt(p2.0, p2.1), &shape);
        prop_assert!((a.total() - 4.0 * PI * PI).abs() < 1e-10);
        for v in a.as_array() {
            prop_assert!(v >= -1e-12);
        }
    }

    #[test]
    fn proportionate_area_is_symmetric_and_bounded(
        p1 in (0.0..TAU, 0.0..TAU), p2 in (0.0..TAU, 0.0..TAU)
    ) {
        let shape = TorusShape::horn();
        let ab = proportionate_area(&pt(p1.0, p1.1), &pt(p2.0, p2.1), &shape);
        let ba = proportionate_area(&pt(p2.0, p2.1), &pt(p1.0, p1.1), &shape);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=0.25 + 1e-15).contains(&ab));
    }

    #[test]
    fn square_angle_is_the_diagonal_area(theta in 0.0..TAU) {
        let via_corners = proportionate_area(&TorusPoint::origin(), &pt(theta, theta), &TorusShape::horn());
        prop_assert!((square_angle(theta) - via_corners).abs() < 1e-13);
    }

    #[test]
    fn square_angle_symmetric_periodic_and_bounded(theta in -20.0..20.0f64) {
        let s = square_angle(theta);
        prop_assert!((0.0..=0.25 + 1e-15).contains(&s));
        prop_assert!((s - square_angle(-theta)).abs() < 1e-12);
        prop_assert!((s - square_angle(theta + TAU)).abs() < 1e-12);
    }

    #[test]
    fn square_angle_monotone_in_distance(a in 0.0..PI, b in 0.0..PI) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(square_angle(lo) <= square_angle(hi) + 1e-15);
        prop_assert!((square_angle_from_distance(hi, hi.sin()) - square_angle(hi)).abs() < 1e-14);
    }
}
