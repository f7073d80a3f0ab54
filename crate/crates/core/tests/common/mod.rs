#![allow(dead_code)]

use std::f64::consts::TAU;

use torus_cpd::geometry::quadrature_area;
use torus_cpd::TorusShape;

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The four corner regions between two points, each integrated numerically
/// as a union of rectangles in the parameter square.
pub fn quadrature_corners(p1: (f64, f64), p2: (f64, f64), shape: &TorusShape) -> [f64; 4] {
    let (f1, f2) = ordered(p1.0, p2.0);
    let (t1, t2) = ordered(p1.1, p2.1);
    let q = |phi: (f64, f64), theta: (f64, f64)| quadrature_area(phi, theta, shape).unwrap();
    let phi_in = [(f1, f2)];
    let phi_out = [(0.0, f1), (f2, TAU)];
    let theta_in = [(t1, t2)];
    let theta_out = [(0.0, t1), (t2, TAU)];
    let region = |ps: &[(f64, f64)], ts: &[(f64, f64)]| -> f64 {
        ps.iter().flat_map(|&p| ts.iter().map(move |&t| (p, t))).map(|(p, t)| q(p, t)).sum()
    };
    [
        region(&phi_in, &theta_in),
        region(&phi_out, &theta_in),
        region(&phi_in, &theta_out),
        region(&phi_out, &theta_out),
    ]
}
