//! Areas on the curved torus and the "square of an angle".
//!
//! Points live on the flat parameter square `[0, 2π)²`. Two diagonally
//! opposite points cut the torus surface into four rectangles (wrapping
//! around both axes); the proportionate area between them is the smallest of
//! the four, divided by the total surface area. All areas here are expressed
//! with `r·R = 1`, since every exported quantity is a ratio to the total
//! area `4π²·r·R` and only the shape ratio `r/R` matters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::{wrap_angle, Scalar};

/// A point `(φ, θ)` on the flat torus, both coordinates in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint<T> {
    phi: T,
    theta: T,
}

impl<T: Scalar> TorusPoint<T> {
    /// Builds a point, reducing both coordinates mod 2π.
    pub fn new(phi: T, theta: T) -> Result<Self> {
        if !phi.is_finite() || !theta.is_finite() {
            return Err(Error::NonFinite("torus point coordinate"));
        }
        Ok(Self {
            phi: wrap_angle(phi),
            theta: wrap_angle(theta),
        })
    }

    pub fn origin() -> Self {
        Self {
            phi: T::zero(),
            theta: T::zero(),
        }
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn theta(&self) -> T {
        self.theta
    }
}

/// Ratio `r/R` of the tube radius to the central radius, in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusShape<T> {
    ratio: T,
}

impl<T: Scalar> TorusShape<T> {
    pub fn new(ratio: T) -> Result<Self> {
        if !ratio.is_finite() {
            return Err(Error::NonFinite("torus shape ratio"));
        }
        if ratio <= T::zero() || ratio > T::one() {
            return Err(Error::InvalidParameter(format!(
                "torus ratio r/R must lie in (0, 1], got {ratio}"
            )));
        }
        Ok(Self { ratio })
    }

    /// The horn torus `r = R` used for angles.
    pub fn horn() -> Self {
        Self { ratio: T::one() }
    }

    pub fn ratio(&self) -> T {
        self.ratio
    }
}

impl<T: Scalar> Default for TorusShape<T> {
    fn default() -> Self {
        Self::horn()
    }
}

/// The four areas (normalized by `r·R`) cut out by two opposite corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerAreas<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub a4: T,
}

impl<T: Scalar> CornerAreas<T> {
    pub fn total(&self) -> T {
        self.a1 + self.a2 + self.a3 + self.a4
    }

    pub fn min(&self) -> T {
        self.a1.min(self.a2).min(self.a3.min(self.a4))
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }
}

fn ordered<T: Scalar>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Areas of the four regions between `p1` and `p2`.
///
/// Each axis is sorted independently, so `A1` is always the rectangle
/// `[φ_lo, φ_hi] × [θ_lo, θ_hi]`, `A2` wraps in φ, `A3` wraps in θ and `A4`
/// wraps in both.
pub fn corner_areas<T: Scalar>(
    p1: &TorusPoint<T>,
    p2: &TorusPoint<T>,
    shape: &TorusShape<T>,
) -> CornerAreas<T> {
    let tau = T::two_pi();
    let c = shape.ratio;
    let (phi1, phi2) = ordered(p1.phi, p2.phi);
    let (theta1, theta2) = ordered(p1.theta, p2.theta);

    let dphi = phi2 - phi1;
    let dtheta = theta2 - theta1;
    let dsin = theta2.sin() - theta1.sin();

    // Integral of (1 + c cos θ) over [θ1, θ2] and over its complement.
    let band_in = dtheta + c * dsin;
    let band_out = (tau - dtheta) - c * dsin;

    CornerAreas {
        a1: dphi * band_in,
        a2: (tau - dphi) * band_in,
        a3: dphi * band_out,
        a4: (tau - dphi) * band_out,
    }
}

/// `min{A1..A4} / 4π²`, a value in `[0, 1/4]`.
pub fn proportionate_area<T: Scalar>(
    p1: &TorusPoint<T>,
    p2: &TorusPoint<T>,
    shape: &TorusShape<T>,
) -> T {
    let total = T::two_pi() * T::two_pi();
    (corner_areas(p1, p2, shape).min() / total).max(T::zero())
}

/// The square of an angle: the proportionate area between `(0, 0)` and
/// `(θ, θ)` on the horn torus.
///
/// `theta` is reduced mod 2π first.
pub fn square_angle<T: Scalar>(theta: T) -> T {
    let theta = wrap_angle(theta);
    let p = TorusPoint { phi: theta, theta };
    proportionate_area(&TorusPoint::origin(), &p, &TorusShape::horn())
}

/// Square of an angle written in terms of the circular distance `d ∈ [0, π]`
/// of the angle from zero and `|sin d|`.
///
/// On the horn torus the minimum of the four corner areas reduces to
/// `d (d + sin d) / 4π²`; this form lets hot loops reuse precomputed sines.
#[inline]
pub fn square_angle_from_distance<T: Scalar>(d: T, sin_d: T) -> T {
    let total = T::two_pi() * T::two_pi();
    d * (d + sin_d) / total
}

/// Adaptive 2-D quadrature of the area element `(1 + c cos θ)` over a
/// rectangle of the parameter square, to absolute error `1e-10`.
///
/// This is a brute-force check for [`corner_areas`] and makes no use of the
/// closed forms.
pub fn quadrature_area(
    phi: (f64, f64),
    theta: (f64, f64),
    shape: &TorusShape<f64>,
) -> Result<f64> {
    let tau = std::f64::consts::TAU;
    for &(lo, hi) in &[phi, theta] {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite("quadrature bounds"));
        }
        if lo < 0.0 || hi > tau || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "quadrature bounds [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 2π"
            )));
        }
    }
    let c = shape.ratio();
    quad::integrate_rect(|_, t| 1.0 + c * t.cos(), phi, theta, 1e-11)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn pt(phi: f64, theta: f64) -> TorusPoint<f64> {
        TorusPoint::new(phi, theta).unwrap()
    }

    #[test]
    fn antipode_splits_evenly() {
        let a = corner_areas(&pt(0.0, 0.0), &pt(PI, PI), &TorusShape::horn());
        for v in a.as_array() {
            assert!((v - PI * PI).abs() < 1e-12);
        }
        assert!((proportionate_area(&pt(0.0, 0.0), &pt(PI, PI), &TorusShape::horn()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quarter_square_matches_quadrature() {
        let a = corner_areas(&pt(0.0, 0.0), &pt(FRAC_PI_2, FRAC_PI_2), &TorusShape::horn());
        let q = quadrature_area((0.0, FRAC_PI_2), (0.0, FRAC_PI_2), &TorusShape::horn()).unwrap();
        assert!((a.a1 - q).abs() < 1e-10);
        // (π/2)(π/2 + 1)
        assert!((a.a1 - 4.038_197_427_067_236).abs() < 1e-12);
        let p = proportionate_area(&pt(0.0, 0.0), &pt(FRAC_PI_2, FRAC_PI_2), &TorusShape::horn());
        assert!((p - (1.0 / 16.0 + 1.0 / (8.0 * PI))).abs() < 1e-15);
    }

    #[test]
    fn coincident_points() {
        let p = pt(1.3, 4.2);
        let a = corner_areas(&p, &p, &TorusShape::horn());
        assert_eq!(a.a1, 0.0);
        assert_eq!(a.a2, 0.0);
        assert_eq!(a.a3, 0.0);
        assert!((a.a4 - TAU * TAU).abs() < 1e-12);
        assert_eq!(proportionate_area(&p, &p, &TorusShape::horn()), 0.0);
    }

    #[test]
    fn square_angle_anchors() {
        assert_eq!(square_angle(0.0_f64), 0.0);
        assert!((square_angle(PI) - 0.25).abs() < 1e-15);
        assert!((square_angle(FRAC_PI_2) - 0.102_288_735_772_973_84).abs() < 1e-15);
        let v32 = square_angle(std::f32::consts::PI);
        assert!((v32 - 0.25).abs() < 1e-6);
    }

    #[test]
    fn distance_form_matches_corner_form() {
        for i in 0..2000 {
            let theta = TAU * i as f64 / 2000.0;
            let d = theta.min(TAU - theta);
            let fast = square_angle_from_distance(d, d.sin());
            assert!((fast - square_angle(theta)).abs() < 1e-14, "theta={theta}");
        }
    }

    #[test]
    fn shape_validation() {
        assert!(TorusShape::new(0.0).is_err());
        assert!(TorusShape::new(1.5).is_err());
        assert!(TorusShape::new(f64::NAN).is_err());
        assert!(TorusShape::new(0.3).is_ok());
        assert!(TorusPoint::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn quadrature_half_band() {
        let q = quadrature_area((0.0, TAU), (0.0, PI), &TorusShape::horn()).unwrap();
        assert!((q - 2.0 * PI * PI).abs() < 1e-10);
        let full = quadrature_area((0.0, TAU), (0.0, TAU), &TorusShape::new(0.4).unwrap()).unwrap();
        assert!((full - TAU * TAU).abs() < 1e-10);
        assert!(quadrature_area((1.0, 0.5), (0.0, 1.0), &TorusShape::horn()).is_err());
    }
}
