//! Circular summary statistics: mean direction, mean resultant length,
//! mod-2π centering and curved variance.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::square_angle;
use crate::scalar::{wrap_angle, Scalar};
use crate::special;

/// Mean resultant length below which the mean direction is treated as undefined.
pub const UNDEFINED_MEAN_THRESHOLD: f64 = 1e-12;

/// A temporally ordered series of angles in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleSeries<T> {
    values: Vec<T>,
}

impl<T: Scalar> AngleSeries<T> {
    /// Builds a series from radians, reducing each value into `[0, 2π)`.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("angle"));
        }
        Ok(Self {
            values: values.into_iter().map(wrap_angle).collect(),
        })
    }

    pub fn from_degrees(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|v| v.to_radians()).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    /// Contiguous sub-series, 0-based half-open range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.values[range].to_vec())
    }

    /// Adds `delta` to every angle (mod 2π).
    pub fn rotate(&self, delta: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| wrap_angle(v + delta)).collect(),
        }
    }
}

impl<T> Deref for AngleSeries<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.values
    }
}

/// Which quantity a report calls "concentration".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationMeasure {
    /// Mean resultant length `R̄`.
    #[default]
    ResultantLength,
    /// Von Mises `κ̂` from inverting `I1(κ)/I0(κ) = R̄`.
    VonMisesKappa,
}

/// Summary of a (sub)series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularSummary<T> {
    pub n: usize,
    /// `None` when the resultant vector vanishes.
    pub mean_direction: Option<T>,
    pub resultant_length: T,
    /// Curved variance about the estimated mean; `None` with the mean.
    pub curved_variance: Option<T>,
}

impl<T: Scalar> CircularSummary<T> {
    pub fn of(values: &[T]) -> Self {
        let mean_direction = circular_mean(values).ok();
        Self {
            n: values.len(),
            mean_direction,
            resultant_length: mean_resultant_length(values),
            curved_variance: mean_direction.map(|mu| mean_square_angle(values, mu)),
        }
    }
}

fn resultant<T: Scalar>(values: &[T]) -> (T, T) {
    values.iter().fold((T::zero(), T::zero()), |(c, s), &v| {
        (c + v.cos(), s + v.sin())
    })
}

/// Quadrant-correct direction of the resultant vector, in `[0, 2π)`.
pub fn circular_mean<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let (c, s) = resultant(values);
    direction_of(c, s, values.len())
}

/// Direction of a resultant `(Σcos, Σsin)` accumulated from `n` angles.
pub(crate) fn direction_of<T: Scalar>(sum_cos: T, sum_sin: T, n: usize) -> Result<T> {
    let n = T::from_count(n);
    let rbar = (sum_cos / n).hypot(sum_sin / n);
    if !(rbar >= T::from_f64_lossy(UNDEFINED_MEAN_THRESHOLD)) {
        return Err(Error::UndefinedMeanDirection {
            threshold: UNDEFINED_MEAN_THRESHOLD,
        });
    }
    Ok(wrap_angle(sum_sin.atan2(sum_cos)))
}

/// `√[(Σcos θ / n)² + (Σsin θ / n)²]`.
pub fn mean_resultant_length<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let (c, s) = resultant(values);
    let n = T::from_count(values.len());
    (c / n).hypot(s / n).min(T::one())
}

/// `(θ_i − μ) mod 2π` for every observation.
pub fn center_mod2pi<T: Scalar>(series: &AngleSeries<T>, mu: T) -> AngleSeries<T> {
    series.rotate(-mu)
}

pub(crate) fn mean_square_angle<T: Scalar>(values: &[T], mu: T) -> T {
    let sum = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + square_angle(v - mu));
    sum / T::from_count(values.len())
}

/// Mean square-of-angle of the centered observations.
///
/// Uses `mu` when given, otherwise the sample circular mean.
pub fn curved_variance<T: Scalar>(values: &[T], mu: Option<T>) -> Result<T> {
    if values.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mu = match mu {
        Some(m) if !m.is_finite() => return Err(Error::NonFinite("mean direction")),
        Some(m) => m,
        None => circular_mean(values)?,
    };
    Ok(mean_square_angle(values, mu))
}

/// Solve `I1(κ)/I0(κ) = r̄` for the von Mises concentration.
pub fn vm_kappa_from_resultant(rbar: f64) -> Result<f64> {
    if !rbar.is_finite() {
        return Err(Error::NonFinite("mean resultant length"));
    }
    if rbar < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean resultant length must be non-negative, got {rbar}"
        )));
    }
    if rbar >= 1.0 {
        return Err(Error::UnboundedConcentration(rbar));
    }
    if rbar == 0.0 {
        return Ok(0.0);
    }
    let residual = |k: f64| special::bessel_ratio_i1_i0(k) - rbar;
    // A(κ) is increasing; bracket the root by doubling.
    let mut lo = 0.0;
    let mut hi = 1.0;
    while residual(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::UnboundedConcentration(rbar));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() < 1e-13 || hi - lo < 1e-15 * hi {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Concentration of `values` under the chosen measure. `None` when the
/// von Mises inversion diverges (`R̄ = 1`).
pub fn concentration(values: &[f64], measure: ConcentrationMeasure) -> Option<f64> {
    let rbar = mean_resultant_length(values);
    match measure {
        ConcentrationMeasure::ResultantLength => Some(rbar),
        ConcentrationMeasure::VonMisesKappa => vm_kappa_from_resultant(rbar).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn series(v: &[f64]) -> AngleSeries<f64> {
        AngleSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mean_direction_examples() {
        assert!((circular_mean(&series(&[FRAC_PI_3])).unwrap() - FRAC_PI_3).abs() < 1e-15);
        assert!((circular_mean(&series(&[0.0, FRAC_PI_2])).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(matches!(
            circular_mean(&series(&[0.0, PI])),
            Err(Error::UndefinedMeanDirection { .. })
        ));
    }

    #[test]
    fn resultant_examples() {
        assert!((mean_resultant_length(&series(&[2.0, 2.0, 2.0])) - 1.0).abs() < 1e-15);
        assert!(mean_resultant_length(&series(&[0.0, PI])) < 1e-15);
    }

    #[test]
    fn centering_examples() {
        let c = center_mod2pi(&series(&[FRAC_PI_2]), FRAC_PI_2);
        assert_eq!(c.as_slice(), &[0.0]);
        let c = center_mod2pi(&series(&[0.0]), FRAC_PI_2);
        assert!((c[0] - 1.5 * PI).abs() < 1e-15);
        let c = center_mod2pi(&series(&[PI, 1.5 * PI]), PI);
        assert_eq!(c[0], 0.0);
        assert!((c[1] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn curved_variance_examples() {
        assert_eq!(curved_variance(&series(&[1.1, 1.1, 1.1]), None).unwrap(), 0.0);
        let mu = 0.7;
        let v = curved_variance(&series(&[mu + PI]), Some(mu)).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
        let v = curved_variance(&series(&[mu + FRAC_PI_2, mu - FRAC_PI_2]), Some(mu)).unwrap();
        assert!((v - (1.0 / 16.0 + 1.0 / (8.0 * PI))).abs() < 1e-14);
        assert!(curved_variance(&series(&[0.0, PI]), None).is_err());
    }

    #[test]
    fn kappa_inversion() {
        assert_eq!(vm_kappa_from_resultant(0.0).unwrap(), 0.0);
        // I1(2)/I0(2), evaluated independently to 40 digits.
        let k = vm_kappa_from_resultant(0.697_774_657_964_008).unwrap();
        assert!((k - 2.0).abs() < 1e-9);
        let k = vm_kappa_from_resultant(0.9).unwrap();
        assert!((special::bessel_ratio_i1_i0(k) - 0.9).abs() < 1e-10);
        assert!((k - 5.304_689_062_957_718).abs() < 1e-8);
        assert!(matches!(
            vm_kappa_from_resultant(1.0),
            Err(Error::UnboundedConcentration(_))
        ));
    }

    #[test]
    fn summary_handles_undefined_mean() {
        let s = CircularSummary::of(&[0.0, PI]);
        assert!(s.mean_direction.is_none());
        assert!(s.curved_variance.is_none());
        let s = CircularSummary::of(&[FRAC_PI_2; 4]);
        assert!((s.mean_direction.unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((s.resultant_length - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(AngleSeries::<f64>::new(vec![]).is_err());
        assert!(AngleSeries::new(vec![f64::NAN]).is_err());
    }
}
