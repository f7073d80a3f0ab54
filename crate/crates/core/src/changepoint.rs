//! The three changepoint tests.
//!
//! * SACC: change in concentration, CUSUM of squared angles about a known (or
//!   estimated) mean direction.
//! * CVMC: change in mean direction at known concentration; the split is
//!   located by the ratio of curved variances and scored by a likelihood
//!   ratio.
//! * SAGC: change in mean and/or concentration, CUSUM of the larger of the
//!   centered and signed non-centered squared angles.

use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationInfo, CalibrationSample, Law};
use crate::circular::{
    circular_mean, direction_of, mean_resultant_length, vm_kappa_from_resultant,
};
use crate::cusum::{scaled_cusum, CusumScan};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{square_angle, square_angle_from_distance};
use crate::scalar::{wrap_angle, Scalar};

/// Shortest series any test will run on.
pub const MIN_TEST_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sacc,
    Cvmc,
    Sagc,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sacc => "SACC",
            Method::Cvmc => "CVMC",
            Method::Sagc => "SAGC",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sacc" => Ok(Method::Sacc),
            "cvmc" => Ok(Method::Cvmc),
            "sagc" => Ok(Method::Sagc),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Parametric family assumed by the mean-direction test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvmcFamily {
    VonMises,
    WrappedCauchy,
}

/// Family and (known or plug-in) concentration used by CVMC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvmcModel {
    pub family: CvmcFamily,
    /// `κ` for von Mises, `ρ` for wrapped Cauchy.
    pub concentration: f64,
    /// True when the concentration was estimated from the data rather than
    /// supplied.
    pub plug_in: bool,
}

impl CvmcModel {
    pub fn known(family: CvmcFamily, concentration: f64) -> Result<Self> {
        let model = Self {
            family,
            concentration,
            plug_in: false,
        };
        model.distribution(0.0)?;
        Ok(model)
    }

    /// Estimates the concentration from the whole series: `κ̂` by inverting
    /// the Bessel ratio, or `ρ̂ = R̄`.
    pub fn plug_in(family: CvmcFamily, values: &[f64]) -> Result<Self> {
        let rbar = mean_resultant_length(values);
        let concentration = match family {
            CvmcFamily::VonMises => vm_kappa_from_resultant(rbar)?,
            CvmcFamily::WrappedCauchy => {
                if rbar >= 1.0 {
                    return Err(Error::UnboundedConcentration(rbar));
                }
                rbar
            }
        };
        let model = Self {
            family,
            concentration,
            plug_in: true,
        };
        model.distribution(0.0)?;
        Ok(model)
    }

    /// The model's law at location `mu`.
    pub fn distribution(&self, mu: f64) -> Result<DistributionSpec> {
        match self.family {
            CvmcFamily::VonMises => DistributionSpec::von_mises(mu, self.concentration),
            CvmcFamily::WrappedCauchy => DistributionSpec::wrapped_cauchy(mu, self.concentration),
        }
    }

    /// The CVMC model matching a null distribution, if the family is supported.
    pub fn from_distribution(spec: &DistributionSpec) -> Result<Self> {
        match *spec {
            DistributionSpec::VonMises { kappa, .. } => Self::known(CvmcFamily::VonMises, kappa),
            DistributionSpec::WrappedCauchy { rho, .. } => {
                Self::known(CvmcFamily::WrappedCauchy, rho)
            }
            DistributionSpec::KatoJones { .. } => {
                Err(Error::UnsupportedFamily(spec.family_name().into()))
            }
        }
    }
}

/// Outcome of one test on one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: Method,
    pub n: usize,
    pub statistic: f64,
    /// 1-based: the first segment is observations `1..=changepoint_index`.
    pub changepoint_index: usize,
    pub cutoff: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub rejected: bool,
    /// Mean direction the observations were centered on (SACC, SAGC) or the
    /// full-sample mean (CVMC).
    pub mean_direction: f64,
    /// SACC only: whether `mean_direction` was supplied rather than estimated.
    pub mean_known: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvmc_model: Option<CvmcModel>,
    pub calibration: CalibrationInfo,
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_TEST_LEN {
        return Err(Error::TooShort {
            needed: MIN_TEST_LEN,
            got: n,
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_law(null: &CalibrationSample, expected: Law) -> Result<()> {
    if null.law != expected {
        return Err(Error::InvalidParameter(format!(
            "calibration law {:?} does not match test (needs {:?})",
            null.law, expected
        )));
    }
    Ok(())
}

/// Squared angles `a_i = A[(θ_i − μ) mod 2π]`.
pub fn centered_square_angles<T: Scalar>(values: &[T], mu: T) -> Vec<T> {
    values.iter().map(|&v| square_angle(v - mu)).collect()
}

/// SACC scan. Returns the CUSUM scan and the centering direction.
pub fn sacc_scan<T: Scalar>(values: &[T], mu: Option<T>) -> Result<(CusumScan<T>, T)> {
    let mu = match mu {
        Some(m) if !m.is_finite() => return Err(Error::NonFinite("mean direction")),
        Some(m) => m,
        None => circular_mean(values)?,
    };
    let a = centered_square_angles(values, mu);
    let scan = scaled_cusum(&a).map_err(|e| match e {
        Error::DegenerateSample(_) => {
            Error::DegenerateSample("all centered angles are equally spread".into())
        }
        other => other,
    })?;
    Ok((scan, mu))
}

fn finish_report(
    method: Method,
    n: usize,
    statistic: f64,
    changepoint_index: usize,
    alpha: f64,
    null: &CalibrationSample,
) -> Result<TestReport> {
    let cutoff = null.critical_value(alpha)?;
    let p_value = null.p_value(statistic)?;
    Ok(TestReport {
        method,
        n,
        statistic,
        changepoint_index,
        cutoff,
        p_value,
        alpha,
        rejected: statistic > cutoff,
        mean_direction: 0.0,
        mean_known: false,
        cvmc_model: None,
        calibration: null.info(),
    })
}

/// Concentration-change test against a `B∞` calibration sample.
///
/// With `mu = None` the series is centered on its own circular mean.
pub fn sacc_test(
    values: &[f64],
    mu: Option<f64>,
    alpha: f64,
    null: &CalibrationSample,
) -> Result<TestReport> {
    check_len(values.len())?;
    check_alpha(alpha)?;
    check_law(null, Law::BInfinity)?;
    let (scan, centre) = sacc_scan(values, mu)?;
    let mut report = finish_report(Method::Sacc, values.len(), scan.statistic, scan.argmax, alpha, null)?;
    report.mean_direction = centre;
    report.mean_known = mu.is_some();
    Ok(report)
}

/// Curved-variance scan over candidate splits.
#[derive(Debug, Clone, PartialEq)]
pub struct CvmcScan<T> {
    /// 1-based split maximizing `b̄(0)/b̄(k)`.
    pub k_max: usize,
    pub bbar0: T,
    /// `b̄(k)` at index `k − 1`; `None` for `k = 1`, `k = n` and skipped splits.
    pub bbar: Vec<Option<T>>,
    pub mean_full: T,
    pub mean_left: T,
    pub mean_right: T,
}

struct Trig<T> {
    theta: Vec<T>,
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Scalar> Trig<T> {
    fn new(values: &[T]) -> Self {
        Self {
            theta: values.to_vec(),
            cos: values.iter().map(|v| v.cos()).collect(),
            sin: values.iter().map(|v| v.sin()).collect(),
        }
    }

    /// Σ A[(θ_i − μ) mod 2π] over `range`.
    fn sum_square_angles(&self, range: std::ops::Range<usize>, mu: T) -> T {
        let pi = T::PI();
        let tau = T::two_pi();
        let (cm, sm) = (mu.cos(), mu.sin());
        let mut acc = T::zero();
        for i in range {
            let mut d = (self.theta[i] - mu).abs();
            if d > tau {
                d = d % tau;
            }
            if d > pi {
                d = tau - d;
            }
            let sin_d = (self.sin[i] * cm - self.cos[i] * sm).abs();
            acc = acc + square_angle_from_distance(d, sin_d);
        }
        acc
    }
}

/// Locates the most likely mean-direction split by maximizing `b̄(0)/b̄(k)`
/// over `k = 2..n−1`. Splits whose segment means are undefined are skipped;
/// ties go to the smallest `k`.
pub fn cvmc_scan<T: Scalar>(values: &[T]) -> Result<CvmcScan<T>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("angle"));
    }
    let trig = Trig::new(values);
    let nf = T::from_count(n);

    let mut pc = Vec::with_capacity(n + 1);
    let mut ps = Vec::with_capacity(n + 1);
    pc.push(T::zero());
    ps.push(T::zero());
    for i in 0..n {
        pc.push(pc[i] + trig.cos[i]);
        ps.push(ps[i] + trig.sin[i]);
    }
    let (tc, ts) = (pc[n], ps[n]);

    let mean_full = direction_of(tc, ts, n)?;
    let bbar0 = trig.sum_square_angles(0..n, mean_full) / nf;
    // Rounding in the mean leaves O(eps²) residue on a constant series.
    if !(bbar0 > T::epsilon() * T::epsilon()) {
        return Err(Error::DegenerateSample(
            "zero curved variance: every split ratio is 0/0".into(),
        ));
    }

    let mut bbar = vec![None; n];
    let mut best: Option<(T, usize, T, T)> = None;
    for k in 2..n {
        let left = direction_of(pc[k], ps[k], k);
        let right = direction_of(tc - pc[k], ts - ps[k], n - k);
        let (Ok(m1), Ok(m2)) = (left, right) else {
            continue;
        };
        let b = (trig.sum_square_angles(0..k, m1) + trig.sum_square_angles(k..n, m2)) / nf;
        bbar[k - 1] = Some(b);
        let ratio = if b > T::zero() { bbar0 / b } else { T::infinity() };
        if best.is_none_or(|(r, ..)| ratio > r) {
            best = Some((ratio, k, m1, m2));
        }
    }
    let Some((_, k_max, mean_left, mean_right)) = best else {
        return Err(Error::DegenerateSample(
            "no split has defined segment means".into(),
        ));
    };
    Ok(CvmcScan {
        k_max,
        bbar0,
        bbar,
        mean_full,
        mean_left,
        mean_right,
    })
}

/// `S_n = −2 log(LR0 / (LR1 · LR2))` at the scan's split.
pub fn cvmc_statistic(values: &[f64], scan: &CvmcScan<f64>, model: &CvmcModel) -> Result<f64> {
    let k = scan.k_max;
    match model.family {
        CvmcFamily::VonMises => {
            // Σ cos(θ − μ̂) over a segment is its resultant length, so the
            // log-likelihood ratio is 2κ(R1 + R2 − R) ≥ 0.
            let resultant = |s: &[f64], mu: f64| s.iter().map(|&t| (t - mu).cos()).sum::<f64>();
            let r = resultant(values, scan.mean_full);
            let r1 = resultant(&values[..k], scan.mean_left);
            let r2 = resultant(&values[k..], scan.mean_right);
            Ok((2.0 * model.concentration * (r1 + r2 - r)).max(0.0))
        }
        CvmcFamily::WrappedCauchy => {
            let loglik = |s: &[f64], mu: f64| -> Result<f64> {
                let spec = model.distribution(mu)?;
                Ok(s.iter().map(|&t| spec.ln_pdf(t)).sum())
            };
            let l0 = loglik(values, scan.mean_full)?;
            let l1 = loglik(&values[..k], scan.mean_left)?;
            let l2 = loglik(&values[k..], scan.mean_right)?;
            Ok(-2.0 * (l0 - l1 - l2))
        }
    }
}

/// Mean-direction test with concentration given by `model`, calibrated by a
/// simulated null sample of `S_n` at the same length and model.
pub fn cvmc_test(
    values: &[f64],
    model: &CvmcModel,
    alpha: f64,
    null: &CalibrationSample,
) -> Result<TestReport> {
    check_len(values.len())?;
    check_alpha(alpha)?;
    check_law(null, Law::SnNull)?;
    let scan = cvmc_scan(values)?;
    let statistic = cvmc_statistic(values, &scan, model)?;
    let mut report = finish_report(Method::Cvmc, values.len(), statistic, scan.k_max, alpha, null)?;
    report.mean_direction = scan.mean_full;
    report.cvmc_model = Some(*model);
    Ok(report)
}

/// `d_i = max{â_i, ã_i}` with `â_i` centered on the sample mean and
/// `ã_i = ±A(θ_i)`, positive when `θ_i < π`.
pub fn sagc_d_values<T: Scalar>(values: &[T]) -> Result<Vec<T>> {
    let mu = circular_mean(values)?;
    Ok(sagc_d_values_about(values, mu))
}

fn sagc_d_values_about<T: Scalar>(values: &[T], mu: T) -> Vec<T> {
    values
        .iter()
        .map(|&v| {
            let v = wrap_angle(v);
            let centered = square_angle(v - mu);
            let sign = if v < T::PI() { T::one() } else { -T::one() };
            centered.max(sign * square_angle(v))
        })
        .collect()
}

/// SAGC scan over `d_i`; returns the scan and the estimated mean.
pub fn sagc_scan<T: Scalar>(values: &[T]) -> Result<(CusumScan<T>, T)> {
    let mu = circular_mean(values)?;
    let d = sagc_d_values_about(values, mu);
    Ok((scaled_cusum(&d)?, mu))
}

/// General-change test against a `B∞` calibration sample.
pub fn sagc_test(values: &[f64], alpha: f64, null: &CalibrationSample) -> Result<TestReport> {
    check_len(values.len())?;
    check_alpha(alpha)?;
    check_law(null, Law::BInfinity)?;
    let (scan, mu) = sagc_scan(values)?;
    let mut report = finish_report(Method::Sagc, values.len(), scan.statistic, scan.argmax, alpha, null)?;
    report.mean_direction = mu;
    Ok(report)
}

/// Statistic and split for `method` without calibration; used by the
/// simulation loops.
pub fn statistic(
    method: Method,
    values: &[f64],
    mu: Option<f64>,
    model: Option<&CvmcModel>,
) -> Result<(f64, usize)> {
    match method {
        Method::Sacc => sacc_scan(values, mu).map(|(s, _)| (s.statistic, s.argmax)),
        Method::Sagc => sagc_scan(values).map(|(s, _)| (s.statistic, s.argmax)),
        Method::Cvmc => {
            let model = model.ok_or_else(|| {
                Error::InvalidParameter("CVMC needs a family and concentration".into())
            })?;
            let scan = cvmc_scan(values)?;
            Ok((cvmc_statistic(values, &scan, model)?, scan.k_max))
        }
    }
}
