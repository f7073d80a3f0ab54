//! Standardized CUSUM scan shared by the concentration and general tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The CUSUM process `T(k)`, `k = 1..n`, and its weighted version for
/// `k = 1..n−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumProfile<T> {
    /// `T(k)` for `k = 1..=n` (index `k − 1`).
    pub t_values: Vec<T>,
    /// `T(k) / √((k/n)(1 − k/n))` for `k = 1..n` (index `k − 1`).
    pub scaled: Vec<T>,
}

/// Result of a CUSUM scan.
#[derive(Debug, Clone, PartialEq)]
pub struct CusumScan<T> {
    pub profile: CusumProfile<T>,
    pub statistic: T,
    /// 1-based split: the first segment is observations `1..=argmax`.
    pub argmax: usize,
}

/// Weighted CUSUM scan of `values`.
///
/// `T(k) = [Σ_{i≤k} v_i − k·v̄]² / (n·σ̂²)` with the `(n−1)`-divisor sample
/// variance; the statistic is the maximum of the weighted profile, ties
/// going to the smallest `k`.
pub fn scaled_cusum<T: Scalar>(values: &[T]) -> Result<CusumScan<T>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cusum input"));
    }
    let nf = T::from_count(n);
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / nf;
    let ss = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean));
    let variance = ss / T::from_count(n - 1);
    // Relative floor: a constant series leaves only rounding noise in `ss`.
    let scale = values.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    let floor = T::epsilon() * T::epsilon() * (scale * scale).max(T::min_positive_value()) * nf;
    if !(ss > floor) {
        return Err(Error::DegenerateSample(
            "zero sample variance in CUSUM input".into(),
        ));
    }

    let denom = nf * variance;
    let mut t_values = Vec::with_capacity(n);
    let mut partial = T::zero();
    // Deviations are summed directly, so the k = n entry is the rounding
    // residue of Σ(v_i − v̄) and vanishes to machine precision.
    for &v in values {
        partial = partial + (v - mean);
        t_values.push(partial * partial / denom);
    }

    let mut scaled = Vec::with_capacity(n - 1);
    let mut best = T::neg_infinity();
    let mut argmax = 1;
    for k in 1..n {
        let u = T::from_count(k) / nf;
        let w = t_values[k - 1] / (u * (T::one() - u)).sqrt();
        if w > best {
            best = w;
            argmax = k;
        }
        scaled.push(w);
    }

    Ok(CusumScan {
        profile: CusumProfile { t_values, scaled },
        statistic: best,
        argmax,
    })
}
