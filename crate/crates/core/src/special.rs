//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Ascending power series below [`SERIES_LIMIT`], Hankel asymptotic series
//! above it. The exponentially scaled forms `e^{-x} I_ν(x)` stay finite for
//! every argument and are what likelihoods and ratios use.

const SERIES_LIMIT: f64 = 30.0;

fn series(x: f64, order: u32) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// `√(2πx) e^{-x} I_ν(x)` from the asymptotic expansion, valid for large x.
fn asymptotic_scaled(x: f64, order: u32) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{-x} I0(x)` for `x ≥ 0` (negative arguments use symmetry).
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x, 0) * (-x).exp()
    } else {
        asymptotic_scaled(x, 0) / (std::f64::consts::TAU * x).sqrt()
    }
}

/// `e^{-|x|} I1(x)`.
pub fn bessel_i1e(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(ax, 1) * (-ax).exp()
    } else {
        asymptotic_scaled(ax, 1) / (std::f64::consts::TAU * ax).sqrt()
    };
    v.copysign(x)
}

/// Modified Bessel function `I0(x)`; overflows to infinity above `x ≈ 713`.
pub fn bessel_i0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x, 0)
    } else {
        bessel_i0e(x) * x.exp()
    }
}

/// Modified Bessel function `I1(x)`.
pub fn bessel_i1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(ax, 1)
    } else {
        bessel_i1e(ax) * ax.exp()
    };
    v.copysign(x)
}

/// `ln I0(x)`, finite for every finite argument.
pub fn ln_bessel_i0(x: f64) -> f64 {
    bessel_i0e(x).ln() + x.abs()
}

/// `A(κ) = I1(κ)/I0(κ)`, the mean resultant length of a von Mises law.
pub fn bessel_ratio_i1_i0(kappa: f64) -> f64 {
    if kappa == 0.0 {
        return 0.0;
    }
    bessel_i1e(kappa) / bessel_i0e(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Ascending series with 40 terms, each term built from exact integer
    // factorials; independent of the adaptive loop above.
    fn oracle_i0(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0_f64;
        for k in 0..40 {
            if k > 0 {
                fact *= k as f64;
            }
            sum += (x / 2.0).powi(2 * k) / (fact * fact);
        }
        sum
    }

    #[test]
    fn i0_reference_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert!((oracle_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((oracle_i0(2.0) - 2.279_585_302_336_067_3).abs() < 1e-15);
        assert!((bessel_i0(1.0) / 1.266_065_877_752_008_4 - 1.0).abs() < 1e-12);
        assert!((bessel_i0(2.0) / 2.279_585_302_336_067_3 - 1.0).abs() < 1e-12);
        for &x in &[0.1, 0.5, 3.0, 7.5, 12.0] {
            assert!((bessel_i0(x) / oracle_i0(x) - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn large_arguments() {
        // 40-digit references.
        assert!((bessel_i0(50.0) / 2.932_553_783_849_336e20 - 1.0).abs() < 1e-12);
        let ln700 = ln_bessel_i0(700.0);
        assert!((ln700 - 1.529_593_347_671_873_7e302_f64.ln()).abs() < 1e-12);
        assert!(bessel_i0e(1e6).is_finite());
        // Continuity across the series/asymptotic switch.
        let below = bessel_i0e(SERIES_LIMIT);
        let above = asymptotic_scaled(SERIES_LIMIT, 0) / (std::f64::consts::TAU * SERIES_LIMIT).sqrt();
        assert!((below / above - 1.0).abs() < 1e-12);
        let below = bessel_i1e(SERIES_LIMIT);
        let above = asymptotic_scaled(SERIES_LIMIT, 1) / (std::f64::consts::TAU * SERIES_LIMIT).sqrt();
        assert!((below / above - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_reference() {
        assert!((bessel_ratio_i1_i0(2.0) - 0.697_774_657_964_008).abs() < 1e-14);
        assert_eq!(bessel_ratio_i1_i0(0.0), 0.0);
        assert!(bessel_ratio_i1_i0(1e4) < 1.0);
        assert!(bessel_i1(-1.0) < 0.0);
    }
}
