use std::f64::consts::TAU;

use torus_cpd::distributions::{sample, DistributionSpec, RngStream};
use torus_cpd::quad::integrate;

const BINS: usize = 36;
const DRAWS: usize = 100_000;
// Upper 0.1% point of chi-square with 35 degrees of freedom.
const CHI2_35_999: f64 = 66.62;

fn chi_square(spec: &DistributionSpec, seed: u64) -> f64 {
    let draws = sample(spec, DRAWS, &RngStream::new(seed, 0)).unwrap();
    let mut counts = [0usize; BINS];
    let width = TAU / BINS as f64;
    for &t in draws.iter() {
        counts[((t / width) as usize).min(BINS - 1)] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let lo = i as f64 * width;
            let p = integrate(|t| spec.pdf(t), lo, lo + width, 1e-12).unwrap();
            let e = p * DRAWS as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn samplers_fit_their_densities() {
    let specs = [
        DistributionSpec::von_mises(0.0, 1.0).unwrap(),
        DistributionSpec::von_mises(2.0, 0.05).unwrap(),
        DistributionSpec::von_mises(5.0, 8.0).unwrap(),
        DistributionSpec::wrapped_cauchy(1.0, 0.5).unwrap(),
        DistributionSpec::wrapped_cauchy(4.0, 0.8).unwrap(),
        DistributionSpec::kato_jones(0.0, 0.0, 0.4, 2.5).unwrap(),
        DistributionSpec::kato_jones(1.0, 2.0, 0.6, 1.0).unwrap(),
    ];
    for (i, spec) in specs.iter().enumerate() {
        let x2 = chi_square(spec, 100 + i as u64);
        assert!(x2 < CHI2_35_999, "{spec:?}: chi-square {x2:.2}");
    }
}
