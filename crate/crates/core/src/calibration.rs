//! Monte Carlo null laws and their empirical quantiles and p-values.
//!
//! * `B∞`: supremum over a grid `i/n` of `B0²(u) / √(u(1−u))` for a discrete
//!   standard Brownian bridge `B0`. The weight matches the one applied to
//!   the CUSUM process, which is what makes these quantiles comparable with
//!   finite-sample SACC and SAGC statistics.
//! * `Δ∞`: supremum of `√[(B1² + B2²) / (u(1−u))]` for two independent
//!   bridges.
//! * `S_n` null: the CVMC statistic on simulated homogeneous samples.
//!
//! Every replicate draws from its own stream, so a sample depends only on
//! its key and never on thread scheduling.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::changepoint::{cvmc_scan, cvmc_statistic, CvmcModel};
use crate::distributions::{derive_seed, DistributionSpec, RngStream, Sampler};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    BInfinity,
    DeltaInfinity,
    SnNull,
}

impl Law {
    pub fn tag(&self) -> &'static str {
        match self {
            Law::BInfinity => "binf",
            Law::DeltaInfinity => "delta",
            Law::SnNull => "sn",
        }
    }

    fn stream_label(&self) -> u64 {
        match self {
            Law::BInfinity => 1,
            Law::DeltaInfinity => 2,
            Law::SnNull => 3,
        }
    }
}

impl std::str::FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binf" | "b_infinity" => Ok(Law::BInfinity),
            "delta" | "delta_infinity" => Ok(Law::DeltaInfinity),
            "sn" | "sn_null" => Ok(Law::SnNull),
            other => Err(Error::InvalidParameter(format!("unknown law `{other}`"))),
        }
    }
}

/// How a calibration sample was produced; carried into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInfo {
    pub law: Law,
    pub grid_size: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_model: Option<DistributionSpec>,
}

/// A sorted Monte Carlo sample from a null law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub law: Law,
    /// Grid size for the bridge laws; series length for `S_n`.
    pub grid_size: usize,
    /// Number of values in `samples`.
    pub replicates: usize,
    pub seed: u64,
    pub null_model: Option<DistributionSpec>,
    /// Replicates dropped as degenerate (only `S_n`).
    pub skipped: usize,
    samples: Vec<f64>,
}

const MIN_GRID: usize = 10;
const MIN_REPLICATES: usize = 100;

fn check_request(grid: usize, replicates: usize) -> Result<()> {
    if grid < MIN_GRID {
        return Err(Error::TooShort {
            needed: MIN_GRID,
            got: grid,
        });
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_REPLICATES} replicates required, got {replicates}"
        )));
    }
    Ok(())
}

impl CalibrationSample {
    /// Wraps precomputed values; sorts them.
    pub fn from_values(
        law: Law,
        grid_size: usize,
        seed: u64,
        null_model: Option<DistributionSpec>,
        mut samples: Vec<f64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("calibration value"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self {
            law,
            grid_size,
            replicates: samples.len(),
            seed,
            null_model,
            skipped: 0,
            samples,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn info(&self) -> CalibrationInfo {
        CalibrationInfo {
            law: self.law,
            grid_size: self.grid_size,
            replicates: self.replicates,
            seed: self.seed,
            null_model: self.null_model,
        }
    }

    /// Empirical `q`-quantile, linear interpolation between order statistics.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        quantile_sorted(&self.samples, q)
    }

    /// `(1 + #{s ≥ observed}) / (m + 1)`.
    pub fn p_value(&self, observed: f64) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let below = self.samples.partition_point(|&s| s < observed);
        Ok(smoothed_p(self.samples.len() - below, self.samples.len()))
    }

    /// Smallest `c` in the sample such that every `observed > c` has
    /// `p_value(observed) < alpha` and every `observed ≤ c` does not.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        let m = self.samples.len();
        if m == 0 {
            return Err(Error::EmptySample);
        }
        // Largest exceedance count K with (1 + K)/(m + 1) < alpha.
        let guess = (alpha * (m + 1) as f64).ceil() as i64 - 2;
        let mut k = guess.clamp(-1, m as i64 - 1);
        while k + 1 < m as i64 && smoothed_p((k + 1) as usize, m) < alpha {
            k += 1;
        }
        while k >= 0 && smoothed_p(k as usize, m) >= alpha {
            k -= 1;
        }
        if k < 0 {
            return Err(Error::InsufficientReplicates { replicates: m, alpha });
        }
        Ok(self.samples[m - k as usize - 1])
    }

    /// Writes the sample as text: one header line, then one value per line.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let model = match &self.null_model {
            Some(spec) => serde_json::to_string(spec).map_err(|e| Error::Io(e.to_string()))?,
            None => "none".into(),
        };
        writeln!(
            w,
            "# law={} grid={} replicates={} seed={} skipped={} model={}",
            self.law.tag(),
            self.grid_size,
            self.replicates,
            self.seed,
            self.skipped,
            model
        )?;
        let mut buf = String::with_capacity(self.samples.len() * 20);
        for v in &self.samples {
            let _ = writeln!(buf, "{v:?}");
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or(Error::Parse { line: 1, message: "empty calibration file".into() })??;
        let fields = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse { line: 1, message: "missing header".into() })?;
        let mut map = HashMap::new();
        for field in fields.split(' ') {
            if let Some((k, v)) = field.split_once('=') {
                map.insert(k.to_string(), v.to_string());
            }
        }
        let get = |key: &str| {
            map.get(key).cloned().ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("header lacks `{key}`"),
            })
        };
        let parse_num = |key: &str| -> Result<u64> {
            get(key)?.parse().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad `{key}` in header"),
            })
        };
        let law: Law = get("law")?.parse()?;
        let grid_size = parse_num("grid")? as usize;
        let replicates = parse_num("replicates")? as usize;
        let seed = parse_num("seed")?;
        let skipped = parse_num("skipped")? as usize;
        let model_text = get("model")?;
        let null_model = if model_text == "none" {
            None
        } else {
            Some(serde_json::from_str(&model_text).map_err(|e| Error::Parse {
                line: 1,
                message: e.to_string(),
            })?)
        };
        let mut samples = Vec::with_capacity(replicates);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            samples.push(t.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: format!("not a number: `{t}`"),
            })?);
        }
        if samples.len() != replicates {
            return Err(Error::Parse {
                line: 1,
                message: format!("header promises {replicates} values, found {}", samples.len()),
            });
        }
        let mut sample = Self::from_values(law, grid_size, seed, null_model, samples)?;
        sample.skipped = skipped;
        Ok(sample)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(BufReader::new(file))
    }
}

fn smoothed_p(exceed: usize, m: usize) -> f64 {
    (1 + exceed) as f64 / (m + 1) as f64
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("quantile level {q} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn bridge<R: Rng>(rng: &mut R, n: usize, out: &mut Vec<f64>) {
    out.clear();
    let scale = 1.0 / (n as f64).sqrt();
    let mut acc = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        acc += z * scale;
        out.push(acc);
    }
    let total = acc;
    for (i, v) in out.iter_mut().enumerate() {
        *v -= (i + 1) as f64 / n as f64 * total;
    }
}

fn weights(n: usize) -> Vec<f64> {
    (1..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            1.0 / (u * (1.0 - u)).sqrt()
        })
        .collect()
}

fn replicate_streams(law: Law, grid: usize, seed: u64) -> u64 {
    derive_seed(seed, &[law.stream_label(), grid as u64])
}

/// Simulates the `B∞` law on the grid `i/n`.
pub fn simulate_b_infinity(grid_size: usize, replicates: usize, seed: u64) -> Result<CalibrationSample> {
    check_request(grid_size, replicates)?;
    let base = replicate_streams(Law::BInfinity, grid_size, seed);
    let w = weights(grid_size);
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(grid_size),
            |buf, r| {
                let mut rng = RngStream::new(base, r as u64).rng();
                bridge(&mut rng, grid_size, buf);
                buf[..grid_size - 1]
                    .iter()
                    .zip(&w)
                    .map(|(b, w)| b * b * w)
                    .fold(0.0, f64::max)
            },
        )
        .collect();
    CalibrationSample::from_values(Law::BInfinity, grid_size, seed, None, values)
}

/// Simulates `Δ∞` from pairs of independent bridges.
pub fn simulate_delta_infinity(grid_size: usize, replicates: usize, seed: u64) -> Result<CalibrationSample> {
    check_request(grid_size, replicates)?;
    let base = replicate_streams(Law::DeltaInfinity, grid_size, seed);
    let w = weights(grid_size);
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map_init(
            || (Vec::with_capacity(grid_size), Vec::with_capacity(grid_size)),
            |(b1, b2), r| {
                let mut rng = RngStream::new(base, r as u64).rng();
                bridge(&mut rng, grid_size, b1);
                bridge(&mut rng, grid_size, b2);
                (0..grid_size - 1)
                    .map(|i| ((b1[i] * b1[i] + b2[i] * b2[i]) * w[i] * w[i]).sqrt())
                    .fold(0.0, f64::max)
            },
        )
        .collect();
    CalibrationSample::from_values(Law::DeltaInfinity, grid_size, seed, None, values)
}

/// Null distribution of the CVMC statistic: homogeneous samples of length
/// `n` from `null_model`, scored with the concentration of `null_model`.
/// Degenerate replicates are dropped and counted.
pub fn simulate_sn_null(
    n: usize,
    null_model: &DistributionSpec,
    replicates: usize,
    seed: u64,
) -> Result<CalibrationSample> {
    check_request(n, replicates)?;
    let model = CvmcModel::from_distribution(null_model)?;
    let base = derive_seed(seed, &[Law::SnNull.stream_label(), n as u64]);
    let sampler = Sampler::new(*null_model);
    let values: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf, r| {
                let mut rng = RngStream::new(base, r as u64).rng();
                buf.clear();
                sampler.fill(&mut rng, n, buf);
                let scan = cvmc_scan(buf).ok()?;
                cvmc_statistic(buf, &scan, &model).ok()
            },
        )
        .collect();
    let skipped = values.iter().filter(|v| v.is_none()).count();
    let kept: Vec<f64> = values.into_iter().flatten().collect();
    let mut sample = CalibrationSample::from_values(Law::SnNull, n, seed, Some(*null_model), kept)?;
    sample.skipped = skipped;
    Ok(sample)
}

/// Everything that determines a calibration sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationKey {
    pub law: Law,
    pub grid_size: usize,
    pub replicates: usize,
    pub seed: u64,
    pub null_model: Option<DistributionSpec>,
}

impl CalibrationKey {
    pub fn b_infinity(grid_size: usize, replicates: usize, seed: u64) -> Self {
        Self {
            law: Law::BInfinity,
            grid_size,
            replicates,
            seed,
            null_model: None,
        }
    }

    pub fn sn_null(n: usize, null_model: DistributionSpec, replicates: usize, seed: u64) -> Self {
        Self {
            law: Law::SnNull,
            grid_size: n,
            replicates,
            seed,
            null_model: Some(null_model.with_location(0.0)),
        }
    }

    /// Cache file name, unique per key.
    pub fn file_name(&self) -> String {
        let model = match self.null_model {
            None => String::new(),
            Some(DistributionSpec::VonMises { kappa, .. }) => format!("_vm{kappa:?}"),
            Some(DistributionSpec::WrappedCauchy { rho, .. }) => format!("_wc{rho:?}"),
            Some(DistributionSpec::KatoJones { nu, rho, kappa, .. }) => {
                format!("_kj{nu:?}-{rho:?}-{kappa:?}")
            }
        };
        format!(
            "{}{}_g{}_r{}_s{}.txt",
            self.law.tag(),
            model,
            self.grid_size,
            self.replicates,
            self.seed
        )
    }

    pub fn simulate(&self) -> Result<CalibrationSample> {
        match self.law {
            Law::BInfinity => simulate_b_infinity(self.grid_size, self.replicates, self.seed),
            Law::DeltaInfinity => simulate_delta_infinity(self.grid_size, self.replicates, self.seed),
            Law::SnNull => {
                let model = self.null_model.ok_or_else(|| {
                    Error::InvalidParameter("S_n calibration needs a null model".into())
                })?;
                simulate_sn_null(self.grid_size, &model, self.replicates, self.seed)
            }
        }
    }
}

/// Memoizes calibration samples in memory and, optionally, on disk.
#[derive(Debug, Default)]
pub struct CalibrationStore {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Arc<CalibrationSample>>>,
}

impl CalibrationStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Cache rooted at `dir`; files are read when present and written after
    /// every fresh simulation.
    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            memory: Mutex::default(),
        }
    }

    pub fn path_for(&self, key: &CalibrationKey) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(key.file_name()))
    }

    pub fn get(&self, key: &CalibrationKey) -> Result<Arc<CalibrationSample>> {
        let name = key.file_name();
        if let Some(hit) = self.memory.lock().expect("calibration cache poisoned").get(&name) {
            return Ok(Arc::clone(hit));
        }
        let sample = match self.path_for(key) {
            Some(path) if path.exists() => CalibrationSample::load(&path)?,
            Some(path) => {
                let s = key.simulate()?;
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                s.save(&path)?;
                s
            }
            None => key.simulate()?,
        };
        let sample = Arc::new(sample);
        self.memory
            .lock()
            .expect("calibration cache poisoned")
            .entry(name)
            .or_insert_with(|| Arc::clone(&sample));
        Ok(sample)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(values: &[f64]) -> CalibrationSample {
        CalibrationSample::from_values(Law::BInfinity, 10, 0, None, values.to_vec()).unwrap()
    }

    #[test]
    fn quantile_and_p_value_examples() {
        let s = sample(&[4.0, 2.0, 3.0, 1.0]);
        assert_eq!(s.quantile(0.5).unwrap(), 2.5);
        assert_eq!(s.quantile(0.0).unwrap(), 1.0);
        assert_eq!(s.quantile(1.0).unwrap(), 4.0);
        assert_eq!(s.p_value(0.5).unwrap(), 1.0);
        assert_eq!(s.p_value(10.0).unwrap(), 1.0 / 5.0);
        assert_eq!(s.p_value(3.0).unwrap(), 3.0 / 5.0);
        assert!(CalibrationSample::from_values(Law::BInfinity, 10, 0, None, vec![]).is_err());
        assert!(quantile_sorted(&[], 0.5).is_err());
    }

    #[test]
    fn critical_value_agrees_with_p_value() {
        let values: Vec<f64> = (0..999).map(|i| (i as f64 * 0.618).fract() * 7.0).collect();
        let s = sample(&values);
        for &alpha in &[0.01, 0.05, 0.1, 0.2, 0.5] {
            let c = s.critical_value(alpha).unwrap();
            for &v in s.samples() {
                for obs in [v, v + 1e-9, v - 1e-9] {
                    assert_eq!(obs > c, s.p_value(obs).unwrap() < alpha, "alpha={alpha} obs={obs}");
                }
            }
        }
        let tiny = sample(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            tiny.critical_value(0.05),
            Err(Error::InsufficientReplicates { .. })
        ));
    }

    #[test]
    fn rejects_small_requests() {
        assert!(simulate_b_infinity(5, 1000, 1).is_err());
        assert!(simulate_b_infinity(50, 10, 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = simulate_b_infinity(20, 150, 4).unwrap();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = CalibrationSample::read_from(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(s, back);

        let spec = DistributionSpec::wrapped_cauchy(0.0, 0.5).unwrap();
        let sn = simulate_sn_null(20, &spec, 120, 2).unwrap();
        let mut buf = Vec::new();
        sn.write_to(&mut buf).unwrap();
        let back = CalibrationSample::read_from(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(sn, back);
    }

    #[test]
    fn malformed_cache_files() {
        let bad = "# law=binf grid=10 replicates=2 seed=1 skipped=0 model=none\n1.0\nabc\n";
        assert!(matches!(
            CalibrationSample::read_from(std::io::Cursor::new(bad)),
            Err(Error::Parse { line: 3, .. })
        ));
        let short = "# law=binf grid=10 replicates=3 seed=1 skipped=0 model=none\n1.0\n";
        assert!(CalibrationSample::read_from(std::io::Cursor::new(short)).is_err());
    }

    #[test]
    fn key_file_names_are_distinct() {
        let a = CalibrationKey::b_infinity(258, 5000, 1);
        let b = CalibrationKey::b_infinity(258, 5000, 2);
        let c = CalibrationKey::sn_null(258, DistributionSpec::von_mises(1.0, 1.5).unwrap(), 5000, 1);
        assert_eq!(a.file_name(), "binf_g258_r5000_s1.txt");
        assert_ne!(a.file_name(), b.file_name());
        assert_eq!(c.file_name(), "sn_vm1.5_g258_r5000_s1.txt");
        // Location does not enter the key.
        let d = CalibrationKey::sn_null(258, DistributionSpec::von_mises(0.0, 1.5).unwrap(), 5000, 1);
        assert_eq!(c, d);
    }
}
