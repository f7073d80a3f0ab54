//! Simulation studies: empirical power of the three tests and regeneration
//! of the published null cutoff tables.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    simulate_b_infinity, simulate_sn_null, CalibrationKey, CalibrationSample, CalibrationStore,
};
use crate::changepoint::{statistic, CvmcModel, Method};
use crate::distributions::{derive_seed, DistributionSpec, RngStream, Sampler};
use crate::error::{Error, Result};

const POWER_STREAM: u64 = 0x504f_5752;
const NULL_STREAM: u64 = 0x4e55_4c4c;

/// One alternative: its abscissa on the power curve and the law of the
/// second segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H1Point {
    pub x: f64,
    pub distribution: DistributionSpec,
}

impl H1Point {
    pub fn new(x: f64, distribution: DistributionSpec) -> Self {
        Self { x, distribution }
    }
}

fn default_alphas() -> Vec<f64> {
    vec![0.01, 0.05]
}

fn default_calibration_replicates() -> usize {
    5000
}

/// Two-segment power study: observations `1..=k*` follow `null`, the rest
/// follow each alternative in turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudySpec {
    pub method: Method,
    pub n: usize,
    /// Last observation of the first segment; `n / 2` when absent.
    #[serde(default)]
    pub changepoint: Option<usize>,
    pub null: DistributionSpec,
    pub alternatives: Vec<H1Point>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_calibration_replicates")]
    pub calibration_replicates: usize,
    /// Calibration seed; the master seed when absent.
    #[serde(default)]
    pub calibration_seed: Option<u64>,
    /// SACC: center on the null location instead of the sample mean.
    #[serde(default)]
    pub known_mean: bool,
    /// CVMC scoring model; derived from `null` when absent.
    #[serde(default)]
    pub cvmc_model: Option<CvmcModel>,
}

impl PowerStudySpec {
    pub fn new(method: Method, n: usize, null: DistributionSpec, alternatives: Vec<H1Point>) -> Self {
        Self {
            method,
            n,
            changepoint: None,
            null,
            alternatives,
            alphas: default_alphas(),
            replicates: 1000,
            seed: 1,
            calibration_replicates: default_calibration_replicates(),
            calibration_seed: None,
            known_mean: false,
            cvmc_model: None,
        }
    }

    pub fn changepoint(&self) -> usize {
        self.changepoint.unwrap_or(self.n / 2)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.changepoint();
        if k < 1 || k >= self.n {
            return Err(Error::InvalidParameter(format!(
                "changepoint must lie in 1..={}, got {k}",
                self.n.saturating_sub(1)
            )));
        }
        if self.alternatives.is_empty() || self.alphas.is_empty() {
            return Err(Error::InvalidParameter("empty H1 grid or alpha list".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {a}")));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be positive".into()));
        }
        Ok(())
    }

    fn scoring_model(&self) -> Result<Option<CvmcModel>> {
        match (self.method, self.cvmc_model) {
            (Method::Cvmc, Some(m)) => Ok(Some(m)),
            (Method::Cvmc, None) => CvmcModel::from_distribution(&self.null).map(Some),
            _ => Ok(None),
        }
    }

    fn calibration_key(&self, model: Option<&CvmcModel>) -> Result<CalibrationKey> {
        let seed = self.calibration_seed.unwrap_or(self.seed);
        Ok(match model {
            Some(m) => CalibrationKey::sn_null(self.n, m.distribution(0.0)?, self.calibration_replicates, seed),
            None => CalibrationKey::b_infinity(self.n, self.calibration_replicates, seed),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub x: f64,
    pub alpha: f64,
    pub power: f64,
    pub replicates: usize,
    /// Replicates whose statistic was undefined; counted as non-rejections.
    pub errors: usize,
}

/// Monte Carlo power at every H1 point and level.
pub fn run_power_study(spec: &PowerStudySpec, store: &CalibrationStore) -> Result<Vec<PowerRow>> {
    spec.validate()?;
    let model = spec.scoring_model()?;
    let null = store.get(&spec.calibration_key(model.as_ref())?)?;
    let cutoffs = spec
        .alphas
        .iter()
        .map(|&a| null.critical_value(a))
        .collect::<Result<Vec<_>>>()?;
    let mu = (spec.method == Method::Sacc && spec.known_mean).then(|| spec.null.location());
    let k = spec.changepoint();
    let first = Sampler::new(spec.null);

    let mut rows = Vec::with_capacity(spec.alternatives.len() * spec.alphas.len());
    for (j, point) in spec.alternatives.iter().enumerate() {
        let base = derive_seed(spec.seed, &[POWER_STREAM, j as u64]);
        let second = Sampler::new(point.distribution);
        let stats: Vec<Option<f64>> = (0..spec.replicates)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(spec.n),
                |buf, r| {
                    let mut rng = RngStream::new(base, r as u64).rng();
                    buf.clear();
                    first.fill(&mut rng, k, buf);
                    second.fill(&mut rng, spec.n - k, buf);
                    statistic(spec.method, buf, mu, model.as_ref()).ok().map(|s| s.0)
                },
            )
            .collect();
        let errors = stats.iter().filter(|s| s.is_none()).count();
        for (&alpha, &cut) in spec.alphas.iter().zip(&cutoffs) {
            let rejected = stats.iter().flatten().filter(|&&s| s > cut).count();
            rows.push(PowerRow {
                x: point.x,
                alpha,
                power: rejected as f64 / spec.replicates as f64,
                replicates: spec.replicates,
                errors,
            });
        }
    }
    Ok(rows)
}

/// `k` equispaced points from `lo` to `hi` inclusive.
pub fn equispaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect(),
    }
}

pub fn write_power_csv<W: Write>(rows: &[PowerRow], mut w: W) -> Result<()> {
    writeln!(w, "x,alpha,power,replicates,errors")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.x, r.alpha, r.power, r.replicates, r.errors)?;
    }
    Ok(())
}

/// Null sample of a test statistic on homogeneous data of length `n`.
/// Undefined statistics are dropped; the second value counts them.
pub fn simulate_null_statistic(
    method: Method,
    n: usize,
    law: &DistributionSpec,
    known_mean: Option<f64>,
    model: Option<&CvmcModel>,
    replicates: usize,
    seed: u64,
) -> (Vec<f64>, usize) {
    let base = derive_seed(seed, &[NULL_STREAM, method as u64, n as u64]);
    let sampler = Sampler::new(*law);
    let stats: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf, r| {
                let mut rng = RngStream::new(base, r as u64).rng();
                buf.clear();
                sampler.fill(&mut rng, n, buf);
                statistic(method, buf, known_mean, model).ok().map(|s| s.0)
            },
        )
        .collect();
    let skipped = stats.iter().filter(|s| s.is_none()).count();
    (stats.into_iter().flatten().collect(), skipped)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Standard error of the empirical `q`-quantile, from the spacing of the
/// order statistics `±√(m q (1−q))` places away.
pub fn quantile_standard_error(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m < 2 {
        return f64::INFINITY;
    }
    let d = (m as f64 * q * (1.0 - q)).sqrt().ceil() as usize;
    let j = ((q * m as f64).round() as usize).min(m - 1);
    let lo = j.saturating_sub(d);
    let hi = (j + d).min(m - 1);
    (sorted[hi] - sorted[lo]) / 2.0
}

pub const TABLE_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffTable {
    /// SACC, von Mises nulls and `B∞` rows, n ∈ {50, 100, 200, 500, 1000}.
    T1,
    /// CVMC, von Mises, n = 500, three locations.
    T2,
    /// CVMC, von Mises, μ = 0, n ∈ {50, 100, 200}.
    T3,
    /// CVMC, wrapped Cauchy, n = 500, three locations.
    T4,
}

impl std::str::FromStr for CutoffTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" | "1" => Ok(CutoffTable::T1),
            "t2" | "2" => Ok(CutoffTable::T2),
            "t3" | "3" => Ok(CutoffTable::T3),
            "t4" | "4" => Ok(CutoffTable::T4),
            other => Err(Error::InvalidParameter(format!("unknown table `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum RowSource {
    VonMises { kappa: f64 },
    WrappedCauchy { rho: f64 },
    BInfinity,
}

/// One published row: three cutoffs at [`TABLE_LEVELS`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperRow {
    pub table: CutoffTable,
    pub n: usize,
    pub mu: f64,
    pub source: RowSource,
    pub quantiles: [f64; 3],
}

impl PaperRow {
    pub fn label(&self) -> String {
        let mu = match self.mu {
            m if m == 0.0 => "0".to_string(),
            m if m == FRAC_PI_2 => "pi/2".to_string(),
            m if m == PI => "pi".to_string(),
            m => format!("{m}"),
        };
        match self.source {
            RowSource::VonMises { kappa } => format!("n={} kappa={kappa} mu={mu}", self.n),
            RowSource::WrappedCauchy { rho } => format!("n={} rho={rho} mu={mu}", self.n),
            RowSource::BInfinity => format!("B_inf grid={}", self.n),
        }
    }

    fn parameter(&self) -> Option<f64> {
        match self.source {
            RowSource::VonMises { kappa } => Some(kappa),
            RowSource::WrappedCauchy { rho } => Some(rho),
            RowSource::BInfinity => None,
        }
    }
}

macro_rules! rows {
    ($table:ident, $n:expr, $mu:expr, $src:ident { $field:ident }, [$($p:expr => [$a:expr, $b:expr, $c:expr]),* $(,)?]) => {
        [$(PaperRow {
            table: CutoffTable::$table,
            n: $n,
            mu: $mu,
            source: RowSource::$src { $field: $p },
            quantiles: [$a, $b, $c],
        }),*]
    };
}

const fn binf(n: usize, quantiles: [f64; 3]) -> PaperRow {
    PaperRow {
        table: CutoffTable::T1,
        n,
        mu: 0.0,
        source: RowSource::BInfinity,
        quantiles,
    }
}

/// Every published cutoff row of `table`.
pub fn paper_rows(table: CutoffTable) -> Vec<PaperRow> {
    let mut out = Vec::new();
    match table {
        CutoffTable::T1 => {
            out.extend(rows!(T1, 50, 0.0, VonMises { kappa }, [
                0.5 => [2.8664, 3.5570, 5.1797],
                1.0 => [2.8852, 3.4706, 4.9647],
                1.5 => [2.9324, 3.4908, 5.1092],
                2.0 => [2.9059, 3.5290, 4.9475],
                4.0 => [2.9876, 3.6723, 5.2044],
                10.0 => [3.0115, 3.6687, 5.1525],
            ]));
            out.push(binf(50, [2.8967, 3.5376, 5.0784]));
            out.extend(rows!(T1, 100, 0.0, VonMises { kappa }, [
                0.5 => [2.9655, 3.6087, 5.0154],
                1.0 => [2.9998, 3.6626, 5.1375],
                1.5 => [2.9601, 3.5823, 5.0707],
                2.0 => [3.0054, 3.6686, 5.1957],
                4.0 => [3.1320, 3.8628, 5.4352],
                10.0 => [3.0528, 3.7376, 5.1318],
            ]));
            out.push(binf(100, [2.9987, 3.6939, 5.2307]));
            out.extend(rows!(T1, 200, 0.0, VonMises { kappa }, [
                0.5 => [3.0294, 3.6653, 5.1041],
                1.0 => [3.0619, 3.7477, 5.3283],
                1.5 => [3.0533, 3.7104, 5.0903],
                2.0 => [3.1221, 3.8160, 5.5242],
                4.0 => [3.1010, 3.8392, 5.1764],
                10.0 => [3.1391, 3.8052, 5.3281],
            ]));
            out.push(binf(200, [3.0353, 3.6733, 5.2212]));
            out.extend(rows!(T1, 500, 0.0, VonMises { kappa }, [
                0.5 => [3.1820, 3.8620, 5.3930],
                1.0 => [3.1469, 3.9033, 5.7212],
                1.5 => [3.2189, 3.8676, 5.4404],
                2.0 => [3.1148, 3.8149, 5.5284],
                4.0 => [3.0986, 3.8050, 5.3250],
                10.0 => [3.1611, 3.8389, 5.4520],
            ]));
            out.push(binf(500, [3.2224, 3.9021, 5.7649]));
            out.extend(rows!(T1, 1000, 0.0, VonMises { kappa }, [
                0.5 => [3.2093, 3.9429, 5.5770],
                1.0 => [3.2860, 3.9551, 5.5877],
                1.5 => [3.2012, 3.9068, 5.7190],
                2.0 => [3.2164, 3.9404, 5.4612],
                4.0 => [3.1152, 3.8271, 5.4818],
                10.0 => [3.2164, 3.9404, 5.4612],
            ]));
            out.push(binf(1000, [3.2173, 3.8994, 5.3781]));
        }
        CutoffTable::T2 => {
            for (kappa, by_mu) in [
                (0.5, [[8.5456, 10.0233, 13.8042], [8.5492, 10.0849, 13.7622], [8.5860, 10.0583, 13.5162]]),
                (1.0, [[8.8183, 10.2612, 13.0927], [8.6837, 10.2731, 13.5921], [8.8742, 10.2840, 13.8020]]),
                (1.5, [[8.9328, 10.5176, 13.9789], [9.2186, 10.7631, 13.5326], [9.0382, 10.5016, 14.3562]]),
            ] {
                for (mu, q) in [0.0, FRAC_PI_2, PI].into_iter().zip(by_mu) {
                    out.push(PaperRow {
                        table: CutoffTable::T2,
                        n: 500,
                        mu,
                        source: RowSource::VonMises { kappa },
                        quantiles: q,
                    });
                }
            }
        }
        CutoffTable::T3 => {
            out.extend(rows!(T3, 50, 0.0, VonMises { kappa }, [
                0.5 => [6.5722, 7.8637, 10.2533],
                1.0 => [7.5233, 8.9762, 12.0100],
                1.5 => [7.6742, 9.1220, 12.2159],
                2.0 => [7.4798, 8.9543, 12.5480],
                4.0 => [7.2877, 8.8327, 12.3680],
                10.0 => [7.0852, 8.6129, 11.9444],
            ]));
            out.extend(rows!(T3, 100, 0.0, VonMises { kappa }, [
                0.5 => [7.4101, 8.8300, 12.5361],
                1.0 => [8.0260, 9.5321, 12.8955],
                1.5 => [8.2939, 9.7830, 12.9363],
                2.0 => [8.1398, 9.6036, 13.2454],
                4.0 => [7.7705, 9.2947, 13.0220],
                10.0 => [7.7706, 9.4081, 13.0166],
            ]));
            out.extend(rows!(T3, 200, 0.0, VonMises { kappa }, [
                0.5 => [8.0906, 9.5555, 12.9020],
                1.0 => [8.3988, 9.9724, 13.3396],
                1.5 => [8.4884, 10.0626, 13.0109],
                2.0 => [8.5996, 10.0631, 13.1336],
                4.0 => [8.3216, 9.7448, 13.3388],
                10.0 => [8.2707, 9.8393, 13.0018],
            ]));
        }
        CutoffTable::T4 => {
            for (rho, by_mu) in [
                (0.3, [[8.5028, 9.9692, 12.5997], [8.5091, 10.0022, 13.3221], [8.6932, 10.0872, 13.2863]]),
                (0.5, [[8.5504, 10.0791, 13.5735], [8.3479, 9.9118, 13.2359], [8.4932, 10.1220, 13.9901]]),
                (0.8, [[5.9095, 8.4464, 13.0573], [5.6248, 8.2641, 12.7238], [5.7724, 8.1428, 12.9080]]),
            ] {
                for (mu, q) in [0.0, FRAC_PI_2, PI].into_iter().zip(by_mu) {
                    out.push(PaperRow {
                        table: CutoffTable::T4,
                        n: 500,
                        mu,
                        source: RowSource::WrappedCauchy { rho },
                        quantiles: q,
                    });
                }
            }
        }
    }
    out
}

/// Selects rows of a table; `None` fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellFilter {
    #[serde(default)]
    pub n: Option<usize>,
    /// κ or ρ; never matches `B∞` rows when set.
    #[serde(default)]
    pub parameter: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    /// Include `B∞` rows (table 1 only).
    #[serde(default = "yes")]
    pub b_infinity: bool,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
}

fn yes() -> bool {
    true
}

impl CellFilter {
    pub fn all() -> Self {
        Self {
            b_infinity: true,
            ..Self::default()
        }
    }

    fn matches(&self, row: &PaperRow) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        self.n.is_none_or(|n| n == row.n)
            && self.mu.is_none_or(|m| close(m, row.mu))
            && match row.parameter() {
                Some(p) => self.parameter.is_none_or(|q| close(p, q)),
                None => self.b_infinity && self.parameter.is_none(),
            }
    }

    fn wants_level(&self, level: f64) -> bool {
        self.levels
            .as_ref()
            .is_none_or(|ls| ls.iter().any(|l| (l - level).abs() < 1e-9))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub table: CutoffTable,
    pub row: String,
    pub level: f64,
    pub paper: f64,
    pub reproduced: f64,
    pub gap: f64,
    /// `3·√2·SE`: both values are Monte Carlo estimates of similar size.
    pub tolerance: f64,
    pub pass: bool,
}

/// Regenerates the selected cells of `table` and compares them with the
/// published values.
pub fn reproduce_cutoff_table(
    table: CutoffTable,
    replicates: usize,
    seed: u64,
    filter: &CellFilter,
) -> Result<Vec<CellComparison>> {
    if replicates < 2000 {
        return Err(Error::InvalidParameter(format!(
            "table reproduction needs at least 2000 replicates, got {replicates}"
        )));
    }
    let mut out = Vec::new();
    for row in paper_rows(table).into_iter().filter(|r| filter.matches(r)) {
        let sample = reproduce_row(&row, replicates, seed)?;
        let sorted = sample.samples();
        for (&level, &paper) in TABLE_LEVELS.iter().zip(&row.quantiles) {
            if !filter.wants_level(level) {
                continue;
            }
            let reproduced = sample.quantile(level)?;
            let tolerance = 3.0 * std::f64::consts::SQRT_2 * quantile_standard_error(sorted, level);
            let gap = (reproduced - paper).abs();
            out.push(CellComparison {
                table,
                row: row.label(),
                level,
                paper,
                reproduced,
                gap,
                tolerance,
                pass: gap <= tolerance,
            });
        }
    }
    Ok(out)
}

/// The null sample behind one published row.
pub fn reproduce_row(row: &PaperRow, replicates: usize, seed: u64) -> Result<CalibrationSample> {
    match (row.table, row.source) {
        (_, RowSource::BInfinity) => simulate_b_infinity(row.n, replicates, seed),
        (CutoffTable::T1, RowSource::VonMises { kappa }) => {
            let law = DistributionSpec::von_mises(row.mu, kappa)?;
            let (values, skipped) =
                simulate_null_statistic(Method::Sacc, row.n, &law, Some(row.mu), None, replicates, seed);
            let mut s = CalibrationSample::from_values(
                crate::calibration::Law::BInfinity,
                row.n,
                seed,
                Some(law),
                values,
            )?;
            s.skipped = skipped;
            Ok(s)
        }
        (_, RowSource::VonMises { kappa }) => {
            simulate_sn_null(row.n, &DistributionSpec::von_mises(row.mu, kappa)?, replicates, seed)
        }
        (_, RowSource::WrappedCauchy { rho }) => {
            simulate_sn_null(row.n, &DistributionSpec::wrapped_cauchy(row.mu, rho)?, replicates, seed)
        }
    }
}

/// A table-reproduction job as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStudySpec {
    pub table: CutoffTable,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "CellFilter::all")]
    pub filter: CellFilter,
}

/// Config file for the `simulate` command: `{"power": {...}}` or
/// `{"table": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationConfig {
    Power(PowerStudySpec),
    Table(TableStudySpec),
}

pub fn write_comparison_csv<W: Write>(rows: &[CellComparison], mut w: W) -> Result<()> {
    writeln!(w, "table,row,level,paper,reproduced,gap,tolerance,pass")?;
    for r in rows {
        writeln!(
            w,
            "{:?},\"{}\",{},{},{:.4},{:.4},{:.4},{}",
            r.table, r.row, r.level, r.paper, r.reproduced, r.gap, r.tolerance, r.pass
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        assert_eq!(paper_rows(CutoffTable::T1).len(), 35);
        assert_eq!(paper_rows(CutoffTable::T2).len(), 9);
        assert_eq!(paper_rows(CutoffTable::T3).len(), 18);
        assert_eq!(paper_rows(CutoffTable::T4).len(), 9);
        for t in [CutoffTable::T1, CutoffTable::T2, CutoffTable::T3, CutoffTable::T4] {
            for r in paper_rows(t) {
                assert!(r.quantiles[0] < r.quantiles[1] && r.quantiles[1] < r.quantiles[2], "{r:?}");
            }
        }
    }

    #[test]
    fn spot_cells() {
        let t2 = paper_rows(CutoffTable::T2);
        let cell = t2
            .iter()
            .find(|r| r.mu == PI && r.source == RowSource::VonMises { kappa: 0.5 })
            .unwrap();
        assert_eq!(cell.quantiles[0], 8.5860);
        let t4 = paper_rows(CutoffTable::T4);
        let cell = t4
            .iter()
            .find(|r| r.mu == 0.0 && r.source == RowSource::WrappedCauchy { rho: 0.8 })
            .unwrap();
        assert_eq!(cell.quantiles[1], 8.4464);
    }

    #[test]
    fn filter_selects_cells() {
        let f = CellFilter {
            n: Some(1000),
            parameter: Some(1.0),
            ..CellFilter::all()
        };
        let rows: Vec<_> = paper_rows(CutoffTable::T1).into_iter().filter(|r| f.matches(r)).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].quantiles, [3.2860, 3.9551, 5.5877]);
        let f = CellFilter {
            n: Some(1000),
            ..CellFilter::all()
        };
        assert_eq!(paper_rows(CutoffTable::T1).iter().filter(|r| f.matches(r)).count(), 7);
    }

    #[test]
    fn ks_distance_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((ks_distance(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equispaced_grid() {
        assert_eq!(equispaced(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(equispaced(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn power_study_validation_and_shape() {
        let null = DistributionSpec::von_mises(0.0, 2.0).unwrap();
        let mut spec = PowerStudySpec::new(
            Method::Sacc,
            60,
            null,
            vec![
                H1Point::new(2.0, null),
                H1Point::new(0.2, DistributionSpec::von_mises(0.0, 0.2).unwrap()),
            ],
        );
        spec.replicates = 200;
        spec.calibration_replicates = 500;
        spec.known_mean = true;
        let store = CalibrationStore::in_memory();
        let rows = run_power_study(&spec, &store).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[3].power > rows[1].power);
        assert_eq!(rows, run_power_study(&spec, &store).unwrap());
        let mut csv = Vec::new();
        write_power_csv(&rows, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5);

        spec.changepoint = Some(60);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn simulation_config_json() {
        let cfg: SimulationConfig = serde_json::from_str(
            r#"{"table": {"table": "t2", "replicates": 2000, "seed": 3, "filter": {"parameter": 1.0}}}"#,
        )
        .unwrap();
        match cfg {
            SimulationConfig::Table(t) => {
                assert_eq!(t.table, CutoffTable::T2);
                assert!(t.filter.b_infinity);
                assert_eq!(t.filter.parameter, Some(1.0));
            }
            other => panic!("{other:?}"),
        }
        let cfg: SimulationConfig = serde_json::from_str(
            r#"{"power": {"method": "sacc", "n": 100, "replicates": 50, "seed": 1,
                "null": {"family": "von_mises", "mu": 0.0, "kappa": 2.5},
                "alternatives": [{"x": 1.0, "distribution": {"family": "von_mises", "mu": 0.0, "kappa": 1.0}}]}}"#,
        )
        .unwrap();
        let SimulationConfig::Power(p) = cfg else { panic!() };
        assert_eq!(p.alphas, vec![0.01, 0.05]);
        assert_eq!(p.changepoint(), 50);
    }

    #[test]
    fn reproduction_requires_replicates() {
        assert!(reproduce_cutoff_table(CutoffTable::T1, 100, 1, &CellFilter::all()).is_err());
    }
}
