use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use torus_cpd::changepoint::{cvmc_test, sacc_test, sagc_test};
use torus_cpd::circular::ConcentrationMeasure;
use torus_cpd::harness::{
    reproduce_cutoff_table, run_power_study, write_comparison_csv, write_power_csv, SimulationConfig,
};
use torus_cpd::io::{
    circular_temporal_svg, emit_report, load_angles, parse_report, AngleUnit, Column, Format,
    IngestSpec, PlotSpec, RangeConvention, Report, SegmentationReport,
};
use torus_cpd::segmentation::{binary_segment, CvmcSettings};
use torus_cpd::{
    CalibrationKey, CalibrationStore, CvmcFamily, CvmcModel, Error, Law, Method, SegmentTree,
    SegmentationConfig,
};

#[derive(Parser)]
#[command(name = "torus-cpd", version, about = "Changepoint tests for angular time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one changepoint test on a series.
    Test(TestArgs),
    /// Find multiple changepoints by binary segmentation.
    Segment(SegmentArgs),
    /// Simulate a null law and store it in the calibration cache.
    Calibrate(CalibrateArgs),
    /// Run a power study or cutoff-table reproduction from a JSON config.
    Simulate(SimulateArgs),
    /// Draw the circular temporal plot as SVG.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sacc,
    Cvmc,
    Sagc,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sacc => Method::Sacc,
            MethodArg::Cvmc => Method::Cvmc,
            MethodArg::Sagc => Method::Sagc,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Degrees,
    Radians,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    #[value(name = "zero_to_2pi")]
    ZeroToTwoPi,
    #[value(name = "minus_pi_to_pi")]
    MinusPiToPi,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(alias = "vm")]
    VonMises,
    #[value(alias = "wc")]
    WrappedCauchy,
}

impl From<FamilyArg> for CvmcFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::VonMises => CvmcFamily::VonMises,
            FamilyArg::WrappedCauchy => CvmcFamily::WrappedCauchy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    /// Mean resultant length.
    Rbar,
    /// Von Mises kappa estimate.
    Kappa,
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Binf,
    Delta,
    Sn,
}

#[derive(Args)]
struct InputArgs {
    /// Angle file: one value per line, or a delimited table with --column.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "radians")]
    unit: UnitArg,
    #[arg(long, value_enum, default_value = "zero_to_2pi")]
    range: RangeArg,
    /// Column index (0-based) or header name.
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Skip the first non-comment line.
    #[arg(long)]
    header: bool,
}

impl InputArgs {
    fn spec(&self) -> IngestSpec {
        IngestSpec {
            path: self.input.clone(),
            unit: match self.unit {
                UnitArg::Degrees => AngleUnit::Degrees,
                UnitArg::Radians => AngleUnit::Radians,
            },
            range: match self.range {
                RangeArg::ZeroToTwoPi => RangeConvention::ZeroToTwoPi,
                RangeArg::MinusPiToPi => RangeConvention::MinusPiToPi,
            },
            column: self.column.as_ref().map(|c| match c.parse() {
                Ok(i) => Column::Index(i),
                Err(_) => Column::Name(c.clone()),
            }),
            delimiter: self.delimiter,
            header: self.header,
        }
    }
}

#[derive(Args)]
struct CommonTestArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// SACC: known mean direction, in the input unit.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// CVMC family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// CVMC concentration (kappa or rho); estimated from the data if omitted.
    #[arg(long)]
    concentration: Option<f64>,
    /// Monte Carlo replicates for the null law.
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Calibration cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Write here instead of standard output.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    common: CommonTestArgs,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    common: CommonTestArgs,
    /// Ranges shorter than this are not tested.
    #[arg(long = "min-seg", default_value_t = 5)]
    min_seg: usize,
    #[arg(long, value_enum, default_value = "rbar")]
    measure: MeasureArg,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_enum)]
    law: LawArg,
    /// Grid size (series length for the S_n law).
    #[arg(long)]
    grid: usize,
    #[arg(long, default_value_t = 5000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// S_n law: null family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// S_n law: null concentration.
    #[arg(long)]
    concentration: Option<f64>,
    #[arg(long, default_value = "calibration-cache")]
    cache: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file holding {"power": {...}} or {"table": {...}}.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    cache: Option<PathBuf>,
    /// CSV output; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    /// JSON written by `segment`.
    #[arg(long)]
    segmentation: Option<PathBuf>,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, default_value_t = 200.0)]
    radius: f64,
    #[arg(long)]
    no_circles: bool,
    #[arg(long)]
    no_means: bool,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InsufficientReplicates { .. }
            | Error::UnsupportedFamily(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn store(cache: &Option<PathBuf>) -> CalibrationStore {
    match cache {
        Some(dir) => CalibrationStore::with_dir(dir),
        None => CalibrationStore::in_memory(),
    }
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Data(e.to_string())),
    }
}

fn emit(report: &Report, format: FormatArg, out: &Option<PathBuf>) -> CliResult {
    let format = match format {
        FormatArg::Json => Format::Json,
        FormatArg::Text => Format::Text,
    };
    let mut buf = Vec::new();
    emit_report(report, format, &mut buf)?;
    write_output(out, &buf)
}

fn cvmc_model(args: &CommonTestArgs, values: &[f64]) -> CliResult<CvmcModel> {
    let family = args
        .family
        .ok_or_else(|| Failure::Usage("--method cvmc needs --family".into()))?
        .into();
    Ok(match args.concentration {
        Some(c) => CvmcModel::known(family, c)?,
        None => CvmcModel::plug_in(family, values)?,
    })
}

fn known_mean(args: &CommonTestArgs) -> CliResult<Option<f64>> {
    let spec = args.input.spec();
    Ok(match args.mu {
        Some(mu) => Some(IngestSpec { range: RangeConvention::ZeroToTwoPi, ..spec }.convert(mu)?),
        None => None,
    })
}

fn run_test(args: &TestArgs) -> CliResult {
    let a = &args.common;
    let values = load_angles(&a.input.spec())?;
    let store = store(&a.cache);
    let n = values.len();
    let report = match Method::from(a.method) {
        Method::Sacc => {
            let null = store.get(&CalibrationKey::b_infinity(n, a.reps, a.seed))?;
            sacc_test(&values, known_mean(a)?, a.alpha, &null)?
        }
        Method::Sagc => {
            let null = store.get(&CalibrationKey::b_infinity(n, a.reps, a.seed))?;
            sagc_test(&values, a.alpha, &null)?
        }
        Method::Cvmc => {
            let model = cvmc_model(a, &values)?;
            let key = CalibrationKey::sn_null(n, model.distribution(0.0)?, a.reps, a.seed);
            let null = store.get(&key)?;
            cvmc_test(&values, &model, a.alpha, &null)?
        }
    };
    emit(&Report::Test(report), a.format, &a.out)
}

fn run_segment(args: &SegmentArgs) -> CliResult {
    let a = &args.common;
    let values = load_angles(&a.input.spec())?;
    let method = Method::from(a.method);
    let cvmc = match method {
        Method::Cvmc => Some(CvmcSettings {
            family: a
                .family
                .ok_or_else(|| Failure::Usage("--method cvmc needs --family".into()))?
                .into(),
            concentration: a.concentration,
        }),
        _ => None,
    };
    let config = SegmentationConfig {
        alpha: a.alpha,
        min_segment_length: args.min_seg,
        replicates: a.reps,
        seed: a.seed,
        known_mean: known_mean(a)?,
        cvmc,
        concentration_measure: match args.measure {
            MeasureArg::Rbar => ConcentrationMeasure::ResultantLength,
            MeasureArg::Kappa => ConcentrationMeasure::VonMisesKappa,
        },
        ..SegmentationConfig::new(method)
    };
    let tree = binary_segment(&values, &config, &store(&a.cache))?;
    let report = Report::Segmentation(Box::new(SegmentationReport::new(&tree, &values)));
    emit(&report, a.format, &a.out)
}

fn run_calibrate(args: &CalibrateArgs) -> CliResult {
    let key = match args.law {
        LawArg::Binf => CalibrationKey::b_infinity(args.grid, args.reps, args.seed),
        LawArg::Delta => CalibrationKey {
            law: Law::DeltaInfinity,
            ..CalibrationKey::b_infinity(args.grid, args.reps, args.seed)
        },
        LawArg::Sn => {
            let (Some(family), Some(c)) = (args.family, args.concentration) else {
                return Err(Failure::Usage(
                    "--law sn needs --family and --concentration".into(),
                ));
            };
            let model = CvmcModel::known(family.into(), c)?;
            CalibrationKey::sn_null(args.grid, model.distribution(0.0)?, args.reps, args.seed)
        }
    };
    let store = CalibrationStore::with_dir(&args.cache);
    let sample = store.get(&key)?;
    let path = store.path_for(&key).expect("store has a directory");
    let summary = serde_json::json!({
        "path": path,
        "law": sample.law,
        "grid": sample.grid_size,
        "replicates": sample.replicates,
        "skipped": sample.skipped,
        "seed": sample.seed,
        "q90": sample.quantile(0.90)?,
        "q95": sample.quantile(0.95)?,
        "q99": sample.quantile(0.99)?,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Data(e.to_string()))?;
    text.push('\n');
    write_output(&None, text.as_bytes())
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn run_simulate(args: &SimulateArgs) -> CliResult {
    let text = read_text(&args.config)?;
    let config: SimulationConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    let mut buf = Vec::new();
    match config {
        SimulationConfig::Power(spec) => {
            let rows = run_power_study(&spec, &store(&args.cache))?;
            write_power_csv(&rows, &mut buf)?;
        }
        SimulationConfig::Table(job) => {
            let rows = reproduce_cutoff_table(job.table, job.replicates, job.seed, &job.filter)?;
            write_comparison_csv(&rows, &mut buf)?;
        }
    }
    write_output(&args.out, &buf)
}

fn load_tree(path: &Path) -> CliResult<SegmentTree> {
    let text = read_text(path)?;
    if let Ok(Report::Segmentation(r)) = parse_report(&text) {
        return Ok(r.tree);
    }
    serde_json::from_str(&text)
        .map_err(|e| Failure::Data(format!("{}: not a segmentation report: {e}", path.display())))
}

fn run_plot(args: &PlotArgs) -> CliResult {
    let values = load_angles(&args.input.spec())?;
    let tree = args.segmentation.as_deref().map(load_tree).transpose()?;
    if let Some(t) = &tree {
        if t.n != values.len() {
            return Err(Failure::Data(format!(
                "segmentation covers {} observations, input has {}",
                t.n,
                values.len()
            )));
        }
    }
    let spec = PlotSpec {
        outer_radius: args.radius,
        segment_circles: !args.no_circles,
        mean_bubbles: !args.no_means,
        ..PlotSpec::default()
    };
    let svg = circular_temporal_svg(&values, tree.as_ref(), &spec);
    write_output(&Some(args.out.clone()), svg.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Test(a) => run_test(a),
        Command::Segment(a) => run_segment(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Plot(a) => run_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
