use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::calibration::Law;
use crate::changepoint::{CvmcModel, Method, TestReport};
use crate::circular::ConcentrationMeasure;
use crate::error::{Error, Result};
use crate::segmentation::{segment_report, LeafRow, SegmentTree, TestedRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

/// Calibration used throughout a segmentation: the law is re-simulated at
/// each tested range's length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentCalibration {
    pub law: Law,
    pub grid: String,
    pub replicates: usize,
    pub seed: u64,
}

/// Flat view of a segmentation for output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub method: Method,
    pub n: usize,
    pub alpha: f64,
    pub min_segment_length: usize,
    pub calibration: SegmentCalibration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvmc_model: Option<CvmcModel>,
    pub concentration_measure: ConcentrationMeasure,
    /// Tested ranges in depth-first order.
    pub segments: Vec<TestedRow>,
    pub leaves: Vec<LeafRow>,
    pub tree: SegmentTree,
}

impl SegmentationReport {
    pub fn new(tree: &SegmentTree, values: &[f64]) -> Self {
        let c = &tree.config;
        Self {
            method: c.method,
            n: tree.n,
            alpha: c.alpha,
            min_segment_length: c.min_segment_length,
            calibration: SegmentCalibration {
                law: match c.method {
                    Method::Cvmc => Law::SnNull,
                    _ => Law::BInfinity,
                },
                grid: "segment length".into(),
                replicates: c.replicates,
                seed: c.seed,
            },
            cvmc_model: tree.cvmc_model,
            concentration_measure: c.concentration_measure,
            segments: tree.tested_rows(),
            leaves: segment_report(tree, values),
            tree: tree.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    Segmentation(Box<SegmentationReport>),
    Test(TestReport),
}

/// `p` with a note when it sits at the Monte Carlo floor `1/(m+1)`.
pub fn format_p_value(p: f64, replicates: usize) -> String {
    let floor = 1.0 / (replicates as f64 + 1.0);
    if p <= floor * (1.0 + 1e-12) {
        format!("{p:.4} (< 1/{})", replicates + 1)
    } else {
        format!("{p:.4}")
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.digits$}"))
}

fn test_text(r: &TestReport) -> String {
    let mut s = String::new();
    let c = &r.calibration;
    let _ = writeln!(s, "method            {}", r.method.name());
    let _ = writeln!(s, "n                 {}", r.n);
    let _ = writeln!(s, "statistic         {:.4}", r.statistic);
    let _ = writeln!(s, "changepoint       {}", r.changepoint_index);
    let _ = writeln!(s, "cutoff            {:.4}", r.cutoff);
    let _ = writeln!(s, "p-value           {}", format_p_value(r.p_value, c.replicates));
    let _ = writeln!(s, "alpha             {}", r.alpha);
    let _ = writeln!(s, "rejected          {}", if r.rejected { "yes" } else { "no" });
    let _ = writeln!(
        s,
        "mean direction    {:.4} rad ({:.2} deg){}",
        r.mean_direction,
        r.mean_direction.to_degrees(),
        if r.mean_known { ", known" } else { "" }
    );
    if let Some(m) = &r.cvmc_model {
        let _ = writeln!(
            s,
            "model             {:?}, concentration {:.4}{}",
            m.family,
            m.concentration,
            if m.plug_in { " (plug-in)" } else { "" }
        );
    }
    let _ = writeln!(
        s,
        "calibration       {} grid {}, {} replicates, seed {}",
        c.law.tag(),
        c.grid_size,
        c.replicates,
        c.seed
    );
    s
}

fn segmentation_text(r: &SegmentationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} binary segmentation, n = {}, alpha = {}, min segment {}",
        r.method.name(),
        r.n,
        r.alpha,
        r.min_segment_length
    );
    let _ = writeln!(
        s,
        "calibration: {} at segment length, {} replicates, seed {}",
        r.calibration.law.tag(),
        r.calibration.replicates,
        r.calibration.seed
    );
    if let Some(m) = &r.cvmc_model {
        let _ = writeln!(s, "model: {:?}, concentration {:.4}", m.family, m.concentration);
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<12} {:>11} {:>10} {:>18}", "range", "changepoint", "statistic", "p-value");
    for row in &r.segments {
        let _ = writeln!(
            s,
            "{:<12} {:>11} {:>10.4} {:>18}",
            format!("{}-{}", row.start, row.end),
            row.estimated_changepoint,
            row.statistic,
            format_p_value(row.p_value, r.calibration.replicates)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<12} {:>12} {:>12} {:>14}", "segment", "mean (rad)", "mean (deg)", "concentration");
    for leaf in &r.leaves {
        let _ = writeln!(
            s,
            "{:<12} {:>12} {:>12} {:>14}",
            format!("{}-{}", leaf.start, leaf.end),
            fmt_opt(leaf.mean_rad, 4),
            fmt_opt(leaf.mean_deg, 2),
            fmt_opt(leaf.concentration, 4)
        );
    }
    s
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    Ok(match (format, report) {
        (Format::Json, r) => {
            let mut s = serde_json::to_string_pretty(r).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        (Format::Text, Report::Test(r)) => test_text(r),
        (Format::Text, Report::Segmentation(r)) => segmentation_text(r),
    })
}

pub fn emit_report<W: Write>(report: &Report, format: Format, mut w: W) -> Result<()> {
    w.write_all(render(report, format)?.as_bytes())?;
    Ok(())
}

pub fn parse_report(json: &str) -> Result<Report> {
    serde_json::from_str(json).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}
