//! Binary segmentation: test a range, split it at the estimated changepoint
//! when the test rejects, and recurse on both halves.

use serde::{Deserialize, Serialize};

use crate::calibration::{CalibrationKey, CalibrationStore};
use crate::changepoint::{
    cvmc_test, sacc_test, sagc_test, CvmcFamily, CvmcModel, Method, TestReport, MIN_TEST_LEN,
};
use crate::circular::{concentration, CircularSummary, ConcentrationMeasure};
use crate::error::{Error, Result};

/// CVMC settings for segmentation. A missing concentration is estimated
/// once from the full series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvmcSettings {
    pub family: CvmcFamily,
    pub concentration: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub method: Method,
    pub alpha: f64,
    /// Ranges shorter than this are not tested.
    pub min_segment_length: usize,
    /// Monte Carlo replicates per calibration sample.
    pub replicates: usize,
    pub seed: u64,
    /// SACC only: known mean direction. `None` centers each range on its
    /// own circular mean.
    #[serde(default)]
    pub known_mean: Option<f64>,
    #[serde(default)]
    pub cvmc: Option<CvmcSettings>,
    #[serde(default)]
    pub concentration_measure: ConcentrationMeasure,
}

impl SegmentationConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            alpha: 0.05,
            min_segment_length: 5,
            replicates: 5000,
            seed: 1,
            known_mean: None,
            cvmc: None,
            concentration_measure: ConcentrationMeasure::ResultantLength,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_segment_length < 4 {
            return Err(Error::InvalidParameter(format!(
                "min_segment_length must be at least 4, got {}",
                self.min_segment_length
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 0.5], got {}",
                self.alpha
            )));
        }
        if self.method == Method::Cvmc && self.cvmc.is_none() {
            return Err(Error::InvalidParameter(
                "CVMC segmentation needs a family (and optionally a concentration)".into(),
            ));
        }
        Ok(())
    }

    /// Shortest range that is actually tested.
    pub fn effective_min_length(&self) -> usize {
        self.min_segment_length.max(MIN_TEST_LEN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NodeOutcome {
    Tested { report: TestReport },
    TooShort,
    Untestable { reason: String },
}

/// One range of the recursion; 1-based inclusive bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentNode {
    pub start: usize,
    pub end: usize,
    pub outcome: NodeOutcome,
    /// Absolute index of the last observation of the left child, when split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_at: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Box<[SegmentNode; 2]>>,
    /// Present on leaves only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<CircularSummary<f64>>,
}

impl SegmentNode {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn report(&self) -> Option<&TestReport> {
        match &self.outcome {
            NodeOutcome::Tested { report } => Some(report),
            _ => None,
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a SegmentNode)) {
        f(self);
        if let Some(children) = &self.children {
            children[0].visit(f);
            children[1].visit(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTree {
    pub n: usize,
    pub config: SegmentationConfig,
    /// The CVMC model actually used (with any plug-in concentration).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvmc_model: Option<CvmcModel>,
    pub root: SegmentNode,
}

/// A tested range in depth-first order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestedRow {
    pub start: usize,
    pub end: usize,
    /// Absolute estimated changepoint.
    pub estimated_changepoint: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
}

/// Per-leaf summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafRow {
    pub start: usize,
    pub end: usize,
    /// `None` when the mean direction is undefined.
    pub mean_rad: Option<f64>,
    pub mean_deg: Option<f64>,
    pub concentration: Option<f64>,
}

impl SegmentTree {
    pub fn nodes(&self) -> Vec<&SegmentNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |n| out.push(n));
        out
    }

    pub fn leaves(&self) -> Vec<&SegmentNode> {
        self.nodes().into_iter().filter(|n| n.is_leaf()).collect()
    }

    /// Estimated changepoints in increasing order.
    pub fn changepoints(&self) -> Vec<usize> {
        let mut cps: Vec<usize> = self.nodes().iter().filter_map(|n| n.split_at).collect();
        cps.sort_unstable();
        cps
    }

    pub fn tested_rows(&self) -> Vec<TestedRow> {
        self.nodes()
            .into_iter()
            .filter_map(|node| {
                node.report().map(|r| TestedRow {
                    start: node.start,
                    end: node.end,
                    estimated_changepoint: node.start + r.changepoint_index - 1,
                    statistic: r.statistic,
                    p_value: r.p_value,
                    rejected: r.rejected,
                })
            })
            .collect()
    }
}

/// One row per leaf in range order.
pub fn segment_report(tree: &SegmentTree, values: &[f64]) -> Vec<LeafRow> {
    tree.leaves()
        .into_iter()
        .map(|leaf| {
            let slice = &values[leaf.start - 1..leaf.end];
            let summary = leaf
                .summary
                .clone()
                .unwrap_or_else(|| CircularSummary::of(slice));
            LeafRow {
                start: leaf.start,
                end: leaf.end,
                mean_rad: summary.mean_direction,
                mean_deg: summary.mean_direction.map(f64::to_degrees),
                concentration: concentration(slice, tree.config.concentration_measure),
            }
        })
        .collect()
}

struct Context<'a> {
    values: &'a [f64],
    config: &'a SegmentationConfig,
    model: Option<CvmcModel>,
    store: &'a CalibrationStore,
}

impl Context<'_> {
    fn test(&self, slice: &[f64]) -> Result<TestReport> {
        let c = self.config;
        let len = slice.len();
        match c.method {
            Method::Sacc => {
                let null = self.store.get(&CalibrationKey::b_infinity(len, c.replicates, c.seed))?;
                sacc_test(slice, c.known_mean, c.alpha, &null)
            }
            Method::Sagc => {
                let null = self.store.get(&CalibrationKey::b_infinity(len, c.replicates, c.seed))?;
                sagc_test(slice, c.alpha, &null)
            }
            Method::Cvmc => {
                let model = self.model.expect("validated: CVMC model present");
                let key = CalibrationKey::sn_null(len, model.distribution(0.0)?, c.replicates, c.seed);
                let null = self.store.get(&key)?;
                cvmc_test(slice, &model, c.alpha, &null)
            }
        }
    }

    fn leaf(&self, start: usize, end: usize, outcome: NodeOutcome) -> SegmentNode {
        SegmentNode {
            start,
            end,
            outcome,
            split_at: None,
            children: None,
            summary: Some(CircularSummary::of(&self.values[start - 1..end])),
        }
    }

    fn segment(&self, start: usize, end: usize) -> Result<SegmentNode> {
        let len = end + 1 - start;
        if len < self.config.effective_min_length() {
            return Ok(self.leaf(start, end, NodeOutcome::TooShort));
        }
        let report = match self.test(&self.values[start - 1..end]) {
            Ok(r) => r,
            Err(e @ (Error::DegenerateSample(_) | Error::UndefinedMeanDirection { .. })) => {
                return Ok(self.leaf(start, end, NodeOutcome::Untestable { reason: e.to_string() }));
            }
            Err(e) => return Err(e),
        };
        if report.p_value >= self.config.alpha {
            return Ok(self.leaf(start, end, NodeOutcome::Tested { report }));
        }
        let split = start + report.changepoint_index - 1;
        let (left, right) = rayon::join(|| self.segment(start, split), || self.segment(split + 1, end));
        Ok(SegmentNode {
            start,
            end,
            outcome: NodeOutcome::Tested { report },
            split_at: Some(split),
            children: Some(Box::new([left?, right?])),
            summary: None,
        })
    }
}

/// Recursive binary segmentation of `values` (angles in `[0, 2π)`).
///
/// Each tested range is calibrated at its own length. Ranges shorter than
/// the effective minimum become untested leaves; degenerate ranges become
/// untestable leaves.
pub fn binary_segment(
    values: &[f64],
    config: &SegmentationConfig,
    store: &CalibrationStore,
) -> Result<SegmentTree> {
    config.validate()?;
    if values.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let model = match (config.method, config.cvmc) {
        (Method::Cvmc, Some(s)) => Some(match s.concentration {
            Some(c) => CvmcModel::known(s.family, c)?,
            None => CvmcModel::plug_in(s.family, values)?,
        }),
        _ => None,
    };
    let ctx = Context {
        values,
        config,
        model,
        store,
    };
    let root = ctx.segment(1, values.len())?;
    Ok(SegmentTree {
        n: values.len(),
        config: config.clone(),
        cvmc_model: model,
        root,
    })
}
