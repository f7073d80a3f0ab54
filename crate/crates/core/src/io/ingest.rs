use std::f64::consts::PI;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::circular::AngleSeries;
use crate::error::{Error, Result};
use crate::scalar::wrap_angle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Degrees,
    #[default]
    Radians,
}

/// Range the raw values are declared to lie in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeConvention {
    /// Anything goes; values are reduced mod a full turn.
    #[default]
    ZeroToTwoPi,
    /// Values must lie in `[−π, π]` (`[−180, 180]` in degrees).
    MinusPiToPi,
}

impl std::str::FromStr for AngleUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degrees" | "deg" => Ok(AngleUnit::Degrees),
            "radians" | "rad" => Ok(AngleUnit::Radians),
            other => Err(Error::InvalidParameter(format!("unknown unit `{other}`"))),
        }
    }
}

impl std::str::FromStr for RangeConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_to_2pi" | "0-2pi" => Ok(RangeConvention::ZeroToTwoPi),
            "minus_pi_to_pi" | "pm-pi" => Ok(RangeConvention::MinusPiToPi),
            other => Err(Error::InvalidParameter(format!("unknown range convention `{other}`"))),
        }
    }
}

/// Field selection for delimited input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Column {
    /// 0-based field index.
    Index(usize),
    /// Header name; implies a header line.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub unit: AngleUnit,
    #[serde(default)]
    pub range: RangeConvention,
    /// `None`: the first field of each line.
    #[serde(default)]
    pub column: Option<Column>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Skip the first data line. Implied by `Column::Name`.
    #[serde(default)]
    pub header: bool,
}

fn default_delimiter() -> char {
    ','
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            unit: AngleUnit::default(),
            range: RangeConvention::default(),
            column: None,
            delimiter: default_delimiter(),
            header: false,
        }
    }

    /// Raw value in the declared unit and range to radians in `[0, 2π)`.
    pub fn convert(&self, raw: f64) -> Result<f64> {
        let rad = match self.unit {
            AngleUnit::Degrees => raw.to_radians(),
            AngleUnit::Radians => raw,
        };
        if self.range == RangeConvention::MinusPiToPi && rad.abs() > PI * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "{raw} lies outside the declared [-pi, pi] range"
            )));
        }
        Ok(wrap_angle(rad))
    }
}

/// Reads the file named by `spec`.
pub fn load_angles(spec: &IngestSpec) -> Result<AngleSeries<f64>> {
    let file = std::fs::File::open(&spec.path)
        .map_err(|e| Error::Io(format!("{}: {e}", spec.path.display())))?;
    parse_angles(BufReader::new(file), spec)
}

/// Parses angles from `reader`; blank lines and `#` comments are skipped.
pub fn parse_angles<R: BufRead>(reader: R, spec: &IngestSpec) -> Result<AngleSeries<f64>> {
    let mut index = match &spec.column {
        Some(Column::Index(i)) => Some(*i),
        _ => None,
    };
    let mut pending_header = spec.header || matches!(spec.column, Some(Column::Name(_)));
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if spec.column.is_some() {
            trimmed.split(spec.delimiter).map(str::trim).collect()
        } else {
            vec![trimmed.split(spec.delimiter).next().unwrap_or("").trim()]
        };
        if pending_header {
            pending_header = false;
            if let Some(Column::Name(name)) = &spec.column {
                let pos = fields
                    .iter()
                    .position(|f| f.trim_matches('"') == name)
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("no column named `{name}` in header"),
                    })?;
                index = Some(pos);
            }
            continue;
        }
        let field = fields.get(index.unwrap_or(0)).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("missing column {}", index.unwrap_or(0)),
        })?;
        let raw: f64 = field.trim_matches('"').parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("`{field}` is not a number"),
        })?;
        if !raw.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("`{field}` is not finite"),
            });
        }
        let angle = spec.convert(raw).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(angle);
    }
    if out.is_empty() {
        return Err(Error::EmptySample);
    }
    AngleSeries::new(out)
}
