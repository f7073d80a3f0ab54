//! Reading angle files, writing reports, drawing the circular temporal plot.

pub mod ingest;
pub mod report;
pub mod svg;

pub use ingest::{load_angles, parse_angles, AngleUnit, Column, IngestSpec, RangeConvention};
pub use report::{emit_report, format_p_value, parse_report, render, Format, Report, SegmentationReport};
pub use svg::{circular_temporal_svg, PlotSpec};
