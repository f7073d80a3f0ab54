use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circular::{concentration, ConcentrationMeasure};
use crate::segmentation::SegmentTree;

/// Layout of the circular temporal plot. Points are drawn in a single hue
/// whose opacity tracks the segment concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub outer_radius: f64,
    pub point_radius: f64,
    pub segment_circles: bool,
    pub mean_bubbles: bool,
    /// Concentrations mapped to the faintest and the full intensity.
    pub intensity_bounds: (f64, f64),
    pub color: String,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            outer_radius: 200.0,
            point_radius: 2.5,
            segment_circles: true,
            mean_bubbles: true,
            intensity_bounds: (0.0, 1.0),
            color: "#1f4e9c".into(),
        }
    }
}

const MIN_OPACITY: f64 = 0.15;

fn opacity(c: Option<f64>, (lo, hi): (f64, f64)) -> f64 {
    let Some(c) = c else { return MIN_OPACITY };
    let t = if hi > lo { ((c - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 1.0 };
    MIN_OPACITY + (1.0 - MIN_OPACITY) * t
}

/// Observation `i` (1-based) of `n` sits at `(i/n)·R·(cos θ, sin θ)`,
/// y axis up.
pub fn point_position(i: usize, n: usize, theta: f64, outer_radius: f64) -> (f64, f64) {
    let r = i as f64 / n as f64 * outer_radius;
    (r * theta.cos(), r * theta.sin())
}

/// SVG document for `values`, optionally decorated with a segmentation.
pub fn circular_temporal_svg(values: &[f64], tree: Option<&SegmentTree>, spec: &PlotSpec) -> String {
    let n = values.len();
    let r_out = spec.outer_radius;
    let margin = 4.0 * spec.point_radius + 10.0;
    let size = 2.0 * (r_out + margin);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.1}" height="{size:.1}" viewBox="{:.1} {:.1} {size:.1} {size:.1}">"#,
        -(r_out + margin),
        -(r_out + margin)
    );
    // Flip y so angles run counter-clockwise from the positive x axis.
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    let _ = writeln!(
        s,
        r##"<circle class="frame" cx="0" cy="0" r="{r_out:.4}" fill="none" stroke="#bbbbbb" stroke-width="0.5"/>"##
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{:.4}" y1="0" x2="{r_out:.4}" y2="0" stroke="#dddddd" stroke-width="0.5"/>"##,
        -r_out
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="0" y1="{:.4}" x2="0" y2="{r_out:.4}" stroke="#dddddd" stroke-width="0.5"/>"##,
        -r_out
    );

    let mut point_opacity = vec![1.0; n];
    if let Some(tree) = tree {
        let measure = tree.config.concentration_measure;
        for leaf in tree.leaves() {
            let slice = &values[leaf.start - 1..leaf.end];
            let c = concentration(slice, measure);
            let c = match measure {
                ConcentrationMeasure::ResultantLength => c,
                // κ is unbounded; squash onto [0, 1) before mapping.
                ConcentrationMeasure::VonMisesKappa => c.map(|k| k / (1.0 + k)),
            };
            let o = opacity(c, spec.intensity_bounds);
            point_opacity[leaf.start - 1..leaf.end].fill(o);
            let ring = leaf.end as f64 / n as f64 * r_out;
            if spec.segment_circles {
                let _ = writeln!(
                    s,
                    r##"<circle class="segment" cx="0" cy="0" r="{ring:.4}" fill="none" stroke="#d04a02" stroke-width="1"/>"##
                );
            }
            let mean = leaf.summary.as_ref().and_then(|m| m.mean_direction);
            if let (true, Some(mu)) = (spec.mean_bubbles, mean) {
                let (x, y) = point_position(leaf.end, n, mu, r_out);
                let _ = writeln!(
                    s,
                    r##"<circle class="mean" cx="{x:.4}" cy="{y:.4}" r="{:.4}" fill="#d04a02" fill-opacity="0.8"/>"##,
                    2.0 * spec.point_radius
                );
            }
        }
    }

    for (i, (&theta, o)) in values.iter().zip(&point_opacity).enumerate() {
        let (x, y) = point_position(i + 1, n, theta, r_out);
        let _ = writeln!(
            s,
            r#"<circle class="obs" cx="{x:.4}" cy="{y:.4}" r="{:.4}" fill="{}" fill-opacity="{o:.3}"/>"#,
            spec.point_radius, spec.color
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn obs_points(svg: &str) -> Vec<(f64, f64)> {
        let doc = roxmltree::Document::parse(svg).expect("well-formed");
        doc.descendants()
            .filter(|n| n.attribute("class") == Some("obs"))
            .map(|n| {
                (
                    n.attribute("cx").unwrap().parse().unwrap(),
                    n.attribute("cy").unwrap().parse().unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn single_point_on_outer_circle() {
        let spec = PlotSpec::default();
        let pts = obs_points(&circular_temporal_svg(&[0.0], None, &spec));
        assert_eq!(pts, vec![(200.0, 0.0)]);
    }

    #[test]
    fn four_points_on_semi_axes() {
        let spec = PlotSpec {
            outer_radius: 100.0,
            ..PlotSpec::default()
        };
        let pts = obs_points(&circular_temporal_svg(&[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2], None, &spec));
        let expected = [(25.0, 0.0), (0.0, 50.0), (-75.0, 0.0), (0.0, -100.0)];
        for (p, e) in pts.iter().zip(expected) {
            assert!((p.0 - e.0).abs() < 1e-3 && (p.1 - e.1).abs() < 1e-3, "{p:?} vs {e:?}");
        }
    }

    #[test]
    fn point_count_and_increasing_radii() {
        let values: Vec<f64> = (0..57).map(|i| (i as f64 * 0.7) % (2.0 * PI)).collect();
        let pts = obs_points(&circular_temporal_svg(&values, None, &PlotSpec::default()));
        assert_eq!(pts.len(), 57);
        let radii: Vec<f64> = pts.iter().map(|(x, y)| x.hypot(*y)).collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn opacity_ramp() {
        assert_eq!(opacity(Some(1.0), (0.0, 1.0)), 1.0);
        assert_eq!(opacity(Some(0.0), (0.0, 1.0)), MIN_OPACITY);
        assert_eq!(opacity(Some(5.0), (0.0, 1.0)), 1.0);
        assert_eq!(opacity(None, (0.0, 1.0)), MIN_OPACITY);
    }
}
