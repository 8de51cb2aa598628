//! SVG drawings of layouts.
//!
//! 2D layouts are drawn in-plane; 3D layouts through a fixed isometric projection with the
//! vertical axis up. Stroke width grows with the square root of section area.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::fea;
use crate::model::{Dim, TrussLayout, Vec3};
use crate::testbeds::CaseConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Palette {
    /// Tension red, compression blue.
    #[default]
    Stress,
    Mono,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderStyle {
    /// Canvas width, px.
    pub width: f64,
    /// Stroke of the largest section, px.
    pub max_stroke: f64,
    pub palette: Palette,
    pub labels: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800.0,
            max_stroke: 8.0,
            palette: Palette::Stress,
            labels: true,
        }
    }
}

const MARGIN: f64 = 60.0;
const ARROW: f64 = 40.0;

/// Screen coordinates before scaling; y grows downward.
pub fn project(dim: Dim, p: &Vec3) -> [f64; 2] {
    match dim {
        Dim::Two => [p[0], -p[1]],
        Dim::Three => {
            let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
            [(p[0] - p[1]) * c, (p[0] + p[1]) * s - p[2]]
        }
    }
}

/// Stroke width for a section of `area` when the largest drawn section is `max_area`.
pub fn stroke_width(area: f64, max_area: f64, max_stroke: f64) -> f64 {
    if max_area <= 0.0 {
        return max_stroke;
    }
    max_stroke * (area / max_area).max(0.0).sqrt()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(layout: &TrussLayout, case: &CaseConfig, style: &RenderStyle) -> String {
    let dim = layout.dim();
    let raw: Vec<[f64; 2]> = layout.nodes().iter().map(|n| project(dim, &n.position)).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &raw {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    if raw.is_empty() {
        (lo, hi) = ([0.0; 2], [1.0; 2]);
    }
    let span = [(hi[0] - lo[0]).max(1e-9), (hi[1] - lo[1]).max(1e-9)];
    let inner = style.width - 2.0 * MARGIN;
    let scale = (inner / span[0]).min(inner / span[1]);
    let height = (span[1] * scale + 2.0 * MARGIN).max(200.0);
    let offset = [
        MARGIN + (inner - span[0] * scale) / 2.0,
        MARGIN + (height - 2.0 * MARGIN - span[1] * scale) / 2.0,
    ];
    let pts: Vec<[f64; 2]> = raw
        .iter()
        .map(|p| [offset[0] + (p[0] - lo[0]) * scale, offset[1] + (p[1] - lo[1]) * scale])
        .collect();

    let analysis = fea::assemble_and_solve(layout, &case.material);
    let max_area = layout.bars().iter().map(|b| b.section.area()).fold(0.0, f64::max);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{height:.0}" viewBox="0 0 {w:.0} {height:.0}">"#,
        w = style.width
    );
    s.push_str(concat!(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" orient="auto-start-reverse">"#,
        r##"<path d="M0,0 L10,5 L0,10 z" fill="#d35400"/></marker></defs>"##,
        "\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for (i, bar) in layout.bars().iter().enumerate() {
        let (a, b) = (pts[bar.u], pts[bar.v]);
        let color = match style.palette {
            Palette::Mono => "#222222",
            Palette::Stress if !analysis.solvable => "#7f8c8d",
            Palette::Stress if analysis.axial_stress[i] > 0.0 => "#c0392b",
            Palette::Stress => "#2c6fbb",
        };
        let _ = writeln!(
            s,
            r#"<line class="bar" data-bar="{i}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="{:.4}" stroke-linecap="round"/>"#,
            a[0],
            a[1],
            b[0],
            b[1],
            stroke_width(bar.section.area(), max_area, style.max_stroke)
        );
    }

    let load_peak = layout
        .nodes()
        .iter()
        .map(|n| n.load.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for (i, node) in layout.nodes().iter().enumerate() {
        let [x, y] = pts[i];
        if node.is_support {
            let _ = writeln!(
                s,
                r##"<polygon class="support" points="{x:.2},{y:.2} {:.2},{:.2} {:.2},{:.2}" fill="#7f8c8d"/>"##,
                x - 8.0,
                y + 14.0,
                x + 8.0,
                y + 14.0
            );
        }
        if node.is_loaded() && load_peak > 0.0 {
            let tip = project(dim, &node.load);
            let len = (tip[0] * tip[0] + tip[1] * tip[1]).sqrt();
            if len > 0.0 {
                let mag = node.load.iter().map(|c| c * c).sum::<f64>().sqrt() / load_peak;
                let k = ARROW * mag.max(0.3) / len;
                let _ = writeln!(
                    s,
                    r##"<line class="load" x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{:.2}" stroke="#d35400" stroke-width="2" marker-end="url(#arrow)"/>"##,
                    x + tip[0] * k,
                    y + tip[1] * k
                );
            }
        }
        let fill = if node.is_fixed { "#000000" } else { "#555555" };
        let _ = writeln!(s, r#"<circle class="node" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{fill}"/>"#);
        if style.labels && node.is_fixed {
            if let Some(label) = case.node_labels.get(i) {
                let _ = writeln!(
                    s,
                    r#"<text class="label" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{}</text>"#,
                    x + 7.0,
                    y - 7.0,
                    escape(label)
                );
            }
        }
    }
    let _ = writeln!(
        s,
        r#"<text class="mass" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{}: mass {:.2} kg</text>"#,
        MARGIN / 2.0,
        height - MARGIN / 3.0,
        escape(&case.name),
        case.mass(layout)
    );
    s.push_str("</svg>\n");
    s
}
