use super::{singular_points, EdgeLabel, EmbeddedGraph, PillowcasePoint};
use crate::io::fmt_f64;
use std::f64::consts::{PI, TAU};
use std::fmt::Write;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Pixel width of the α range [0, π]; the β range is twice as tall.
    pub width: f64,
    pub margin: f64,
    /// Suppresses the generation timestamp.
    pub reproducible: bool,
    pub title: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 300.0,
            margin: 30.0,
            reproducible: true,
            title: None,
        }
    }
}

fn label_name(label: EdgeLabel) -> &'static str {
    match label {
        EdgeLabel::IrreducibleArc => "irreducible-arc",
        EdgeLabel::ReducibleLine => "reducible-line",
        EdgeLabel::Other => "other",
    }
}

fn label_colour(label: EdgeLabel) -> &'static str {
    match label {
        EdgeLabel::IrreducibleArc => "#b03a2e",
        EdgeLabel::ReducibleLine => "#1f4e9c",
        EdgeLabel::Other => "#444444",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the graph in the fundamental domain [0, π] × [0, 2π], with β
/// increasing upwards and the four singular points marked.
pub fn graph_svg(graph: &EmbeddedGraph, opts: &SvgOptions) -> String {
    let s = opts.width / PI;
    let m = opts.margin;
    let w = opts.width + 2.0 * m;
    let h = TAU * s + 2.0 * m;
    let px = |a: f64, b: f64| (m + a * s, m + (TAU - b) * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    if let Some(t) = &opts.title {
        let _ = writeln!(out, "  <title>{}</title>", escape(t));
    }
    if !opts.reproducible {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(out, "  <metadata>generated-unix-time: {secs}</metadata>");
    }
    let (x0, y0) = px(0.0, TAU);
    let _ = writeln!(
        out,
        r##"  <rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        opts.width,
        TAU * s
    );
    let (xl, ym) = px(0.0, PI);
    let (xr, _) = px(PI, PI);
    let _ = writeln!(
        out,
        r##"  <line x1="{xl:.2}" y1="{ym:.2}" x2="{xr:.2}" y2="{ym:.2}" stroke="#bbbbbb" stroke-dasharray="4 4"/>"##
    );
    for (k, e) in graph.edges.iter().enumerate() {
        let c = &e.curve;
        let mut runs: Vec<Vec<[f64; 2]>> = vec![Vec::new()];
        let push = |v: [f64; 2], runs: &mut Vec<Vec<[f64; 2]>>| {
            let run = runs.last_mut().expect("at least one run");
            if let Some(prev) = run.last() {
                if (v[1] - prev[1]).abs() > PI {
                    runs.push(Vec::new());
                }
            }
            runs.last_mut().expect("at least one run").push(v);
        };
        for v in &c.vertices {
            push([v[0], crate::torus_dynamics::point::wrap_angle(v[1])], &mut runs);
        }
        if c.closed {
            if let Some(&first) = c.vertices.first() {
                push([first[0], crate::torus_dynamics::point::wrap_angle(first[1])], &mut runs);
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run
                .iter()
                .map(|v| {
                    let (x, y) = px(v[0], v[1]);
                    format!("{x:.3},{y:.3}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"  <polyline class="{}" data-edge="{k}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                label_name(e.label),
                pts.join(" "),
                label_colour(e.label)
            );
        }
    }
    for c in singular_points() {
        let mut pts = vec![(c.alpha, c.beta)];
        if c.beta == 0.0 {
            pts.push((c.alpha, TAU));
        }
        for (a, b) in pts {
            let (x, y) = px(a, b);
            let _ = writeln!(out, r##"  <circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#000000"/>"##);
        }
    }
    for (name, p) in [("P", PillowcasePoint::P), ("Q", PillowcasePoint::Q)] {
        let (x, y) = px(p.alpha, p.beta);
        let dx = if p.alpha == 0.0 { -18.0 } else { 8.0 };
        let _ = writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14">{name}</text>"#,
            x + dx,
            y + 5.0
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}

/// CSV of all graph vertices: `edge,label,vertex,alpha,beta`.
pub fn graph_csv(graph: &EmbeddedGraph) -> String {
    let mut out = String::from("edge,label,vertex,alpha,beta\n");
    for (k, e) in graph.edges.iter().enumerate() {
        for (i, v) in e.curve.vertices.iter().enumerate() {
            let _ = writeln!(
                out,
                "{k},{},{i},{},{}",
                label_name(e.label),
                fmt_f64(v[0]),
                fmt_f64(v[1])
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::CylinderCurve;
    use super::*;

    #[test]
    fn svg_marks_corners_and_edges() {
        let g = EmbeddedGraph::new().with(CylinderCurve::reducible_line(0.1), EdgeLabel::ReducibleLine);
        let svg = graph_svg(&g, &SvgOptions::default());
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.contains("reducible-line"));
        assert!(!svg.contains("metadata"));
    }

    #[test]
    fn csv_has_one_row_per_vertex() {
        let g = EmbeddedGraph::new().with(CylinderCurve::vertical_circle(1.0, 0.5), EdgeLabel::Other);
        let csv = graph_csv(&g);
        assert_eq!(csv.lines().count(), 1 + g.vertex_count());
    }
}
