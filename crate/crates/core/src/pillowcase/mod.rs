//! The pillowcase T²/τ, its cut-open cylinder C = [0, π] × R/2πZ, winding
//! numbers of closed curves in C, and a raster separation test.
//!
//! Coordinates are `(alpha, beta)` in radians. The canonical fundamental
//! domain is `[0, π] × [0, 2π)`, with `(0, β) ~ (0, −β)` and
//! `(π, β) ~ (π, −β)` on the two boundary lines.

mod raster;
mod render;

pub use raster::{has_essential_cycle, separates, separates_converged, separates_with, RasterMode};
pub use render::{graph_csv, graph_svg, SvgOptions};

use crate::torus_dynamics::point::{wrap_angle, wrap_signed, TorusPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Tolerance below which an edge counts as antipodal in the circle factor.
const LIFT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PillowcaseError {
    #[error("edge {index} spans half the circle factor; lift is ambiguous")]
    AmbiguousLift { index: usize },
    #[error("winding number requires a closed curve")]
    NotClosed,
    #[error("point ({alpha}, {beta}) lies within one raster cell of the graph")]
    PointOnGraph { alpha: f64, beta: f64 },
    #[error("resolution must be at least 4, got {0}")]
    BadResolution(usize),
    #[error("separation did not stabilise up to resolution {0}")]
    NotConverged(usize),
}

/// Canonical point of the pillowcase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PillowcasePoint {
    pub alpha: f64,
    pub beta: f64,
}

impl PillowcasePoint {
    /// The corner (0, π).
    pub const P: Self = Self { alpha: 0.0, beta: PI };
    /// The corner (π, π).
    pub const Q: Self = Self { alpha: PI, beta: PI };

    pub fn new(alpha: f64, beta: f64) -> Self {
        project(TorusPoint::new(alpha, beta))
    }

    /// One preimage in the torus.
    pub fn lift(self) -> TorusPoint {
        TorusPoint::new(self.alpha, self.beta)
    }

    pub fn is_singular(self) -> bool {
        singular_points().contains(&self)
    }
}

/// The four fixed points of τ.
pub fn singular_points() -> [PillowcasePoint; 4] {
    [
        PillowcasePoint { alpha: 0.0, beta: 0.0 },
        PillowcasePoint { alpha: PI, beta: 0.0 },
        PillowcasePoint { alpha: 0.0, beta: PI },
        PillowcasePoint { alpha: PI, beta: PI },
    ]
}

/// Canonical representative of the τ-orbit of `p`.
pub fn project(p: TorusPoint) -> PillowcasePoint {
    let mut a = wrap_angle(p.x);
    let mut b = wrap_angle(p.y);
    if a > PI {
        a = TAU - a;
        b = wrap_angle(-b);
    }
    if (a == 0.0 || a == PI) && b > PI {
        b = TAU - b;
    }
    PillowcasePoint { alpha: a, beta: b }
}

/// Polyline in the cylinder C. Vertices are `[alpha, beta]`; `beta` is read
/// modulo 2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderCurve {
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
}

impl CylinderCurve {
    pub fn open(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices, closed: false }
    }

    pub fn closed(vertices: Vec<[f64; 2]>) -> Self {
        Self { vertices, closed: true }
    }

    /// Straight segment from `a` to `b` (β measured along the shorter way),
    /// subdivided so that every edge is at most `max_edge`.
    pub fn segment(a: [f64; 2], b: [f64; 2], max_edge: f64) -> Self {
        let d = [b[0] - a[0], wrap_signed(b[1] - a[1])];
        let n = (d[0].hypot(d[1]) / max_edge).ceil().max(1.0) as usize;
        let vertices = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                [a[0] + s * d[0], wrap_angle(a[1] + s * d[1])]
            })
            .collect();
        Self::open(vertices)
    }

    /// The reducible line {β = 0} from α = 0 to α = π.
    pub fn reducible_line(max_edge: f64) -> Self {
        Self::segment([0.0, 0.0], [PI, 0.0], max_edge)
    }

    /// The circle {α = a}.
    pub fn vertical_circle(a: f64, max_edge: f64) -> Self {
        let n = (TAU / max_edge).ceil() as usize;
        Self::closed((0..n).map(|i| [a, TAU * i as f64 / n as f64]).collect())
    }

    /// Edge list as index pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.vertices.len();
        let m = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (i, (i + 1) % n))
    }

    /// Longest edge in the cylinder metric.
    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .map(|(i, j)| {
                let a = self.vertices[i];
                let b = self.vertices[j];
                (b[0] - a[0]).hypot(wrap_signed(b[1] - a[1]))
            })
            .fold(0.0, f64::max)
    }

    /// Net change of the lifted β along the polyline.
    pub fn lifted_beta_change(&self) -> Result<f64, PillowcaseError> {
        let mut total = 0.0;
        for (k, (i, j)) in self.edges().enumerate() {
            let d = wrap_signed(self.vertices[j][1] - self.vertices[i][1]);
            if d.abs() >= PI - LIFT_EPS {
                return Err(PillowcaseError::AmbiguousLift { index: k });
            }
            total += d;
        }
        Ok(total)
    }

    /// Winding number of a closed curve around the circle factor of C.
    pub fn winding_number(&self) -> Result<i64, PillowcaseError> {
        if !self.closed {
            return Err(PillowcaseError::NotClosed);
        }
        Ok((self.lifted_beta_change()? / TAU).round() as i64)
    }
}

/// Free-function form of [`CylinderCurve::winding_number`].
pub fn winding_number(curve: &CylinderCurve) -> Result<i64, PillowcaseError> {
    curve.winding_number()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLabel {
    IrreducibleArc,
    ReducibleLine,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub curve: CylinderCurve,
    pub label: EdgeLabel,
}

/// Finite graph embedded in the pillowcase, stored as labelled polylines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedGraph {
    pub edges: Vec<GraphEdge>,
}

impl EmbeddedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, curve: CylinderCurve, label: EdgeLabel) {
        self.edges.push(GraphEdge { curve, label });
    }

    pub fn with(mut self, curve: CylinderCurve, label: EdgeLabel) -> Self {
        self.push(curve, label);
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.edges.iter().map(|e| e.curve.vertices.len()).sum()
    }
}
