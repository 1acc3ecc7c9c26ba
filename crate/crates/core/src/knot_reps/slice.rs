use super::group::{knot_group, KnotGroup, KnotSpec};
use super::image::{sample_group_image, ImageCurve, ImageOptions, SliceSolver};
use super::solver::RepAssignment;
use super::su2::Su2;
use super::KnotError;
use crate::pillowcase::CylinderCurve;
use crate::torus_dynamics::point::{wrap_angle, wrap_signed};
use serde::{Deserialize, Serialize};

/// A representation whose peripheral image lies on the slice curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRep {
    pub alpha: f64,
    pub beta: f64,
    pub assignment: RepAssignment,
    /// Index of the image arc, or `None` for the reducible line.
    pub arc: Option<usize>,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Lifted copy of segment `c → d` near the reference point `a`.
fn lift_segment(a: [f64; 2], c: [f64; 2], d: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let c1 = a[1] + wrap_signed(c[1] - a[1]);
    let d1 = c1 + wrap_signed(d[1] - c[1]);
    ([c[0], c1], [d[0], d1])
}

/// Intersection parameters `(t, u)` of segments `a → b` and `c → d` in the
/// cylinder, with `t ∈ [0, t_max)`, `u ∈ [0, u_max)`.
pub fn segment_intersection(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], closed_t: bool, closed_u: bool) -> Option<(f64, f64)> {
    let b = [b[0], a[1] + wrap_signed(b[1] - a[1])];
    let (c, d) = lift_segment(a, c, d);
    let r = [b[0] - a[0], b[1] - a[1]];
    let s = [d[0] - c[0], d[1] - c[1]];
    let den = cross(r, s);
    if den.abs() < 1e-300 {
        return None;
    }
    let ca = [c[0] - a[0], c[1] - a[1]];
    let t = cross(ca, s) / den;
    let u = cross(ca, r) / den;
    let t_ok = t >= 0.0 && (t < 1.0 || (closed_t && t <= 1.0));
    let u_ok = u >= 0.0 && (u < 1.0 || (closed_u && u <= 1.0));
    (t_ok && u_ok).then_some((t, u))
}

/// Distance from a point to a polyline in the cylinder.
pub fn polyline_distance(p: [f64; 2], curve: &CylinderCurve) -> f64 {
    let v = &curve.vertices;
    if v.len() == 1 {
        return (p[0] - v[0][0]).hypot(wrap_signed(p[1] - v[0][1]));
    }
    curve
        .edges()
        .map(|(i, j)| {
            let (c, d) = lift_segment(p, v[i], v[j]);
            let s = [d[0] - c[0], d[1] - c[1]];
            let l2 = s[0] * s[0] + s[1] * s[1];
            let u = if l2 == 0.0 {
                0.0
            } else {
                (((p[0] - c[0]) * s[0] + (p[1] - c[1]) * s[1]) / l2).clamp(0.0, 1.0)
            };
            (p[0] - c[0] - u * s[0]).hypot(p[1] - c[1] - u * s[1])
        })
        .fold(f64::INFINITY, f64::min)
}

/// Raw polyline crossings `(arc, arc segment, slice segment)`; the arc
/// index `None` stands for the reducible line.
pub fn raw_crossings(image: &ImageCurve, s: &CylinderCurve) -> Vec<(Option<usize>, usize, usize)> {
    let mut out = Vec::new();
    let curves: Vec<(Option<usize>, &CylinderCurve)> = image
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| (Some(i), &a.curve))
        .chain(std::iter::once((None, &image.reducible_line)))
        .collect();
    let s_edges: Vec<(usize, usize)> = s.edges().collect();
    for (label, curve) in curves {
        let edges: Vec<(usize, usize)> = curve.edges().collect();
        for (k, &(i, j)) in edges.iter().enumerate() {
            let last_k = k + 1 == edges.len() && !curve.closed;
            for (m, &(p, q)) in s_edges.iter().enumerate() {
                let last_m = m + 1 == s_edges.len() && !s.closed;
                if segment_intersection(curve.vertices[i], curve.vertices[j], s.vertices[p], s.vertices[q], last_k, last_m).is_some() {
                    out.push((label, k, m));
                }
            }
        }
    }
    out
}

/// Signed distance of `(alpha, beta)` from the line through slice segment
/// `m`, with β lifted near the segment.
fn line_offset(s: &CylinderCurve, m: usize, alpha: f64, beta: f64) -> f64 {
    let (p, q) = s.edges().nth(m).expect("segment index in range");
    let c = s.vertices[p];
    let d = [s.vertices[q][0], c[1] + wrap_signed(s.vertices[q][1] - c[1])];
    let b = c[1] + wrap_signed(beta - c[1]);
    let dir = [d[0] - c[0], d[1] - c[1]];
    let len = dir[0].hypot(dir[1]);
    cross(dir, [alpha - c[0], b - c[1]]) / len
}

/// Refines a crossing of arc segment `k` with slice segment `m` by the
/// Illinois variant of regula falsi in α.
fn refine_arc_crossing(
    solver: &SliceSolver,
    image: &ImageCurve,
    arc: usize,
    k: usize,
    s: &CylinderCurve,
    m: usize,
) -> Option<SliceRep> {
    let a = &image.arcs[arc];
    let (v0, v1) = (a.curve.vertices[k], a.curve.vertices[k + 1]);
    let (w0, w1) = (&a.witnesses[k], &a.witnesses[k + 1]);
    let (mut x0, mut x1) = (v0[0], v1[0]);
    let (mut g0, mut g1) = (line_offset(s, m, v0[0], v0[1]), line_offset(s, m, v1[0], v1[1]));
    let mut best: Option<(f64, f64, RepAssignment, f64)> = None;
    for (x, w, g) in [(x0, w0, g0), (x1, w1, g1)] {
        if best.as_ref().map_or(true, |b| g.abs() < b.3) {
            let beta = if x == x0 { v0[1] } else { v1[1] };
            best = Some((x, beta, w.clone(), g.abs()));
        }
    }
    if g0 * g1 <= 0.0 {
        for _ in 0..100 {
            if best.as_ref().map_or(false, |b| b.3 < 1e-13) || (x1 - x0).abs() < 1e-15 {
                break;
            }
            let x = (x0 * g1 - x1 * g0) / (g1 - g0);
            let warm = if (x - v0[0]).abs() < (x - v1[0]).abs() { w0 } else { w1 };
            let warm = best.as_ref().map(|b| &b.2).filter(|r| r.distance(warm) < 0.5).unwrap_or(warm);
            let (rep, beta) = solver.solve(x, &warm.images)?;
            let g = line_offset(s, m, x, beta);
            if best.as_ref().map_or(true, |b| g.abs() < b.3) {
                best = Some((x, beta, rep, g.abs()));
            }
            if g * g1 < 0.0 {
                x0 = x1;
                g0 = g1;
            } else {
                g0 *= 0.5;
            }
            x1 = x;
            g1 = g;
        }
    }
    let (alpha, beta, assignment, _) = best?;
    Some(SliceRep {
        alpha,
        beta: wrap_angle(beta),
        assignment,
        arc: Some(arc),
    })
}

/// Abelian representation `g_k ↦ diag(w_k α)` on the reducible line.
pub fn abelian_rep(group: &KnotGroup, alpha: f64) -> RepAssignment {
    let images = group
        .abelian_weights
        .iter()
        .map(|&w| Su2::diag(w as f64 * alpha))
        .collect();
    RepAssignment::new(images, &group.presentation)
}

/// Representations with peripheral image on the slice `s`, from an already
/// sampled image curve.
pub fn solve_on_slice_with(group: &KnotGroup, image: &ImageCurve, s: &CylinderCurve, opts: &ImageOptions) -> Vec<SliceRep> {
    let solver = SliceSolver::new(group, *opts);
    let n_seg = s.edges().count();
    let mut out: Vec<SliceRep> = Vec::new();
    for (label, k, m) in raw_crossings(image, s) {
        let rep = match label {
            Some(arc) => [m, (m + n_seg - 1) % n_seg, (m + 1) % n_seg]
                .into_iter()
                .filter_map(|mm| refine_arc_crossing(&solver, image, arc, k, s, mm))
                .find(|r| polyline_distance([r.alpha, r.beta], s) <= 1e-9),
            None => {
                let (p, q) = s.edges().nth(m).expect("segment index in range");
                let (c, d) = lift_segment([0.0, 0.0], s.vertices[p], s.vertices[q]);
                let u = -c[1] / (d[1] - c[1]);
                let alpha = c[0] + u * (d[0] - c[0]);
                Some(SliceRep {
                    alpha,
                    beta: 0.0,
                    assignment: abelian_rep(group, alpha),
                    arc: None,
                })
            }
        };
        if let Some(r) = rep {
            let dup = out
                .iter()
                .any(|o| o.arc == r.arc && (o.alpha - r.alpha).abs() < 1e-9 && wrap_signed(o.beta - r.beta).abs() < 1e-9);
            if !dup {
                out.push(r);
            }
        }
    }
    out
}

/// All representations of the knot group whose peripheral image lies on
/// the curve `s`.
pub fn solve_rep_on_slice(spec: &KnotSpec, s: &CylinderCurve, opts: &ImageOptions) -> Result<Vec<SliceRep>, KnotError> {
    let group = knot_group(spec)?;
    let image = sample_group_image(&group, &spec.name(), opts)?;
    Ok(solve_on_slice_with(&group, &image, s, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn crossing_segments() {
        let hit = segment_intersection([0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0], false, false);
        let (t, u) = hit.unwrap();
        assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
        // across the β seam
        assert!(segment_intersection([1.0, 6.2], [1.0, 0.1], [0.5, 0.0], [1.5, 0.0], false, false).is_some());
    }

    #[test]
    fn unknot_misses_beta_pi() {
        let s = CylinderCurve::segment([0.0, PI], [PI, PI], 0.1);
        let reps = solve_rep_on_slice(&KnotSpec::Unknot, &s, &ImageOptions { n_samples: 8, restarts: 4, ..Default::default() }).unwrap();
        assert!(reps.is_empty());
    }
}
