use super::group::{knot_group, splice_presentation, KnotGroup, KnotSpec, SplicePresentation};
use super::image::{sample_group_image, ImageCurve, ImageOptions, SliceSolver};
use super::slice::segment_intersection;
use super::solver::{noncommutativity, relator_residual, LmOptions, RepAssignment, RepProblem};
use super::su2::Su2;
use super::KnotError;
use crate::torus_dynamics::point::wrap_signed;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpliceOptions {
    pub image: ImageOptions,
    pub newton_tol: f64,
    pub newton_iter: usize,
    /// Commutator distance required for the irreducibility flags.
    pub irreducible_threshold: f64,
}

impl Default for SpliceOptions {
    fn default() -> Self {
        Self {
            image: ImageOptions::default(),
            newton_tol: 1e-13,
            newton_iter: 40,
            irreducible_threshold: 1e-3,
        }
    }
}

/// A representation of the spliced group assembled from one representation
/// of each factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpliceRep {
    pub splice: SplicePresentation,
    pub assignment: RepAssignment,
    /// Boundary angles of the first factor.
    pub alpha: f64,
    pub beta: f64,
    /// Boundary angles of the second factor before alignment.
    pub alpha_right: f64,
    pub beta_right: f64,
    /// Whether the second factor was conjugated by `j` to align the tori.
    pub flipped: bool,
    pub irreducible: bool,
    pub left_irreducible: bool,
    pub right_irreducible: bool,
    pub left_residual: f64,
    pub right_residual: f64,
}

impl SpliceRep {
    pub fn left_images(&self) -> &[Su2] {
        &self.assignment.images[..self.splice.left_generators()]
    }

    pub fn right_images(&self) -> &[Su2] {
        &self.assignment.images[self.splice.left_generators()..]
    }
}

struct Candidate {
    arc: usize,
    seg: usize,
    t: f64,
    arc2: usize,
    seg2: usize,
    u: f64,
    flipped: bool,
}

/// Swapped image of a point `(α′, β′)` of the second factor: the pair
/// `(β′, α′)`, or its τ-image when β′ > π.
fn swap(v: [f64; 2]) -> ([f64; 2], bool) {
    if v[1] <= PI {
        ([v[1], v[0]], false)
    } else {
        ([TAU - v[1], TAU - v[0]], true)
    }
}

fn candidates(left: &ImageCurve, right: &ImageCurve) -> Vec<Candidate> {
    let (dl_lo, dl_hi) = left.corner_margins();
    let (dr_lo, dr_hi) = right.corner_margins();
    let mut out = Vec::new();
    for (i, a) in left.arcs.iter().enumerate() {
        let va = &a.curve.vertices;
        for (j, b) in right.arcs.iter().enumerate() {
            let vb = &b.curve.vertices;
            for k in 0..va.len().saturating_sub(1) {
                for m in 0..vb.len().saturating_sub(1) {
                    let (c, f1) = swap(vb[m]);
                    let (d, f2) = swap(vb[m + 1]);
                    if f1 != f2 {
                        continue;
                    }
                    if let Some((t, u)) = segment_intersection(va[k], va[k + 1], c, d, false, false) {
                        let alpha = va[k][0] + t * (va[k + 1][0] - va[k][0]);
                        let alpha2 = vb[m][0] + u * (vb[m + 1][0] - vb[m][0]);
                        if alpha > dl_lo && alpha < PI - dl_hi && alpha2 > dr_lo && alpha2 < PI - dr_hi {
                            out.push(Candidate {
                                arc: i,
                                seg: k,
                                t,
                                arc2: j,
                                seg2: m,
                                u,
                                flipped: f1,
                            });
                        }
                    }
                }
            }
        }
    }
    // intersections inside the unflipped square first
    out.sort_by_key(|c| c.flipped);
    out
}

fn lerp_witness(image: &ImageCurve, arc: usize, seg: usize, t: f64) -> (f64, RepAssignment) {
    let a = &image.arcs[arc];
    let v0 = a.curve.vertices[seg];
    let v1 = a.curve.vertices[seg + 1];
    let w = if t < 0.5 { &a.witnesses[seg] } else { &a.witnesses[seg + 1] };
    (v0[0] + t * (v1[0] - v0[0]), w.clone())
}

struct Branch<'a> {
    solver: SliceSolver<'a>,
    alpha: f64,
    rep: RepAssignment,
    beta: f64,
}

impl Branch<'_> {
    fn solve(&self, alpha: f64) -> Option<(RepAssignment, f64)> {
        let (rep, beta) = self.solver.solve(alpha, &self.rep.images)?;
        (rep.distance(&self.rep) < 0.5).then_some((rep, beta))
    }

    fn update(&mut self, alpha: f64) -> bool {
        match self.solve(alpha) {
            Some((rep, beta)) => {
                self.alpha = alpha;
                self.rep = rep;
                self.beta = beta;
                true
            }
            None => false,
        }
    }

    fn slope(&self) -> Option<f64> {
        let h = 1e-6;
        let (_, bp) = self.solve(self.alpha + h)?;
        let (_, bm) = self.solve(self.alpha - h)?;
        Some(wrap_signed(bp - bm) / (2.0 * h))
    }
}

fn refine(left: &mut Branch, right: &mut Branch, sigma: f64, opts: &SpliceOptions) -> bool {
    for _ in 0..opts.newton_iter {
        let f1 = wrap_signed(left.beta - sigma * right.alpha);
        let f2 = wrap_signed(right.beta - sigma * left.alpha);
        if f1.abs().max(f2.abs()) < opts.newton_tol {
            return true;
        }
        let (Some(s1), Some(s2)) = (left.slope(), right.slope()) else {
            return false;
        };
        // J = [[s1, −σ], [−σ, s2]]
        let det = s1 * s2 - 1.0;
        if det.abs() < 1e-14 {
            return false;
        }
        let da = -(s2 * f1 + sigma * f2) / det;
        let db = -(sigma * f1 + s1 * f2) / det;
        if !left.update(left.alpha + da) || !right.update(right.alpha + db) {
            return false;
        }
    }
    let f1 = wrap_signed(left.beta - sigma * right.alpha);
    let f2 = wrap_signed(right.beta - sigma * left.alpha);
    f1.abs().max(f2.abs()) < 1e-10
}

fn assemble(
    splice: &SplicePresentation,
    left: &Branch,
    right: &Branch,
    flipped: bool,
    opts: &SpliceOptions,
) -> Option<SpliceRep> {
    let g1 = splice.left_generators();
    let order = if flipped { [Su2::J, Su2::IDENTITY] } else { [Su2::IDENTITY, Su2::J] };
    for c in order {
        let mut images = left.rep.images.clone();
        images.extend(right.rep.images.iter().map(|g| g.conjugate_by(c)));
        let mut rep = RepAssignment::new(images, &splice.presentation);
        if rep.residual > opts.image.rep_tol {
            continue;
        }
        let problem = RepProblem {
            generators: splice.presentation.generators,
            relators: &splice.presentation.relators,
            targets: vec![],
            gauge: None,
        };
        let polished = problem.solve(&rep.images, &LmOptions::default());
        let candidate = RepAssignment::new(polished.images, &splice.presentation);
        if candidate.residual < rep.residual {
            rep = candidate;
        }
        let left_imgs = &rep.images[..g1];
        let right_imgs = &rep.images[g1..];
        let right_rel: Vec<Vec<i32>> = splice.right.presentation.relators.clone();
        let thr = opts.irreducible_threshold;
        return Some(SpliceRep {
            splice: splice.clone(),
            alpha: left.alpha,
            beta: left.beta,
            alpha_right: right.alpha,
            beta_right: right.beta,
            flipped: c == Su2::J,
            irreducible: noncommutativity(&rep.images) >= thr,
            left_irreducible: noncommutativity(left_imgs) >= thr,
            right_irreducible: noncommutativity(right_imgs) >= thr,
            left_residual: relator_residual(left_imgs, &splice.left.presentation.relators),
            right_residual: relator_residual(right_imgs, &right_rel),
            assignment: rep,
        });
    }
    None
}

/// Irreducible representation of the spliced group, built from an
/// intersection of the first image curve with the swapped second one.
pub fn find_splice_rep(k: &KnotSpec, k2: &KnotSpec, opts: &SpliceOptions) -> Result<SpliceRep, KnotError> {
    let splice = splice_presentation(k, k2)?;
    let gl: KnotGroup = knot_group(k)?;
    let gr: KnotGroup = knot_group(k2)?;
    let left = sample_group_image(&gl, &k.name(), &opts.image)?;
    let right = sample_group_image(&gr, &k2.name(), &opts.image)?;
    let cands = candidates(&left, &right);
    let tried = cands.len();
    for c in cands {
        let (a0, w0) = lerp_witness(&left, c.arc, c.seg, c.t);
        let (b0, v0) = lerp_witness(&right, c.arc2, c.seg2, c.u);
        let mut lb = Branch {
            solver: SliceSolver::new(&gl, opts.image),
            alpha: a0,
            beta: 0.0,
            rep: w0,
        };
        let mut rb = Branch {
            solver: SliceSolver::new(&gr, opts.image),
            alpha: b0,
            beta: 0.0,
            rep: v0,
        };
        if !lb.update(a0) || !rb.update(b0) {
            continue;
        }
        let sigma = if c.flipped { -1.0 } else { 1.0 };
        if !refine(&mut lb, &mut rb, sigma, opts) {
            continue;
        }
        if let Some(rep) = assemble(&splice, &lb, &rb, c.flipped, opts) {
            if rep.irreducible && rep.left_irreducible && rep.right_irreducible {
                return Ok(rep);
            }
        }
    }
    Err(KnotError::NoIntersection(format!(
        "{} arcs for {}, {} arcs for {}, {} candidate crossings tried",
        left.arcs.len(),
        k.name(),
        right.arcs.len(),
        k2.name(),
        tried
    )))
}
