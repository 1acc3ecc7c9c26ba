use super::group::{knot_group, KnotGroup, KnotSpec};
use super::solver::{canonicalize_gauge, random_su2, LmOptions, RepAssignment, RepProblem};
use super::su2::Su2;
use super::KnotError;
use crate::pillowcase::{CylinderCurve, EdgeLabel, EmbeddedGraph};
use crate::torus_dynamics::point::wrap_signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageOptions {
    /// Number of α grid intervals on (0, π).
    pub n_samples: usize,
    /// Random starts per grid angle.
    pub restarts: usize,
    pub max_edge: f64,
    pub seed: u64,
    pub rep_tol: f64,
    /// Commutator distance below which a solution counts as reducible.
    pub irreducible_tol: f64,
    /// Endpoint bisection stops at this α spacing.
    pub endpoint_tol: f64,
    /// Largest allowed change of generator images between neighbours.
    pub jump_tol: f64,
    pub lm: LmOptions,
}

impl Default for ImageOptions {
    fn default() -> Self {
        Self {
            n_samples: 48,
            restarts: 32,
            max_edge: 0.1,
            seed: 0,
            rep_tol: 1e-9,
            irreducible_tol: 1e-6,
            endpoint_tol: 1e-10,
            jump_tol: 0.5,
            lm: LmOptions::default(),
        }
    }
}

/// A traced arc of irreducible representations with one witness per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageArc {
    pub curve: CylinderCurve,
    pub witnesses: Vec<RepAssignment>,
}

impl ImageArc {
    pub fn endpoints(&self) -> [[f64; 2]; 2] {
        let v = &self.curve.vertices;
        [v[0], v[v.len() - 1]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImageNote {
    /// No restart converged at this grid angle.
    NoConvergence { alpha: f64 },
    /// No irreducible representations were found.
    EmptyIrreducibleLocus,
}

/// Sampled image of the representation variety in the pillowcase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageCurve {
    pub knot: String,
    pub arcs: Vec<ImageArc>,
    pub reducible_line: CylinderCurve,
    pub notes: Vec<ImageNote>,
    /// Grid spacing in α used by the sweep.
    pub grid_step: f64,
}

impl ImageCurve {
    /// Arcs and the reducible line as a labelled graph.
    pub fn graph(&self) -> EmbeddedGraph {
        let mut g = EmbeddedGraph::new();
        for a in &self.arcs {
            g.push(a.curve.clone(), EdgeLabel::IrreducibleArc);
        }
        g.push(self.reducible_line.clone(), EdgeLabel::ReducibleLine);
        g
    }

    /// Closed curves formed by each arc whose ends lie on {β = 0}, closed
    /// up along the reducible line.
    pub fn arc_closures(&self, max_edge: f64) -> Vec<CylinderCurve> {
        self.arcs
            .iter()
            .filter(|a| {
                let [s, e] = a.endpoints();
                wrap_signed(s[1]).abs() < 1e-6 && wrap_signed(e[1]).abs() < 1e-6
            })
            .map(|a| {
                let [s, e] = a.endpoints();
                let back = CylinderCurve::segment([e[0], 0.0], [s[0], 0.0], max_edge);
                let mut v = a.curve.vertices.clone();
                v.extend(back.vertices.into_iter().skip(1));
                v.pop();
                CylinderCurve::closed(v)
            })
            .collect()
    }

    /// All arc endpoints.
    pub fn endpoints(&self) -> Vec<[f64; 2]> {
        self.arcs.iter().flat_map(|a| a.endpoints()).collect()
    }

    /// Corner margins `(δ_low, δ_high)`: distance of the witnesses from
    /// α = 0 and α = π, less one grid step, floored at 1e-2.
    pub fn corner_margins(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (PI, 0.0f64);
        for a in &self.arcs {
            for v in &a.curve.vertices {
                lo = lo.min(v[0]);
                hi = hi.max(v[0]);
            }
        }
        ((lo - self.grid_step).max(1e-2), (PI - hi - self.grid_step).max(1e-2))
    }
}

/// Solver for representations with the meridian on the maximal torus.
pub struct SliceSolver<'a> {
    pub group: &'a KnotGroup,
    pub opts: ImageOptions,
}

impl<'a> SliceSolver<'a> {
    pub fn new(group: &'a KnotGroup, opts: ImageOptions) -> Self {
        Self { group, opts }
    }

    fn gauge(&self) -> Option<usize> {
        (self.group.generators() >= 2).then_some(1)
    }

    /// Solves at meridian angle `alpha` from `init`; returns the gauge-fixed
    /// assignment and β, or `None` if the solver does not converge.
    pub fn solve(&self, alpha: f64, init: &[Su2]) -> Option<(RepAssignment, f64)> {
        let problem = RepProblem {
            generators: self.group.generators(),
            relators: &self.group.presentation.relators,
            targets: vec![(self.group.meridian.clone(), Su2::diag(alpha))],
            gauge: self.gauge(),
        };
        let out = problem.solve(init, &self.opts.lm);
        if !out.converged {
            return None;
        }
        let images = canonicalize_gauge(&out.images, self.gauge().unwrap_or(0));
        let rep = RepAssignment::new(images, &self.group.presentation);
        if rep.residual > self.opts.rep_tol {
            return None;
        }
        let (_, beta) = rep.peripheral_angles(self.group);
        Some((rep, beta))
    }

    /// Irreducible solution near `init`, rejecting jumps.
    fn solve_irreducible(&self, alpha: f64, init: &RepAssignment) -> Option<(RepAssignment, f64)> {
        let (rep, beta) = self.solve(alpha, &init.images)?;
        if rep.noncommutativity() <= self.opts.irreducible_tol || rep.distance(init) > self.opts.jump_tol {
            return None;
        }
        Some((rep, beta))
    }

    /// Continues an arc from `(alpha, rep)` in direction `dir` until the
    /// irreducible branch ends. Every grid angle passed is a vertex.
    fn trace(&self, alpha: f64, beta: f64, rep: &RepAssignment, dir: f64, grid: &[f64]) -> Vec<(f64, f64, RepAssignment)> {
        let mut out = Vec::new();
        let (mut a, mut b, mut cur) = (alpha, beta, rep.clone());
        let bound = if dir > 0.0 { PI } else { 0.0 };
        let step0 = grid.get(1).map_or(PI / 8.0, |g| g - grid[0]);
        let mut step = step0;
        loop {
            let target = if dir > 0.0 {
                grid.iter().copied().find(|&g| g - a > 1e-13).unwrap_or(bound)
            } else {
                grid.iter().rev().copied().find(|&g| a - g > 1e-13).unwrap_or(bound)
            };
            let remaining = (target - a).abs();
            let h = step.min(remaining);
            let next = if h == remaining { target } else { a + dir * h };
            let accepted = self.solve_irreducible(next, &cur).filter(|&(_, nb)| {
                (next - a).hypot(wrap_signed(nb - b)) <= self.opts.max_edge
            });
            match accepted {
                Some((rep, nb)) => {
                    a = next;
                    b = nb;
                    cur = rep.clone();
                    out.push((a, b, rep));
                    step = (2.0 * h).min(step0);
                }
                None => {
                    step = h / 2.0;
                    if step < self.opts.endpoint_tol {
                        return out;
                    }
                }
            }
        }
    }
}

/// Samples the image of the SU(2) representation variety in the
/// pillowcase: an α-sweep with random restarts, arcs continued by
/// predictor–corrector in α, and endpoints refined by bisection.
pub fn sample_image_curve(spec: &KnotSpec, opts: &ImageOptions) -> Result<ImageCurve, KnotError> {
    let group = knot_group(spec)?;
    sample_group_image(&group, &spec.name(), opts)
}

/// [`sample_image_curve`] for an already constructed group.
pub fn sample_group_image(group: &KnotGroup, name: &str, opts: &ImageOptions) -> Result<ImageCurve, KnotError> {
    let n = opts.n_samples.max(4);
    let grid: Vec<f64> = (1..n).map(|k| PI * k as f64 / n as f64).collect();
    let grid_step = PI / n as f64;
    let reducible_line = CylinderCurve::reducible_line(opts.max_edge);
    let mut notes = Vec::new();
    let solver = SliceSolver::new(group, *opts);
    let g = group.generators();
    // independent restarts per grid angle
    let seeds: Vec<(usize, bool, Vec<(RepAssignment, f64)>)> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
            let mut any = false;
            let mut found: Vec<(RepAssignment, f64)> = Vec::new();
            for _ in 0..opts.restarts {
                let init: Vec<Su2> = (0..g).map(|_| random_su2(&mut rng)).collect();
                if let Some((rep, beta)) = solver.solve(alpha, &init) {
                    any = true;
                    if rep.noncommutativity() > 1e-6 && !found.iter().any(|(r, _)| r.distance(&rep) < 1e-6) {
                        found.push((rep, beta));
                    }
                }
            }
            (k, any, found)
        })
        .collect();
    let mut arcs: Vec<ImageArc> = Vec::new();
    for (k, any, found) in seeds {
        let alpha = grid[k];
        if !any {
            notes.push(ImageNote::NoConvergence { alpha });
        }
        for (rep, beta) in found {
            let known = arcs.iter().any(|arc| {
                arc.curve
                    .vertices
                    .iter()
                    .zip(&arc.witnesses)
                    .any(|(v, w)| v[0] == alpha && w.distance(&rep) < 1e-6)
            });
            if known {
                continue;
            }
            let back = solver.trace(alpha, beta, &rep, -1.0, &grid);
            let fwd = solver.trace(alpha, beta, &rep, 1.0, &grid);
            let mut verts = Vec::with_capacity(back.len() + fwd.len() + 1);
            let mut wits = Vec::with_capacity(verts.capacity());
            for (a, b, r) in back.into_iter().rev() {
                verts.push([a, b]);
                wits.push(r);
            }
            verts.push([alpha, beta]);
            wits.push(rep);
            for (a, b, r) in fwd {
                verts.push([a, b]);
                wits.push(r);
            }
            arcs.push(ImageArc {
                curve: CylinderCurve::open(verts),
                witnesses: wits,
            });
        }
    }
    if arcs.is_empty() {
        notes.push(ImageNote::EmptyIrreducibleLocus);
    }
    arcs.sort_by(|a, b| a.curve.vertices[0][0].total_cmp(&b.curve.vertices[0][0]));
    Ok(ImageCurve {
        knot: name.to_string(),
        arcs,
        reducible_line,
        notes,
        grid_step,
    })
}

/// Integer coefficients (ascending powers) of the normalized Alexander
/// polynomial; `None` for custom presentations.
pub fn alexander_polynomial(spec: &KnotSpec) -> Option<Vec<i64>> {
    match *spec {
        KnotSpec::Unknot => Some(vec![1]),
        KnotSpec::TorusKnot { p, q } => {
            let (p, q) = (p.unsigned_abs() as usize, q.unsigned_abs() as usize);
            let binom = |d: usize| {
                let mut v = vec![0i64; d + 1];
                v[0] = -1;
                v[d] = 1;
                v
            };
            let num = poly_mul(&binom(p * q), &binom(1));
            let den = poly_mul(&binom(p), &binom(q));
            Some(poly_div_exact(&num, &den))
        }
        KnotSpec::Custom { .. } => None,
    }
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dl = den.len();
    let lead = den[dl - 1];
    let mut quot = vec![0i64; num.len() - dl + 1];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dl - 1] / lead;
        quot[k] = c;
        for (j, d) in den.iter().enumerate() {
            rem[k + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Angles α ∈ (0, π) with Δ(e^{2iα}) = 0.
pub fn alexander_endpoint_angles(spec: &KnotSpec) -> Result<Vec<f64>, KnotError> {
    let coeffs = alexander_polynomial(spec).ok_or(KnotError::Unsupported("alexander polynomial of a custom presentation"))?;
    let d = coeffs.len() - 1;
    if d == 0 {
        return Ok(vec![]);
    }
    // e^{−idθ/2} Δ(e^{iθ}) is real for a symmetric polynomial
    let f = |theta: f64| -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * ((k as f64 - d as f64 / 2.0) * theta).cos())
            .sum()
    };
    let samples = 256 * d;
    let h = 2.0 * PI / samples as f64;
    let mut roots = Vec::new();
    for i in 0..samples {
        let (mut a, mut b) = (i as f64 * h, (i + 1) as f64 * h);
        let (mut fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            if a > 0.0 {
                roots.push(a / 2.0);
            }
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        let r = 0.5 * (a + b);
        if r < 2.0 * PI {
            roots.push(r / 2.0);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(roots)
}
