use super::{EmbeddedGraph, PillowcaseError, PillowcasePoint};
use crate::torus_dynamics::point::{wrap_angle, wrap_signed};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

/// Which picture the separation test rasterizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RasterMode {
    /// Double cover when an edge comes within two cells of a corner,
    /// pillowcase otherwise.
    #[default]
    Auto,
    /// Fundamental domain [0, π] × [0, 2π) with folded side edges.
    Pillowcase,
    /// The torus [0, 2π)², with every edge drawn together with its τ-image.
    DoubleCover,
}

/// Visits the grid cells crossed by the segment from `(u0, v0)` to
/// `(u1, v1)`, in cell units, in order.
fn traverse(u0: f64, v0: f64, u1: f64, v1: f64, mut visit: impl FnMut(i64, i64)) {
    let mut i = u0.floor() as i64;
    let mut j = v0.floor() as i64;
    let ie = u1.floor() as i64;
    let je = v1.floor() as i64;
    let du = u1 - u0;
    let dv = v1 - v0;
    let setup = |x0: f64, d: f64, c: i64| -> (i64, f64, f64) {
        if d > 0.0 {
            (1, ((c + 1) as f64 - x0) / d, 1.0 / d)
        } else if d < 0.0 {
            (-1, (x0 - c as f64) / -d, -1.0 / d)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (si, mut ti, dti) = setup(u0, du, i);
    let (sj, mut tj, dtj) = setup(v0, dv, j);
    visit(i, j);
    let steps = (ie - i).abs() + (je - j).abs();
    for _ in 0..steps {
        if ti < tj {
            i += si;
            ti += dti;
        } else {
            j += sj;
            tj += dtj;
        }
        visit(i, j);
    }
}

struct Raster {
    res: usize,
    double: bool,
    marked: Vec<bool>,
}

impl Raster {
    fn new(res: usize, double: bool) -> Self {
        Self {
            res,
            double,
            marked: vec![false; res * res],
        }
    }

    fn cell_size(&self) -> (f64, f64) {
        let r = self.res as f64;
        if self.double {
            (TAU / r, TAU / r)
        } else {
            (PI / r, TAU / r)
        }
    }

    fn wrap(&self, k: i64) -> usize {
        k.rem_euclid(self.res as i64) as usize
    }

    /// Cell index for integer coordinates, applying the identifications.
    fn cell(&self, i: i64, j: i64) -> (usize, usize) {
        if self.double {
            return (self.wrap(i), self.wrap(j));
        }
        let n = self.res as i64;
        let j = self.wrap(j);
        if i < 0 {
            (0, self.res - 1 - j)
        } else if i >= n {
            (self.res - 1, self.res - 1 - j)
        } else {
            (i as usize, j)
        }
    }

    fn locate(&self, alpha: f64, beta: f64) -> (usize, usize) {
        let (ca, cb) = self.cell_size();
        let a = if self.double { wrap_angle(alpha) } else { alpha.clamp(0.0, PI) };
        let i = ((a / ca).floor() as i64).min(self.res as i64 - 1);
        let i = if self.double { i } else { i.max(0) };
        self.cell(i, (wrap_angle(beta) / cb).floor() as i64)
    }

    fn mark(&mut self, i: usize, j: usize) {
        self.marked[i * self.res + j] = true;
    }

    fn is_marked(&self, i: usize, j: usize) -> bool {
        self.marked[i * self.res + j]
    }

    fn mark_segment(&mut self, a: [f64; 2], b: [f64; 2]) {
        let (ca, cb) = self.cell_size();
        let clamp = |x: f64| if self.double { x } else { x.clamp(0.0, PI) };
        let a0 = clamp(a[0]);
        let b0 = clamp(b[0]);
        let u0 = a0 / ca;
        let v0 = wrap_angle(a[1]) / cb;
        let u1 = b0 / ca;
        let v1 = v0 + wrap_signed(b[1] - a[1]) / cb;
        let last = self.res as i64 - 1;
        let double = self.double;
        let mut cells = Vec::new();
        traverse(u0, v0, u1, v1, |i, j| {
            let i = if double { i } else { i.clamp(0, last) };
            cells.push((i, j));
        });
        for (i, j) in cells {
            let (i, j) = self.cell(i, j);
            self.mark(i, j);
        }
    }

    fn draw(&mut self, graph: &EmbeddedGraph) {
        for e in &graph.edges {
            let c = &e.curve;
            if c.vertices.len() == 1 {
                let v = c.vertices[0];
                self.mark_segment(v, v);
                if self.double {
                    self.mark_segment([-v[0], -v[1]], [-v[0], -v[1]]);
                }
            }
            for (i, j) in c.edges() {
                let a = c.vertices[i];
                let b = c.vertices[j];
                self.mark_segment(a, b);
                if self.double {
                    self.mark_segment([-a[0], -a[1]], [-b[0], -b[1]]);
                }
            }
        }
    }

    fn neighbours4(&self, i: usize, j: usize) -> [(usize, usize); 4] {
        let (i, j) = (i as i64, j as i64);
        [
            self.cell(i + 1, j),
            self.cell(i - 1, j),
            self.cell(i, j + 1),
            self.cell(i, j - 1),
        ]
    }

    fn near_graph(&self, cell: (usize, usize)) -> bool {
        let (i, j) = (cell.0 as i64, cell.1 as i64);
        (-1..=1).any(|di| {
            (-1..=1).any(|dj| {
                let (a, b) = self.cell(i + di, j + dj);
                self.is_marked(a, b)
            })
        })
    }

    fn reaches(&self, from: (usize, usize), to: (usize, usize)) -> bool {
        let mut seen = vec![false; self.res * self.res];
        let mut queue = VecDeque::from([from]);
        seen[from.0 * self.res + from.1] = true;
        while let Some((i, j)) = queue.pop_front() {
            if (i, j) == to {
                return true;
            }
            for (a, b) in self.neighbours4(i, j) {
                let k = a * self.res + b;
                if !seen[k] && !self.marked[k] {
                    seen[k] = true;
                    queue.push_back((a, b));
                }
            }
        }
        false
    }
}

/// Whether some edge passes within `cells` pillowcase cells of a corner.
fn near_corner(graph: &EmbeddedGraph, res: usize, cells: f64) -> bool {
    let ca = PI / res as f64;
    let cb = TAU / res as f64;
    let corners = [[0.0, 0.0], [PI, 0.0], [0.0, PI], [PI, PI]];
    let seg_dist = |p: [f64; 2], q: [f64; 2]| {
        let d = [q[0] - p[0], q[1] - p[1]];
        let l2 = d[0] * d[0] + d[1] * d[1];
        let s = if l2 == 0.0 { 0.0 } else { (-(p[0] * d[0] + p[1] * d[1]) / l2).clamp(0.0, 1.0) };
        (p[0] + s * d[0]).hypot(p[1] + s * d[1])
    };
    graph.edges.iter().any(|e| {
        let c = &e.curve;
        corners.iter().any(|k| {
            let rel = |v: [f64; 2]| [(v[0] - k[0]) / ca, wrap_signed(v[1] - k[1]) / cb];
            if c.vertices.iter().any(|&v| {
                let r = rel(v);
                r[0].hypot(r[1]) < cells
            }) {
                return true;
            }
            c.edges().any(|(i, j)| {
                let a = rel(c.vertices[i]);
                let step = [
                    (c.vertices[j][0] - c.vertices[i][0]) / ca,
                    wrap_signed(c.vertices[j][1] - c.vertices[i][1]) / cb,
                ];
                seg_dist(a, [a[0] + step[0], a[1] + step[1]]) < cells
            })
        })
    })
}

/// Raster separation test: true iff `q` is not reachable from `p` in the
/// complement of the graph at the given resolution.
pub fn separates_with(
    graph: &EmbeddedGraph,
    p: PillowcasePoint,
    q: PillowcasePoint,
    resolution: usize,
    mode: RasterMode,
) -> Result<bool, PillowcaseError> {
    if resolution < 4 {
        return Err(PillowcaseError::BadResolution(resolution));
    }
    let double = match mode {
        RasterMode::Auto => near_corner(graph, resolution, 2.0),
        RasterMode::Pillowcase => false,
        RasterMode::DoubleCover => true,
    };
    let mut raster = Raster::new(resolution, double);
    raster.draw(graph);
    let cp = raster.locate(p.alpha, p.beta);
    let cq = raster.locate(q.alpha, q.beta);
    for (pt, c) in [(p, cp), (q, cq)] {
        if raster.near_graph(c) {
            return Err(PillowcaseError::PointOnGraph {
                alpha: pt.alpha,
                beta: pt.beta,
            });
        }
    }
    Ok(!raster.reaches(cp, cq))
}

/// [`separates_with`] in [`RasterMode::Auto`].
pub fn separates(
    graph: &EmbeddedGraph,
    p: PillowcasePoint,
    q: PillowcasePoint,
    resolution: usize,
) -> Result<bool, PillowcaseError> {
    separates_with(graph, p, q, resolution, RasterMode::Auto)
}

/// Doubles the resolution from `start` until two consecutive answers agree.
/// Returns the answer and the finer of the two agreeing resolutions.
pub fn separates_converged(
    graph: &EmbeddedGraph,
    p: PillowcasePoint,
    q: PillowcasePoint,
    start: usize,
    max_resolution: usize,
) -> Result<(bool, usize), PillowcaseError> {
    let mut res = start;
    let mut prev = separates(graph, p, q, res)?;
    while res * 2 <= max_resolution {
        res *= 2;
        let cur = separates(graph, p, q, res)?;
        if cur == prev {
            return Ok((cur, res));
        }
        prev = cur;
    }
    Err(PillowcaseError::NotConverged(max_resolution))
}

/// Searches the rasterized graph in the cylinder C (no side folds) for a
/// closed walk with nonzero winding around the circle factor.
pub fn has_essential_cycle(graph: &EmbeddedGraph, resolution: usize) -> bool {
    let mut raster = Raster::new(resolution, false);
    raster.draw(graph);
    let n = resolution;
    let mut lift: Vec<Option<i64>> = vec![None; n * n];
    for start in 0..n * n {
        if !raster.marked[start] || lift[start].is_some() {
            continue;
        }
        lift[start] = Some((start % n) as i64);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, lj) = (k / n, lift[k].expect("queued cells are lifted"));
            for di in -1i64..=1 {
                let ni = i as i64 + di;
                if ni < 0 || ni >= n as i64 {
                    continue;
                }
                for dj in -1i64..=1 {
                    let nl = lj + dj;
                    let nk = ni as usize * n + nl.rem_euclid(n as i64) as usize;
                    if !raster.marked[nk] {
                        continue;
                    }
                    match lift[nk] {
                        None => {
                            lift[nk] = Some(nl);
                            queue.push_back(nk);
                        }
                        Some(l) if l != nl => return true,
                        Some(_) => {}
                    }
                }
            }
        }
    }
    false
}
