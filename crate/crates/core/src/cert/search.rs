use super::{is_prime, verify_certificate, CertError, Certificate, ModMatrix};
use crate::knot_reps::group::Presentation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Complete backtracking; errors when the node cap is hit.
    #[default]
    Exhaustive,
    /// Backtracking in a seeded random order, giving up on a prime after
    /// `max_trials` nodes.
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchOptions {
    pub mode: SearchMode,
    pub seed: u64,
    /// Node budget per prime in randomized mode.
    pub max_trials: u64,
    /// Node budget per prime in exhaustive mode.
    pub node_cap: u64,
    /// Sequential search with a fixed visiting order.
    pub reproducible: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            mode: SearchMode::Exhaustive,
            seed: 0,
            max_trials: 10_000_000,
            node_cap: 50_000_000,
            reproducible: false,
        }
    }
}

/// Result of a search with the number of search-tree nodes visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchReport {
    pub certificate: Option<Certificate>,
    pub nodes: u64,
    /// Primes for which the randomized budget ran out.
    pub exhausted_budget: Vec<u64>,
}

/// All elements of SL(2, Z/p) in lexicographic order of `(a, b, c, d)`.
pub fn sl2_elements(p: u64) -> Vec<ModMatrix> {
    let mut out = Vec::with_capacity((p * (p * p - 1)) as usize);
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    let m = ModMatrix { a, b, c, d, p };
                    if m.det() == 1 % p {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// One representative per conjugacy class of SL(2, Z/p): the companion
/// matrix `[[0, −1], [1, t]]` for each trace `t ≠ ±2`, and `±I`,
/// `±[[1, 1], [0, 1]]`, `±[[1, n], [0, 1]]` (n a non-residue) for `t = ±2`.
pub fn conjugacy_representatives(p: u64) -> Vec<ModMatrix> {
    let nonresidue = (2..p).find(|&n| (1..p).all(|x| (x * x) % p != n));
    let mut out: Vec<ModMatrix> = Vec::new();
    for t in 0..p {
        let plus = t == 2 % p;
        let minus = t == (p + p - 2) % p;
        if plus || minus {
            let signs: Vec<i64> = if plus { vec![1] } else { vec![-1] };
            for s in signs {
                out.push(ModMatrix::new(s, 0, 0, s, p));
                out.push(ModMatrix::new(s, s, 0, s, p));
                if let Some(n) = nonresidue {
                    out.push(ModMatrix::new(s, s * n as i64, 0, s, p));
                }
            }
        } else {
            out.push(ModMatrix::new(0, -1, 1, t as i64, p));
        }
    }
    out.sort_by_key(|m| m.entries());
    out.dedup();
    out
}

struct Tree<'a> {
    pres: &'a Presentation,
    /// Relators whose largest generator is `k + 1`.
    checks: Vec<Vec<usize>>,
    elements: Vec<ModMatrix>,
    budget: u64,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
}

impl Tree<'_> {
    fn new<'a>(pres: &'a Presentation, p: u64, budget: u64, nodes: &'a AtomicU64, stop: &'a AtomicBool) -> Tree<'a> {
        let g = pres.generators;
        let mut checks = vec![Vec::new(); g];
        for (i, r) in pres.relators.iter().enumerate() {
            if let Some(m) = r.iter().map(|l| l.unsigned_abs() as usize).max() {
                checks[m - 1].push(i);
            }
        }
        Tree {
            pres,
            checks,
            elements: sl2_elements(p),
            budget,
            nodes,
            stop,
        }
    }

    fn relators_hold(&self, images: &[ModMatrix], depth: usize) -> bool {
        self.checks[depth].iter().all(|&i| {
            super::eval_word(images, &self.pres.relators[i]).map_or(false, |m| m.is_identity())
        })
    }

    /// Depth-first search over generators `depth..`; `order` maps the
    /// visiting position at each depth to an element index.
    fn dfs(&self, images: &mut Vec<ModMatrix>, order: &dyn Fn(usize, usize) -> usize) -> Option<Vec<ModMatrix>> {
        let depth = images.len();
        if depth == self.pres.generators {
            let nonabelian = (0..depth).any(|i| (i + 1..depth).any(|j| !images[i].commutes_with(&images[j])));
            return nonabelian.then(|| images.clone());
        }
        let n = self.elements.len();
        for pos in 0..n {
            if self.stop.load(Ordering::Relaxed) {
                return None;
            }
            if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
                self.stop.store(true, Ordering::Relaxed);
                return None;
            }
            images.push(self.elements[order(depth, pos)]);
            if self.relators_hold(images, depth) {
                if let Some(found) = self.dfs(images, order) {
                    return Some(found);
                }
            }
            images.pop();
        }
        None
    }

    fn from_root(&self, root: ModMatrix, order: &dyn Fn(usize, usize) -> usize) -> Option<Vec<ModMatrix>> {
        let mut images = vec![root];
        if !self.relators_hold(&images, 0) {
            return None;
        }
        self.dfs(&mut images, order)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Searches the given primes in order for a certificate of a non-abelian
/// SL(2, Z/p) representation. The first generator ranges over conjugacy
/// class representatives; later ones over all of SL(2, Z/p), pruned by
/// every relator as soon as its generators are assigned.
pub fn search_certificate(pres: &Presentation, primes: &[u64], opts: &SearchOptions) -> Result<SearchReport, CertError> {
    if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
        return Err(CertError::NotPrime(p));
    }
    let mut report = SearchReport {
        certificate: None,
        nodes: 0,
        exhausted_budget: Vec::new(),
    };
    if pres.generators < 2 {
        return Ok(report);
    }
    for &p in primes {
        let nodes = AtomicU64::new(0);
        let stop = AtomicBool::new(false);
        let budget = match opts.mode {
            SearchMode::Exhaustive => opts.node_cap,
            SearchMode::Randomized => opts.max_trials,
        };
        let tree = Tree::new(pres, p, budget, &nodes, &stop);
        let mut roots = conjugacy_representatives(p);
        let n = tree.elements.len();
        let (offsets, strides): (Vec<usize>, Vec<usize>) = match opts.mode {
            SearchMode::Exhaustive => (vec![0; pres.generators], vec![1; pres.generators]),
            SearchMode::Randomized => {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ p.wrapping_mul(0x2545_f491_4f6c_dd1d));
                for i in (1..roots.len()).rev() {
                    roots.swap(i, rng.gen_range(0..=i));
                }
                (0..pres.generators)
                    .map(|_| {
                        let off = rng.gen_range(0..n);
                        let stride = loop {
                            let s = rng.gen_range(1..n.max(2));
                            if gcd(s as u64, n as u64) == 1 {
                                break s;
                            }
                        };
                        (off, stride)
                    })
                    .unzip()
            }
        };
        let order = |depth: usize, pos: usize| (offsets[depth] + pos * strides[depth]) % n;
        let found = if opts.reproducible {
            roots.iter().find_map(|&r| tree.from_root(r, &order))
        } else {
            roots.par_iter().find_map_first(|&r| tree.from_root(r, &order))
        };
        report.nodes += nodes.load(Ordering::Relaxed);
        if let Some(images) = found {
            let cert = Certificate::new(pres.id.clone(), p, &images);
            debug_assert!(verify_certificate(pres, &cert).verdict.is_accept());
            report.certificate = Some(cert);
            return Ok(report);
        }
        if stop.load(Ordering::Relaxed) {
            match opts.mode {
                SearchMode::Exhaustive => {
                    return Err(CertError::SearchSpaceTooLarge(format!(
                        "node cap {} reached at p = {p}",
                        opts.node_cap
                    )))
                }
                SearchMode::Randomized => report.exhausted_budget.push(p),
            }
        }
    }
    Ok(report)
}
