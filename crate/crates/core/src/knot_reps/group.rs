use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Word in the generators: entry `k > 0` is generator `k` (1-based), `−k`
/// its inverse.
pub type Word = Vec<i32>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("torus knot parameters ({p}, {q}) must be coprime with |p|, |q| ≥ 2")]
    BadTorusKnot { p: i64, q: i64 },
    #[error("word letter {letter} out of range for {generators} generators")]
    IndexOutOfRange { letter: i32, generators: usize },
    #[error("invalid peripheral words: {0}")]
    InvalidPeripheral(String),
    #[error("abelianization is nontrivial: invariant factors {0:?}")]
    AbelianizationNontrivial(Vec<i64>),
}

pub fn inverse(w: &[i32]) -> Word {
    w.iter().rev().map(|&a| -a).collect()
}

pub fn concat(parts: &[&[i32]]) -> Word {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// `w^n`, with negative `n` meaning powers of the inverse.
pub fn power(w: &[i32], n: i64) -> Word {
    let base = if n < 0 { inverse(w) } else { w.to_vec() };
    (0..n.unsigned_abs()).flat_map(|_| base.iter().copied()).collect()
}

/// Free reduction.
pub fn reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &a in w {
        if out.last() == Some(&-a) {
            out.pop();
        } else {
            out.push(a);
        }
    }
    out
}

/// Free and cyclic reduction.
pub fn cyclic_reduce(w: &[i32]) -> Word {
    let mut r = reduce(w);
    while r.len() >= 2 && r[0] == -r[r.len() - 1] {
        r.pop();
        r.remove(0);
    }
    r
}

/// Exponent sum of each generator.
pub fn exponent_sums(w: &[i32], generators: usize) -> Vec<i64> {
    let mut s = vec![0i64; generators];
    for &a in w {
        s[a.unsigned_abs() as usize - 1] += a.signum() as i64;
    }
    s
}

/// Finite presentation with a stable identifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Presentation {
    pub id: String,
    pub generators: usize,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(id: impl Into<String>, generators: usize, relators: Vec<Word>) -> Self {
        Self {
            id: id.into(),
            generators,
            relators,
        }
    }

    /// The braid presentation `⟨x, y | xyx = yxy⟩` of the trefoil group.
    pub fn trefoil_braid() -> Self {
        Self::new("trefoil-braid", 2, vec![vec![1, 2, 1, -2, -1, -2]])
    }

    /// `⟨x | ⟩`.
    pub fn unknot() -> Self {
        Self::new("unknot", 1, vec![])
    }

    pub fn check_word(&self, w: &[i32]) -> Result<(), GroupError> {
        for &a in w {
            if a == 0 || a.unsigned_abs() as usize > self.generators {
                return Err(GroupError::IndexOutOfRange {
                    letter: a,
                    generators: self.generators,
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), GroupError> {
        self.relators.iter().try_for_each(|r| self.check_word(r))
    }

    pub fn total_length(&self) -> usize {
        self.relators.iter().map(Vec::len).sum()
    }

    /// Exponent-sum matrix, one row per relator.
    pub fn relation_matrix(&self) -> Vec<Vec<i64>> {
        self.relators
            .iter()
            .map(|r| exponent_sums(r, self.generators))
            .collect()
    }

    /// Invariant factors of the abelianization: one entry per generator,
    /// `0` for each free summand.
    pub fn abelian_invariants(&self) -> Vec<i64> {
        let d = smith_diagonal(self.relation_matrix(), self.generators);
        let rank = d.iter().filter(|&&x| x != 0).count();
        let mut inv: Vec<i64> = d.into_iter().filter(|&x| x > 1).collect();
        inv.extend(std::iter::repeat(0).take(self.generators - rank));
        inv
    }

    /// Whether the abelianization is trivial (integer homology sphere).
    pub fn has_trivial_abelianization(&self) -> bool {
        self.abelian_invariants().is_empty()
    }
}

/// Diagonal of the Smith normal form of an integer matrix with `cols`
/// columns (absolute values, length min(rows, cols)).
pub fn smith_diagonal(m: Vec<Vec<i64>>, cols: usize) -> Vec<i64> {
    let rows = m.len();
    let mut a: Vec<Vec<i128>> = m
        .into_iter()
        .map(|r| r.into_iter().map(i128::from).collect())
        .collect();
    let n = rows.min(cols);
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        // pivot: smallest nonzero entry in the trailing block
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                diag.extend(std::iter::repeat(0).take(n - t));
                return diag;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let f = a[i][t] / p;
                if f != 0 {
                    for j in t..cols {
                        a[i][j] -= f * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..cols {
                let f = a[t][j] / p;
                if f != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= f * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility: fold any non-multiple into row t and repeat
            let mut bad = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if a[i][j] % p != 0 {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j];
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs() as i64);
    }
    diag
}

/// Knot specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KnotSpec {
    Unknot,
    TorusKnot {
        p: i64,
        q: i64,
    },
    Custom {
        presentation: Presentation,
        meridian: Word,
        longitude: Word,
    },
}

impl KnotSpec {
    pub fn torus(p: i64, q: i64) -> Self {
        Self::TorusKnot { p, q }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Unknot => "unknot".into(),
            Self::TorusKnot { p, q } => format!("T({p},{q})"),
            Self::Custom { presentation, .. } => presentation.id.clone(),
        }
    }
}

/// Knot group with peripheral words and the abelianization map to Z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotGroup {
    pub presentation: Presentation,
    pub meridian: Word,
    pub longitude: Word,
    /// Image of each generator under the abelianization map sending the
    /// meridian to 1.
    pub abelian_weights: Vec<i64>,
}

impl KnotGroup {
    pub fn generators(&self) -> usize {
        self.presentation.generators
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Solves `r p − s q = 1` with minimal |s|, ties broken towards s ≥ 0.
pub fn meridian_exponents(p: i64, q: i64) -> (i64, i64) {
    let (g, x, y) = ext_gcd(p, q);
    debug_assert_eq!(g, 1);
    // x p + y q = 1, so r = x, s = −y
    let (r0, s0) = (x, -y);
    // general solution: r = r0 + k q, s = s0 + k p
    let k0 = -(s0 as f64 / p as f64).round() as i64;
    let mut best = (r0 + k0 * q, s0 + k0 * p);
    for k in [k0 - 1, k0 + 1] {
        let cand = (r0 + k * q, s0 + k * p);
        let better = cand.1.abs() < best.1.abs() || (cand.1.abs() == best.1.abs() && cand.1 >= 0 && best.1 < 0);
        if better {
            best = cand;
        }
    }
    best
}

fn gcd(a: i64, b: i64) -> i64 {
    ext_gcd(a, b).0
}

/// Integer weights φ with Rφ = 0 and φ(meridian) = 1, assuming the
/// relation matrix has a one-dimensional kernel.
fn abelian_weights(pres: &Presentation, meridian: &[i32]) -> Result<Vec<i64>, GroupError> {
    let g = pres.generators;
    let rel = pres.relation_matrix();
    // rational row reduction in f64; entries are small integers
    let mut a: Vec<Vec<f64>> = rel.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..g {
        let Some(pr) = (row..a.len()).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())) else {
            break;
        };
        if a[pr][col].abs() < 1e-9 {
            continue;
        }
        a.swap(row, pr);
        let pv = a[row][col];
        for x in a[row].iter_mut() {
            *x /= pv;
        }
        for i in 0..a.len() {
            if i != row {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..g {
                        a[i][j] -= f * a[row][j];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..g).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return Err(GroupError::InvalidPeripheral(format!(
            "abelianization has free rank {}, expected 1",
            free.len()
        )));
    }
    let f = free[0];
    let mut phi = vec![0.0; g];
    phi[f] = 1.0;
    for (r, &c) in pivots.iter().enumerate() {
        phi[c] = -a[r][f];
    }
    let ms = exponent_sums(meridian, g);
    let mval: f64 = ms.iter().zip(&phi).map(|(&e, &w)| e as f64 * w).sum();
    if mval.abs() < 1e-9 {
        return Err(GroupError::InvalidPeripheral("meridian is trivial in homology".into()));
    }
    let weights: Vec<i64> = phi.iter().map(|w| (w / mval).round() as i64).collect();
    let exact = weights.iter().zip(&phi).all(|(&w, &x)| ((x / mval) - w as f64).abs() < 1e-9);
    let kernel = rel.iter().all(|r| r.iter().zip(&weights).map(|(a, b)| a * b).sum::<i64>() == 0);
    if !exact || !kernel {
        return Err(GroupError::InvalidPeripheral(
            "meridian does not generate the abelianization".into(),
        ));
    }
    Ok(weights)
}

fn check_peripheral(pres: &Presentation, meridian: &[i32], longitude: &[i32]) -> Result<Vec<i64>, GroupError> {
    pres.validate()?;
    pres.check_word(meridian)?;
    pres.check_word(longitude)?;
    let weights = abelian_weights(pres, meridian)?;
    let m: i64 = exponent_sums(meridian, pres.generators)
        .iter()
        .zip(&weights)
        .map(|(a, b)| a * b)
        .sum();
    let l: i64 = exponent_sums(longitude, pres.generators)
        .iter()
        .zip(&weights)
        .map(|(a, b)| a * b)
        .sum();
    if m != 1 {
        return Err(GroupError::InvalidPeripheral(format!("meridian maps to {m}, expected 1")));
    }
    if l != 0 {
        return Err(GroupError::InvalidPeripheral(format!("longitude maps to {l}, expected 0")));
    }
    let torsion: Vec<i64> = pres.abelian_invariants().into_iter().filter(|&x| x != 0).collect();
    if !torsion.is_empty() {
        return Err(GroupError::InvalidPeripheral(format!("abelianization has torsion {torsion:?}")));
    }
    Ok(weights)
}

/// Standard presentation with peripheral words.
pub fn knot_group(spec: &KnotSpec) -> Result<KnotGroup, GroupError> {
    let (presentation, meridian, longitude) = match spec {
        KnotSpec::Unknot => (Presentation::new("unknot", 1, vec![]), vec![1], vec![]),
        &KnotSpec::TorusKnot { p, q } => {
            if p.abs() < 2 || q.abs() < 2 || gcd(p, q) != 1 {
                return Err(GroupError::BadTorusKnot { p, q });
            }
            let u: Word = vec![1];
            let v: Word = vec![2];
            let rel = concat(&[&power(&u, p), &power(&v, -q)]);
            let (r, s) = meridian_exponents(p, q);
            let m = concat(&[&power(&u, -s), &power(&v, r)]);
            let l = reduce(&concat(&[&power(&u, p), &power(&m, -p * q)]));
            (Presentation::new(spec.name(), 2, vec![rel]), m, l)
        }
        KnotSpec::Custom {
            presentation,
            meridian,
            longitude,
        } => (presentation.clone(), meridian.clone(), longitude.clone()),
    };
    let abelian_weights = check_peripheral(&presentation, &meridian, &longitude)?;
    Ok(KnotGroup {
        presentation,
        meridian,
        longitude,
        abelian_weights,
    })
}

/// Presentation of the splice of two knot complements, with the
/// generators of the second knot shifted after those of the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplicePresentation {
    pub presentation: Presentation,
    pub left: KnotGroup,
    pub right: KnotGroup,
}

impl SplicePresentation {
    pub fn left_generators(&self) -> usize {
        self.left.generators()
    }

    pub fn right_generators(&self) -> usize {
        self.right.generators()
    }

    /// Shifts a word of the right factor into the splice numbering.
    pub fn shift_right(&self, w: &[i32]) -> Word {
        shift(w, self.left.generators() as i32)
    }
}

fn shift(w: &[i32], by: i32) -> Word {
    w.iter().map(|&a| a.signum() * (a.abs() + by)).collect()
}

/// Splice along the boundary tori, identifying the meridian of each factor
/// with the longitude of the other.
pub fn splice_presentation(k: &KnotSpec, k2: &KnotSpec) -> Result<SplicePresentation, GroupError> {
    let left = knot_group(k)?;
    let right = knot_group(k2)?;
    let g1 = left.generators() as i32;
    let mut relators = left.presentation.relators.clone();
    relators.extend(right.presentation.relators.iter().map(|r| shift(r, g1)));
    let m2 = shift(&right.meridian, g1);
    let l2 = shift(&right.longitude, g1);
    relators.push(concat(&[&left.meridian, &inverse(&l2)]));
    relators.push(concat(&[&left.longitude, &inverse(&m2)]));
    let presentation = Presentation::new(
        format!("splice({},{})", k.name(), k2.name()),
        left.generators() + right.generators(),
        relators,
    );
    let inv = presentation.abelian_invariants();
    if !inv.is_empty() {
        return Err(GroupError::AbelianizationNontrivial(inv));
    }
    Ok(SplicePresentation {
        presentation,
        left,
        right,
    })
}

/// Tietze simplification: repeatedly eliminates a generator that occurs
/// exactly once in some relator, and drops trivial relators.
pub fn tietze_simplify(pres: &Presentation) -> Presentation {
    let mut gens = pres.generators;
    let mut rels: Vec<Word> = pres.relators.iter().map(|r| cyclic_reduce(r)).collect();
    loop {
        rels.retain(|r| !r.is_empty());
        rels.sort();
        rels.dedup();
        let mut found = None;
        let mut order: Vec<usize> = (0..rels.len()).collect();
        order.sort_by_key(|&i| rels[i].len());
        'search: for &ri in &order {
            let r = &rels[ri];
            for x in 1..=gens as i32 {
                let occ: Vec<usize> = (0..r.len()).filter(|&k| r[k].abs() == x).collect();
                if occ.len() == 1 {
                    found = Some((ri, x, occ[0]));
                    break 'search;
                }
            }
        }
        let Some((ri, x, pos)) = found else {
            break;
        };
        let r = rels.remove(ri);
        // rotate so the letter comes first: x^ε C = 1
        let rotated: Word = r[pos..].iter().chain(&r[..pos]).copied().collect();
        let c = &rotated[1..];
        let replacement = if rotated[0] > 0 { inverse(c) } else { c.to_vec() };
        let rep_inv = inverse(&replacement);
        rels = rels
            .into_iter()
            .map(|w| {
                let mut out = Vec::with_capacity(w.len());
                for a in w {
                    if a == x {
                        out.extend_from_slice(&replacement);
                    } else if a == -x {
                        out.extend_from_slice(&rep_inv);
                    } else {
                        out.push(a);
                    }
                }
                let renumbered: Word = out
                    .into_iter()
                    .map(|a| if a.abs() > x { a - a.signum() } else { a })
                    .collect();
                cyclic_reduce(&renumbered)
            })
            .collect();
        gens -= 1;
    }
    Presentation::new(format!("{}/tietze", pres.id), gens, rels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknot_group() {
        let g = knot_group(&KnotSpec::Unknot).unwrap();
        assert_eq!(g.generators(), 1);
        assert!(g.presentation.relators.is_empty());
        assert_eq!(g.meridian, vec![1]);
        assert!(g.longitude.is_empty());
    }

    #[test]
    fn trefoil_peripheral_words() {
        assert_eq!(meridian_exponents(2, 3), (2, 1));
        let g = knot_group(&KnotSpec::torus(2, 3)).unwrap();
        assert_eq!(g.presentation.relators, vec![vec![1, 1, -2, -2, -2]]);
        assert_eq!(g.meridian, vec![-1, 2, 2]);
        assert_eq!(g.abelian_weights, vec![3, 2]);
        let l = exponent_sums(&g.longitude, 2);
        assert_eq!(l[0] * 3 + l[1] * 2, 0);
    }

    #[test]
    fn meridian_exponent_tie_break() {
        for (p, q) in [(2, 3), (2, 5), (3, 4), (3, 5), (5, 3), (-2, 3), (2, -7)] {
            let (r, s) = meridian_exponents(p, q);
            assert_eq!(r * p - s * q, 1);
            assert!(s.abs() <= p.abs() / 2 + 1);
        }
    }

    #[test]
    fn bad_torus_parameters() {
        assert!(knot_group(&KnotSpec::torus(2, 4)).is_err());
        assert!(knot_group(&KnotSpec::torus(1, 3)).is_err());
    }

    #[test]
    fn smith_form_examples() {
        assert_eq!(smith_diagonal(vec![vec![2, 4], vec![6, 8]], 2), vec![2, 4]);
        assert_eq!(smith_diagonal(vec![vec![2, 3]], 2), vec![1]);
        assert_eq!(smith_diagonal(vec![vec![0, 0]], 2), vec![0]);
    }

    #[test]
    fn abelian_invariants_of_small_groups() {
        assert_eq!(Presentation::trefoil_braid().abelian_invariants(), vec![0]);
        assert_eq!(Presentation::new("z2", 1, vec![vec![1, 1]]).abelian_invariants(), vec![2]);
    }

    #[test]
    fn tietze_removes_trivial_generators() {
        let p = Presentation::new("t", 2, vec![vec![1], vec![-2]]);
        let s = tietze_simplify(&p);
        assert_eq!(s.generators, 0);
        assert!(s.relators.is_empty());
    }

    #[test]
    fn free_reduction() {
        assert_eq!(reduce(&[1, 2, -2, -1, 3]), vec![3]);
        assert_eq!(cyclic_reduce(&[-1, 2, 1]), vec![2]);
    }
}
