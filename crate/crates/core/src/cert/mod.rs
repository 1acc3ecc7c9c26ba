//! Exact SL(2, Z/p) representations of finitely presented groups:
//! word evaluation, certificate verification and a brute-force search.

mod search;

pub use search::{conjugacy_representatives, search_certificate, sl2_elements, SearchMode, SearchOptions, SearchReport};

use crate::knot_reps::group::Presentation;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("word letter {letter} out of range for {generators} generators")]
    IndexOutOfRange { letter: i32, generators: usize },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("search space too large: {0}")]
    SearchSpaceTooLarge(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn negmod(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

/// 2×2 matrix `[[a, b], [c, d]]` over Z/p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub p: u64,
}

impl ModMatrix {
    /// Reduces the entries mod p.
    pub fn new(a: i64, b: i64, c: i64, d: i64, p: u64) -> Self {
        let r = |x: i64| x.rem_euclid(p as i64) as u64;
        Self {
            a: r(a),
            b: r(b),
            c: r(c),
            d: r(d),
            p,
        }
    }

    pub fn from_entries(e: [u64; 4], p: u64) -> Self {
        Self {
            a: e[0] % p,
            b: e[1] % p,
            c: e[2] % p,
            d: e[3] % p,
            p,
        }
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn identity(p: u64) -> Self {
        Self {
            a: 1 % p,
            b: 0,
            c: 0,
            d: 1 % p,
            p,
        }
    }

    pub fn det(&self) -> u64 {
        let p = self.p;
        addmod(mulmod(self.a, self.d, p), negmod(mulmod(self.b, self.c, p), p), p)
    }

    pub fn trace(&self) -> u64 {
        addmod(self.a, self.d, self.p)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.p)
    }

    /// Adjugate, which is the inverse when det = 1.
    pub fn adjugate(&self) -> Self {
        let p = self.p;
        Self {
            a: self.d,
            b: negmod(self.b, p),
            c: negmod(self.c, p),
            d: self.a,
            p,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p;
        Self {
            a: addmod(mulmod(self.a, o.a, p), mulmod(self.b, o.c, p), p),
            b: addmod(mulmod(self.a, o.b, p), mulmod(self.b, o.d, p), p),
            c: addmod(mulmod(self.c, o.a, p), mulmod(self.d, o.c, p), p),
            d: addmod(mulmod(self.c, o.b, p), mulmod(self.d, o.d, p), p),
            p,
        }
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o) == o.mul(self)
    }
}

impl fmt::Display for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]] mod {}", self.a, self.b, self.c, self.d, self.p)
    }
}

/// Left-to-right product of generator images; returns the product and the
/// number of matrix multiplications performed.
pub fn eval_word_counted(images: &[ModMatrix], word: &[i32]) -> Result<(ModMatrix, u64), CertError> {
    let p = images.first().map_or(2, |m| m.p);
    if let Some(m) = images.iter().find(|m| m.p != p) {
        return Err(CertError::ModulusMismatch(p, m.p));
    }
    let mut acc = ModMatrix::identity(p);
    let mut count = 0;
    for &l in word {
        let k = l.unsigned_abs() as usize;
        if l == 0 || k > images.len() {
            return Err(CertError::IndexOutOfRange {
                letter: l,
                generators: images.len(),
            });
        }
        let g = if l > 0 { images[k - 1] } else { images[k - 1].adjugate() };
        acc = acc.mul(&g);
        count += 1;
    }
    Ok((acc, count))
}

pub fn eval_word(images: &[ModMatrix], word: &[i32]) -> Result<ModMatrix, CertError> {
    eval_word_counted(images, word).map(|(m, _)| m)
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

mod p_string {
    use super::*;

    pub fn serialize<S: Serializer>(p: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A prime and one SL(2, Z/p) image per generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub presentation_id: String,
    #[serde(with = "p_string")]
    pub p: u64,
    pub images: Vec<[u64; 4]>,
}

impl Certificate {
    pub fn new(presentation_id: impl Into<String>, p: u64, images: &[ModMatrix]) -> Self {
        Self {
            presentation_id: presentation_id.into(),
            p,
            images: images.iter().map(ModMatrix::entries).collect(),
        }
    }

    pub fn matrices(&self) -> Vec<ModMatrix> {
        self.images
            .iter()
            .map(|e| ModMatrix {
                a: e[0],
                b: e[1],
                c: e[2],
                d: e[3],
                p: self.p,
            })
            .collect()
    }

    /// The trefoil certificate `x = [[1,1],[0,1]]`, `y = [[1,0],[4,1]]` mod 5
    /// for [`Presentation::trefoil_braid`].
    pub fn trefoil_p5() -> Self {
        Self {
            presentation_id: Presentation::trefoil_braid().id,
            p: 5,
            images: vec![[1, 1, 0, 1], [1, 0, 4, 1]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum RejectReason {
    PresentationMismatch { expected: String, found: String },
    NotPrime { p: u64 },
    WrongImageCount { expected: usize, found: usize },
    EntryOutOfRange { generator: usize },
    DetNotOne { generator: usize },
    RelationFails { relator: usize },
    BadRelator { relator: usize },
    Abelian,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PresentationMismatch { expected, found } => {
                write!(f, "presentation mismatch: expected {expected}, found {found}")
            }
            Self::NotPrime { p } => write!(f, "modulus {p} is not prime"),
            Self::WrongImageCount { expected, found } => {
                write!(f, "expected {expected} images, found {found}")
            }
            Self::EntryOutOfRange { generator } => write!(f, "entry out of range in image {}", generator + 1),
            Self::DetNotOne { generator } => write!(f, "det ≠ 1 for image {}", generator + 1),
            Self::RelationFails { relator } => write!(f, "relation fails (relator {})", relator + 1),
            Self::BadRelator { relator } => write!(f, "relator {} references a missing generator", relator + 1),
            Self::Abelian => write!(f, "no non-commuting pair of generator images"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Verdict with the work performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub verdict: Verdict,
    pub multiplications: u64,
    pub elapsed: Duration,
}

/// Checks primality of p, det = 1 for every image, every relator, and the
/// existence of a non-commuting pair of generator images.
pub fn verify_certificate(pres: &Presentation, cert: &Certificate) -> Verification {
    let start = Instant::now();
    let mut mults = 0u64;
    let verdict = (|| {
        if cert.presentation_id != pres.id {
            return Verdict::Reject(RejectReason::PresentationMismatch {
                expected: pres.id.clone(),
                found: cert.presentation_id.clone(),
            });
        }
        let p = cert.p;
        if !is_prime(p) {
            return Verdict::Reject(RejectReason::NotPrime { p });
        }
        if cert.images.len() != pres.generators {
            return Verdict::Reject(RejectReason::WrongImageCount {
                expected: pres.generators,
                found: cert.images.len(),
            });
        }
        if let Some(g) = cert.images.iter().position(|e| e.iter().any(|&x| x >= p)) {
            return Verdict::Reject(RejectReason::EntryOutOfRange { generator: g });
        }
        let images = cert.matrices();
        if let Some(g) = images.iter().position(|m| m.det() != 1 % p) {
            return Verdict::Reject(RejectReason::DetNotOne { generator: g });
        }
        for (i, r) in pres.relators.iter().enumerate() {
            match eval_word_counted(&images, r) {
                Ok((m, n)) => {
                    mults += n;
                    if !m.is_identity() {
                        return Verdict::Reject(RejectReason::RelationFails { relator: i });
                    }
                }
                Err(_) => return Verdict::Reject(RejectReason::BadRelator { relator: i }),
            }
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                mults += 2;
                if !images[i].commutes_with(&images[j]) {
                    return Verdict::Accept;
                }
            }
        }
        Verdict::Reject(RejectReason::Abelian)
    })();
    Verification {
        verdict,
        multiplications: mults,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn braid_relation_mod_5() {
        let x = ModMatrix::new(1, 1, 0, 1, 5);
        let y = ModMatrix::new(1, 0, -1, 1, 5);
        let xyx = eval_word(&[x, y], &[1, 2, 1]).unwrap();
        let yxy = eval_word(&[x, y], &[2, 1, 2]).unwrap();
        assert_eq!(xyx, yxy);
        assert_eq!(xyx.entries(), [0, 1, 4, 0]);
    }

    #[test]
    fn empty_word_and_inverse() {
        let x = ModMatrix::new(2, 3, 1, 2, 7);
        assert!(eval_word(&[x], &[]).unwrap().is_identity());
        assert!(eval_word(&[x], &[1, -1]).unwrap().is_identity());
        assert!(eval_word(&[x], &[2]).is_err());
    }

    #[test]
    fn miller_rabin() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(u64::MAX));
    }

    #[test]
    fn trefoil_certificate_accepts() {
        let v = verify_certificate(&Presentation::trefoil_braid(), &Certificate::trefoil_p5());
        assert_eq!(v.verdict, Verdict::Accept);
        assert_eq!(v.multiplications, 6 + 2);
    }

    #[test]
    fn certificate_json_layout() {
        let s = serde_json::to_string(&Certificate::trefoil_p5()).unwrap();
        assert_eq!(s, r#"{"presentation_id":"trefoil-braid","p":"5","images":[[1,1,0,1],[1,0,4,1]]}"#);
        let back: Certificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Certificate::trefoil_p5());
    }

    #[test]
    fn unknot_rejects() {
        let c = Certificate {
            presentation_id: "unknot".into(),
            p: 5,
            images: vec![[1, 1, 0, 1]],
        };
        assert_eq!(
            verify_certificate(&Presentation::unknot(), &c).verdict,
            Verdict::Reject(RejectReason::Abelian)
        );
    }
}
