//! Stiefel-Whitney classes in `H^*((Z/2)^n; Z/2) = Z/2[x_1, ..., x_n]`,
//! truncated above degree three, and the Bockstein of `w_2`.
//!
//! A character `chi` has `w_1 = x_chi = sum_{i in chi} x_i`. The Bockstein
//! `H^2(-; Z/2) -> H^3(-; Z)` kills the squares `x_i^2` and sends the mixed
//! monomials `x_i x_j` onto a basis of `Lambda^2[x_1, ..., x_n]`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::F2Vec;
use crate::rep::RepMultiset;

pub const MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassError {
    #[error("degree {0} is outside 1..=3")]
    DegreeOutOfRange(usize),
}

/// Monomial as a sorted list of 0-based variable indices; `[0, 0, 2]` is `x_1^2 x_3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u8>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn new(mut vars: Vec<u8>) -> Self {
        vars.sort_unstable();
        Monomial(vars)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[u8] {
        &self.0
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial::new(v)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut i = 0;
        while i < self.0.len() {
            let v = self.0[i];
            let mut e = 1;
            while i + e < self.0.len() && self.0[i + e] == v {
                e += 1;
            }
            write!(f, "x{}", v + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
            i += e;
        }
        Ok(())
    }
}

/// Element of `Z/2[x_1..x_n]` modulo degree four and higher.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncPoly {
    pub n: usize,
    terms: BTreeSet<Monomial>,
}

impl TruncPoly {
    pub fn zero(n: usize) -> Self {
        TruncPoly {
            n,
            terms: BTreeSet::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.terms.insert(Monomial::one());
        p
    }

    /// `x_chi = sum_{i in chi} x_i`.
    pub fn linear(n: usize, chi: F2Vec) -> Self {
        let mut p = Self::zero(n);
        for i in chi.ones() {
            p.toggle(Monomial(vec![i as u8]));
        }
        p
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(n: usize, terms: I) -> Self {
        let mut p = Self::zero(n);
        for t in terms {
            p.toggle(t);
        }
        p
    }

    fn toggle(&mut self, m: Monomial) {
        if m.degree() > MAX_DEGREE {
            return;
        }
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn homogeneous(&self, k: usize) -> TruncPoly {
        TruncPoly {
            n: self.n,
            terms: self.terms.iter().filter(|m| m.degree() == k).cloned().collect(),
        }
    }

    pub fn add(&self, other: &TruncPoly) -> TruncPoly {
        let mut out = self.clone();
        for t in &other.terms {
            out.toggle(t.clone());
        }
        out
    }

    pub fn mul(&self, other: &TruncPoly) -> TruncPoly {
        let mut out = TruncPoly::zero(self.n.max(other.n));
        for a in &self.terms {
            for b in &other.terms {
                if a.degree() + b.degree() <= MAX_DEGREE {
                    out.toggle(a.times(b));
                }
            }
        }
        out
    }
}

impl fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut terms: Vec<&Monomial> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        let s: Vec<String> = terms.iter().map(|m| m.to_string()).collect();
        f.write_str(&s.join(" + "))
    }
}

/// A class in `Lambda^2[x_1..x_n]` as its set of 1-based pairs `(i, j)`, `i < j`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lambda2Class {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Lambda2Class {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(i: usize, j: usize) -> Self {
        let mut c = Self::default();
        c.pairs.insert((i.min(j), i.max(j)));
        c
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sum(&self, other: &Lambda2Class) -> Lambda2Class {
        Lambda2Class {
            pairs: self.pairs.symmetric_difference(&other.pairs).copied().collect(),
        }
    }
}

impl fmt::Display for Lambda2Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return f.write_str("0");
        }
        let s: Vec<String> = self.pairs.iter().map(|(i, j)| format!("b(x{i}x{j})")).collect();
        f.write_str(&s.join(" + "))
    }
}

/// Total Stiefel-Whitney class `prod (1 + x_chi)` over all summands.
pub fn sw_total(rep: &RepMultiset) -> TruncPoly {
    let n = rep.rank();
    let mut total = TruncPoly::one(n);
    for (chi, k) in rep.iter() {
        if chi.is_zero() {
            continue;
        }
        let factor = TruncPoly::one(n).add(&TruncPoly::linear(n, chi));
        // (1 + x)^k only depends on k mod 4 below degree four.
        for _ in 0..(k % 4) {
            total = total.mul(&factor);
        }
    }
    total
}

pub fn w_k(rep: &RepMultiset, k: usize) -> Result<TruncPoly, ClassError> {
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(ClassError::DegreeOutOfRange(k));
    }
    Ok(sw_total(rep).homogeneous(k))
}

/// `beta w_2`: the mixed quadratic monomials of `w_2`.
pub fn bockstein_w2(rep: &RepMultiset) -> Lambda2Class {
    let w2 = sw_total(rep).homogeneous(2);
    Lambda2Class {
        pairs: w2
            .terms()
            .filter_map(|m| match m.vars() {
                &[i, j] if i != j => Some((usize::from(i) + 1, usize::from(j) + 1)),
                _ => None,
            })
            .collect(),
    }
}

/// `w_1 = 0` and `beta w_2 = 0`.
pub fn is_spinc(rep: &RepMultiset) -> bool {
    sw_total(rep).homogeneous(1).is_zero() && bockstein_w2(rep).is_empty()
}

/// `1 + a + b + c + ab + ac + bc + abc` on rank `n`.
pub fn spin_octet(n: usize, a: F2Vec, b: F2Vec, c: F2Vec) -> RepMultiset {
    RepMultiset::from_chars(n, [F2Vec::ZERO, a, b, c, a + b, a + c, b + c, a + b + c])
        .expect("octet characters fit the rank")
}

/// `1 + alpha_i + alpha_j + alpha_i alpha_j` for 1-based `i != j`.
pub fn twisting_quartet(n: usize, i: usize, j: usize) -> RepMultiset {
    let (a, b) = (F2Vec::unit(i - 1), F2Vec::unit(j - 1));
    RepMultiset::from_chars(n, [F2Vec::ZERO, a, b, a + b]).expect("quartet characters fit the rank")
}
