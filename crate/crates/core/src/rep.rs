//! Real representations of `(Z/2)^n` as multisets of characters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, F2Vec, Gf2Error};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RepError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Position-tagged failure from [`parse_rep`]. Positions are byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("letter '{letter}' at position {pos} names a generator beyond rank {n}")]
    UnknownLetter { letter: char, pos: usize, n: usize },
    #[error("empty term at position {pos}")]
    EmptyTerm { pos: usize },
    #[error("unexpected character '{found}' at position {pos}")]
    Unexpected { found: char, pos: usize },
    #[error("multiplicity at position {pos} is missing its factors")]
    BareMultiplicity { pos: usize },
    #[error("multiplicity at position {pos} is too large")]
    MultiplicityOverflow { pos: usize },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// Sign of a desuspension count: `(-1)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self.is_negative() != rhs.is_negative())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i64() as i8)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(serde::de::Error::custom(format!("sign must be 1 or -1, got {other}"))),
        }
    }
}

/// A finite-dimensional real representation: a multiset of characters.
/// The zero vector is the trivial character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RepMultiset {
    n: usize,
    counts: BTreeMap<F2Vec, u32>,
}

impl RepMultiset {
    pub fn new(n: usize) -> Result<Self, RepError> {
        gf2::check_width(n)?;
        Ok(RepMultiset {
            n,
            counts: BTreeMap::new(),
        })
    }

    pub fn from_chars<I: IntoIterator<Item = F2Vec>>(n: usize, chars: I) -> Result<Self, RepError> {
        let mut rep = Self::new(n)?;
        for c in chars {
            rep.add(c, 1)?;
        }
        Ok(rep)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, chi: F2Vec, count: u32) -> Result<(), RepError> {
        if !chi.fits(self.n) {
            return Err(Gf2Error::OutOfRange {
                bits: u32::from(chi.bits()),
                n: self.n,
            }
            .into());
        }
        if count > 0 {
            *self.counts.entry(chi).or_insert(0) += count;
        }
        Ok(())
    }

    /// Removes one copy of `chi`; returns whether a copy was present.
    pub fn remove_one(&mut self, chi: F2Vec) -> bool {
        match self.counts.get_mut(&chi) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(&chi);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, chi: F2Vec) -> u32 {
        self.counts.get(&chi).copied().unwrap_or(0)
    }

    pub fn dimension(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(character, multiplicity)` pairs in increasing character order.
    pub fn iter(&self) -> impl Iterator<Item = (F2Vec, u32)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    /// All summands with repetition, increasing.
    pub fn summands(&self) -> Vec<F2Vec> {
        self.iter()
            .flat_map(|(c, k)| std::iter::repeat_n(c, k as usize))
            .collect()
    }

    pub fn direct_sum(&self, other: &RepMultiset) -> Result<RepMultiset, RepError> {
        if self.n != other.n {
            return Err(RepError::RankMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (c, k) in other.iter() {
            out.add(c, k)?;
        }
        Ok(out)
    }

    /// Restriction to `Ker(chi)`, written in the coordinates of
    /// [`gf2::kernel_basis`]. Multiplicities are preserved.
    pub fn restrict_to_kernel(&self, chi: F2Vec) -> Result<RepMultiset, RepError> {
        let kernel = gf2::kernel_basis(chi, self.n)?;
        let mut out = RepMultiset::new(self.n - 1)?;
        for (mu, k) in self.iter() {
            *out.counts.entry(gf2::restrict_char(mu, &kernel)).or_insert(0) += k;
        }
        Ok(out)
    }

    /// Image under the dual action of an invertible matrix.
    pub fn map_chars(&self, a: &gf2::F2Matrix) -> Result<RepMultiset, RepError> {
        if a.n != self.n {
            return Err(RepError::RankMismatch(self.n, a.n));
        }
        if !a.is_invertible() {
            return Err(Gf2Error::Singular.into());
        }
        let mut out = RepMultiset::new(self.n)?;
        for (c, k) in self.iter() {
            out.add(a.dual_apply(c), k)?;
        }
        Ok(out)
    }

    pub fn canonicalize(&self) -> CanonicalRep {
        canonicalize(self)
    }
}

/// Name of a character in the letter notation: `a` is generator 0, `ab`
/// the product of generators 0 and 1, `1` the trivial character.
pub fn char_name(chi: F2Vec) -> String {
    if chi.is_zero() {
        return "1".to_string();
    }
    chi.ones().map(|i| (b'a' + i as u8) as char).collect()
}

fn print_order(chi: &F2Vec) -> (u32, String) {
    (chi.weight(), char_name(*chi))
}

impl fmt::Display for RepMultiset {
    /// Prints in the input grammar; the empty representation prints as "".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut keys: Vec<F2Vec> = self.counts.keys().copied().collect();
        keys.sort_by_key(print_order);
        let mut terms = Vec::new();
        for chi in keys {
            let k = self.counts[&chi];
            if chi.is_zero() {
                terms.extend(std::iter::repeat_n("1".to_string(), k as usize));
            } else if k == 1 {
                terms.push(char_name(chi));
            } else {
                terms.push(format!("{k}{}", char_name(chi)));
            }
        }
        write!(f, "{}", terms.join("+"))
    }
}

/// Parses `rep := term ('+' term)*; term := [0-9]* factor+ | '1'; factor := [a-p]`.
///
/// Whitespace is ignored and an empty (or all-whitespace) expression is the
/// zero representation. Letters multiply, so `aab` is `b`.
pub fn parse_rep(expr: &str, n: usize) -> Result<RepMultiset, ParseError> {
    gf2::check_width(n)?;
    let mut rep = RepMultiset::new(n).map_err(|e| match e {
        RepError::Gf2(g) => ParseError::Gf2(g),
        RepError::RankMismatch(..) => unreachable!(),
    })?;
    let chars: Vec<(usize, char)> = expr.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Ok(rep);
    }
    let mut i = 0;
    loop {
        let start = chars.get(i).map_or(expr.len(), |c| c.0);
        let mut digits = String::new();
        while let Some(&(_, c)) = chars.get(i) {
            if c.is_ascii_digit() {
                digits.push(c);
                i += 1;
            } else {
                break;
            }
        }
        let mut chi = 0u16;
        let mut factors = 0;
        while let Some(&(pos, c)) = chars.get(i) {
            if c.is_ascii_lowercase() {
                let idx = (c as u8 - b'a') as usize;
                if idx >= n {
                    return Err(ParseError::UnknownLetter { letter: c, pos, n });
                }
                chi ^= 1 << idx;
                factors += 1;
                i += 1;
            } else {
                break;
            }
        }
        if factors == 0 {
            match digits.as_str() {
                "" => return Err(ParseError::EmptyTerm { pos: start }),
                "1" => rep.counts.entry(F2Vec::ZERO).and_modify(|c| *c += 1).or_insert(1),
                _ => return Err(ParseError::BareMultiplicity { pos: start }),
            };
        } else {
            let k: u32 = if digits.is_empty() {
                1
            } else {
                digits
                    .parse()
                    .map_err(|_| ParseError::MultiplicityOverflow { pos: start })?
            };
            if k > 0 {
                *rep.counts.entry(F2Vec(chi)).or_insert(0) += k;
            }
        }
        match chars.get(i) {
            None => return Ok(rep),
            Some(&(_, '+')) => {
                i += 1;
                if i == chars.len() {
                    return Err(ParseError::EmptyTerm { pos: expr.len() });
                }
            }
            Some(&(pos, found)) => return Err(ParseError::Unexpected { found, pos }),
        }
    }
}

/// Reduction-invariant state of a representation: the odd-multiplicity
/// nontrivial characters and the parity of trivial summands.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalRep {
    pub n: usize,
    pub chars: BTreeSet<F2Vec>,
    pub sign: Sign,
}

impl CanonicalRep {
    pub fn new(n: usize, chars: BTreeSet<F2Vec>, sign: Sign) -> Result<Self, RepError> {
        gf2::check_width(n)?;
        for c in &chars {
            if c.is_zero() || !c.fits(n) {
                return Err(Gf2Error::OutOfRange {
                    bits: u32::from(c.bits()),
                    n,
                }
                .into());
            }
        }
        Ok(CanonicalRep { n, chars, sign })
    }

    pub fn from_set<I: IntoIterator<Item = F2Vec>>(n: usize, chars: I) -> Result<Self, RepError> {
        Self::new(n, chars.into_iter().collect(), Sign::Plus)
    }

    pub fn to_multiset(&self) -> RepMultiset {
        let mut rep = RepMultiset {
            n: self.n,
            counts: self.chars.iter().map(|c| (*c, 1)).collect(),
        };
        if self.sign.is_negative() {
            rep.counts.insert(F2Vec::ZERO, 1);
        }
        rep
    }

    pub fn chars_vec(&self) -> Vec<F2Vec> {
        self.chars.iter().copied().collect()
    }
}

/// Drops complex pairs and trivial summands, keeping the parity of the latter
/// in `sign`. Idempotent.
pub fn canonicalize(rep: &RepMultiset) -> CanonicalRep {
    let chars = rep
        .iter()
        .filter(|(c, k)| !c.is_zero() && k % 2 == 1)
        .map(|(c, _)| c)
        .collect();
    CanonicalRep {
        n: rep.n,
        chars,
        sign: Sign::from_parity(rep.count(F2Vec::ZERO) % 2 == 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> F2Vec {
        F2Vec(s.bytes().fold(0, |acc, b| acc ^ (1 << (b - b'a'))))
    }

    #[test]
    fn canonicalize_examples() {
        let r = parse_rep("a+b+ab", 2).unwrap();
        let c = canonicalize(&r);
        assert_eq!(c.chars_vec(), vec![ch("a"), ch("b"), ch("ab")]);
        assert_eq!(c.sign, Sign::Plus);

        let r = parse_rep("3a+2b", 2).unwrap();
        let c = canonicalize(&r);
        assert_eq!(c.chars_vec(), vec![ch("a")]);
        assert_eq!(c.sign, Sign::Plus);

        let r = parse_rep("1+a", 1).unwrap();
        let c = canonicalize(&r);
        assert_eq!(c.chars_vec(), vec![ch("a")]);
        assert_eq!(c.sign, Sign::Minus);

        assert_eq!(canonicalize(&c.to_multiset()), c);
    }

    #[test]
    fn direct_sum_examples() {
        let v = parse_rep("a+b", 2).unwrap();
        let zero = RepMultiset::new(2).unwrap();
        assert_eq!(v.direct_sum(&zero).unwrap(), v);

        let a = parse_rep("a", 2).unwrap();
        assert_eq!(a.direct_sum(&a).unwrap().count(ch("a")), 2);

        let mut ee2 = RepMultiset::new(3).unwrap();
        for t in ["a", "b", "c", "ab", "bc"] {
            ee2 = ee2.direct_sum(&parse_rep(t, 3).unwrap()).unwrap();
        }
        assert_eq!(ee2.dimension(), 5);
        assert_eq!(ee2, parse_rep("a+b+c+ab+bc", 3).unwrap());

        assert_eq!(
            a.direct_sum(&RepMultiset::new(3).unwrap()),
            Err(RepError::RankMismatch(2, 3))
        );
    }

    #[test]
    fn restriction_examples() {
        let r = parse_rep("a+b", 2).unwrap().restrict_to_kernel(ch("ab")).unwrap();
        assert_eq!(r.rank(), 1);
        assert_eq!(r.count(F2Vec(1)), 2);

        // Kernel basis of abc is {ab, ac}: a -> (1,1), b -> (1,0), c -> (0,1).
        let r = parse_rep("a+b+c", 3).unwrap().restrict_to_kernel(ch("abc")).unwrap();
        let got: Vec<F2Vec> = r.summands();
        assert_eq!(got, vec![F2Vec(0b01), F2Vec(0b10), F2Vec(0b11)]);

        let e = RepMultiset::new(3).unwrap().restrict_to_kernel(ch("a")).unwrap();
        assert!(e.is_empty());
        assert_eq!(e.rank(), 2);

        assert!(parse_rep("a", 2).unwrap().restrict_to_kernel(F2Vec::ZERO).is_err());
    }

    #[test]
    fn parse_examples() {
        let r = parse_rep("a+b+ab", 2).unwrap();
        assert_eq!(r.summands(), vec![ch("a"), ch("b"), ch("ab")]);
        let r = parse_rep("1+a+b+ab", 2).unwrap();
        assert_eq!(r.count(F2Vec::ZERO), 1);
        let r = parse_rep(" a + b + c + abc ", 3).unwrap();
        assert_eq!(r.summands(), vec![ch("a"), ch("b"), ch("c"), ch("abc")]);
        assert_eq!(parse_rep("2ab", 2).unwrap().count(ch("ab")), 2);
        assert!(parse_rep("", 3).unwrap().is_empty());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_rep("a+d", 3),
            Err(ParseError::UnknownLetter {
                letter: 'd',
                pos: 2,
                n: 3
            })
        );
        assert_eq!(parse_rep("a++b", 2), Err(ParseError::EmptyTerm { pos: 2 }));
        assert_eq!(parse_rep("a+", 2), Err(ParseError::EmptyTerm { pos: 2 }));
        assert_eq!(parse_rep("a*b", 2), Err(ParseError::Unexpected { found: '*', pos: 1 }));
        assert_eq!(parse_rep("3+a", 2), Err(ParseError::BareMultiplicity { pos: 0 }));
        assert_eq!(
            parse_rep("a+z", 2),
            Err(ParseError::UnknownLetter {
                letter: 'z',
                pos: 2,
                n: 2
            })
        );
    }

    #[test]
    fn display_roundtrip() {
        for e in ["a+b+ab", "1+1+c+2ab", "", "abc+a+1"] {
            let r = parse_rep(e, 3).unwrap();
            assert_eq!(parse_rep(&r.to_string(), 3).unwrap(), r);
        }
        assert_eq!(parse_rep("ab+1+a", 2).unwrap().to_string(), "1+a+ab");
    }
}
