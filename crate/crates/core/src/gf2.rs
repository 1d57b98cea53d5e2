//! Linear algebra over the two-element field.
//!
//! Group elements of `(Z/2)^n` and characters of its dual share one vector
//! type, [`F2Vec`]. Bit `i` is the coefficient of the `i`-th standard
//! generator; only the pairing distinguishes the two roles.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported ambient rank. Every vector fits one `u16`.
pub const MAX_RANK: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("rank {0} exceeds the supported maximum of {MAX_RANK}")]
    WidthOverflow(usize),
    #[error("vector {bits:#x} does not fit in width {n}")]
    OutOfRange { bits: u32, n: usize },
    #[error("the trivial character has no proper kernel")]
    ZeroCharacter,
    #[error("matrix is not invertible")]
    Singular,
    #[error("vector {0:#x} lies outside the span of the basis")]
    OutsideSpan(u16),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub fn check_width(n: usize) -> Result<(), Gf2Error> {
    if n > MAX_RANK {
        Err(Gf2Error::WidthOverflow(n))
    } else {
        Ok(())
    }
}

/// Mask with the low `n` bits set.
pub fn width_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A vector in `F_2^n`.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct F2Vec(pub u16);

impl F2Vec {
    pub const ZERO: F2Vec = F2Vec(0);

    /// Checked constructor: rejects widths above [`MAX_RANK`] and stray high bits.
    pub fn new(bits: u32, n: usize) -> Result<Self, Gf2Error> {
        check_width(n)?;
        if bits & !width_mask(n) != 0 {
            return Err(Gf2Error::OutOfRange { bits, n });
        }
        Ok(F2Vec(bits as u16))
    }

    /// The `i`-th standard basis vector.
    pub fn unit(i: usize) -> Self {
        debug_assert!(i < MAX_RANK);
        F2Vec(1 << i)
    }

    /// Parses a bit string where the leftmost digit is component 0, so `"110"`
    /// is `e_0 + e_1`.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        if s.len() > MAX_RANK {
            return None;
        }
        let mut bits = 0u16;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(F2Vec(bits))
    }

    /// Inverse of [`F2Vec::from_bit_str`] at width `n`.
    pub fn to_bit_str(self, n: usize) -> String {
        (0..n).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn bit(self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }

    pub fn fits(self, n: usize) -> bool {
        u32::from(self.0) & !width_mask(n) == 0
    }

    /// Index of the highest set bit.
    pub fn leading_bit(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(15 - self.0.leading_zeros() as usize)
        }
    }

    /// Index of the lowest set bit.
    pub fn trailing_bit(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// The pairing `<chi, g>`: parity of the bitwise AND.
    pub fn pair(self, other: F2Vec) -> bool {
        (self.0 & other.0).count_ones() % 2 == 1
    }

    pub fn ones(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_RANK).filter(move |i| (bits >> i) & 1 == 1)
    }
}

// Addition in characteristic two is xor.
#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Add for F2Vec {
    type Output = F2Vec;
    fn add(self, rhs: F2Vec) -> F2Vec {
        F2Vec(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl std::ops::AddAssign for F2Vec {
    fn add_assign(&mut self, rhs: F2Vec) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Vec({:#x})", self.0)
    }
}

impl fmt::LowerHex for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

impl Serialize for F2Vec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:x}", self.0))
    }
}

impl<'de> Deserialize<'de> for F2Vec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_hex(&s).map_err(serde::de::Error::custom)
    }
}

pub fn parse_hex(s: &str) -> Result<F2Vec, String> {
    let t = s.trim();
    let t = t.strip_prefix("0x").unwrap_or(t);
    u16::from_str_radix(t, 16)
        .map(F2Vec)
        .map_err(|e| format!("bad hex vector {s:?}: {e}"))
}

/// Incremental echelon basis. Slot `b` holds the vector whose leading bit is `b`.
#[derive(Debug, Clone, Default)]
struct Echelon {
    slots: [u16; MAX_RANK],
    // For each slot, which inserted vectors (by insertion index) sum to it.
    combos: [u32; MAX_RANK],
    order: Vec<usize>,
}

impl Echelon {
    /// Reduces `v` against the current slots. Returns the residue and the
    /// combination of inserted vectors that was subtracted.
    fn reduce(&self, v: u16) -> (u16, u32) {
        let mut v = v;
        let mut combo = 0u32;
        for b in (0..MAX_RANK).rev() {
            if (v >> b) & 1 == 1 && self.slots[b] != 0 {
                v ^= self.slots[b];
                combo ^= self.combos[b];
            }
        }
        (v, combo)
    }

    /// Inserts `v`; returns the reduced vector when it was independent.
    fn insert(&mut self, v: u16) -> Option<u16> {
        // Reduce only until the leading bit lands on an empty slot.
        let mut r = v;
        let mut combo = 0u32;
        while r != 0 {
            let lead = 15 - r.leading_zeros() as usize;
            if self.slots[lead] == 0 {
                break;
            }
            r ^= self.slots[lead];
            combo ^= self.combos[lead];
        }
        if r == 0 {
            return None;
        }
        let lead = 15 - r.leading_zeros() as usize;
        let idx = self.order.len();
        self.slots[lead] = r;
        self.combos[lead] = combo ^ (1 << idx);
        self.order.push(lead);
        Some(r)
    }
}

fn check_all(vectors: &[F2Vec], n: usize) -> Result<(), Gf2Error> {
    check_width(n)?;
    for v in vectors {
        if !v.fits(n) {
            return Err(Gf2Error::OutOfRange {
                bits: u32::from(v.0),
                n,
            });
        }
    }
    Ok(())
}

/// Dimension of the span of `vectors` inside `F_2^n`.
pub fn rank(vectors: &[F2Vec], n: usize) -> Result<usize, Gf2Error> {
    check_all(vectors, n)?;
    Ok(span_basis(vectors).len())
}

/// Echelon basis of the span, pivoting on the highest set bit and consuming
/// the input in order. Each returned vector is the reduced form of the input
/// vector that extended the span.
pub fn span_basis(vectors: &[F2Vec]) -> Vec<F2Vec> {
    let mut ech = Echelon::default();
    vectors.iter().filter_map(|v| ech.insert(v.0).map(F2Vec)).collect()
}

pub fn is_independent(vectors: &[F2Vec]) -> bool {
    span_basis(vectors).len() == vectors.len()
}

/// Basis of `Ker(chi) = { g : <chi, g> = 0 }`, of size `n - 1`.
///
/// With `p` the lowest set bit of `chi`, the basis is `e_j + chi_j e_p` for
/// every `j != p` in increasing order.
pub fn kernel_basis(chi: F2Vec, n: usize) -> Result<Vec<F2Vec>, Gf2Error> {
    check_all(&[chi], n)?;
    let p = chi.trailing_bit().ok_or(Gf2Error::ZeroCharacter)?;
    Ok((0..n)
        .filter(|&j| j != p)
        .map(|j| {
            let mut g = F2Vec::unit(j);
            if chi.bit(j) {
                g += F2Vec::unit(p);
            }
            g
        })
        .collect())
}

/// Restriction of a character to the subgroup spanned by `kernel`, written
/// in the coordinates that basis induces: bit `j` is `<chi, kernel[j]>`.
pub fn restrict_char(chi: F2Vec, kernel: &[F2Vec]) -> F2Vec {
    let mut out = 0u16;
    for (j, g) in kernel.iter().enumerate() {
        if chi.pair(*g) {
            out |= 1 << j;
        }
    }
    F2Vec(out)
}

/// Solves for coordinates against a fixed basis.
#[derive(Debug, Clone)]
pub struct Coordinates {
    ech: Echelon,
    len: usize,
}

impl Coordinates {
    /// Fails with [`Gf2Error::OutsideSpan`] on the first dependent basis vector.
    pub fn new(basis: &[F2Vec]) -> Result<Self, Gf2Error> {
        let mut ech = Echelon::default();
        for b in basis {
            if ech.insert(b.0).is_none() {
                return Err(Gf2Error::Singular);
            }
        }
        Ok(Coordinates { ech, len: basis.len() })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Mask `T` with `chi = sum_{t in T} basis[t]`.
    pub fn of(&self, chi: F2Vec) -> Result<u32, Gf2Error> {
        let (r, combo) = self.ech.reduce(chi.0);
        if r != 0 {
            Err(Gf2Error::OutsideSpan(chi.0))
        } else {
            Ok(combo)
        }
    }

    pub fn contains(&self, chi: F2Vec) -> bool {
        self.ech.reduce(chi.0).0 == 0
    }
}

/// Indices `T` with `chi = sum_{t in T} basis[t]`, as a bitmask over basis positions.
pub fn coordinates_in_basis(chi: F2Vec, basis: &[F2Vec]) -> Result<u32, Gf2Error> {
    Coordinates::new(basis)?.of(chi)
}

/// Sum of the basis vectors selected by `mask`.
pub fn subset_sum(mask: u32, basis: &[F2Vec]) -> F2Vec {
    basis
        .iter()
        .enumerate()
        .filter(|(t, _)| (mask >> t) & 1 == 1)
        .fold(F2Vec::ZERO, |acc, (_, b)| acc + *b)
}

/// Square matrix over `F_2`; row `i` is the image of basis vector `i`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct F2Matrix {
    pub n: usize,
    pub rows: Vec<F2Vec>,
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_bit_str(self.n)).collect();
        write!(f, "F2Matrix[{}]", rows.join(" "))
    }
}

impl F2Matrix {
    pub fn new(n: usize, rows: Vec<F2Vec>) -> Result<Self, Gf2Error> {
        check_all(&rows, n)?;
        if rows.len() != n {
            return Err(Gf2Error::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        Ok(F2Matrix { n, rows })
    }

    pub fn identity(n: usize) -> Self {
        F2Matrix {
            n,
            rows: (0..n).map(F2Vec::unit).collect(),
        }
    }

    /// Elementary matrix sending `e_target` to `e_target + e_added`.
    pub fn transvection(n: usize, target: usize, added: usize) -> Self {
        let mut m = Self::identity(n);
        m.rows[target] += F2Vec::unit(added);
        m
    }

    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::identity(n);
        m.rows.swap(i, j);
        m
    }

    pub fn is_invertible(&self) -> bool {
        is_independent(&self.rows)
    }

    /// `A g = sum_{i in g} rows[i]`.
    pub fn apply(&self, g: F2Vec) -> F2Vec {
        g.ones()
            .filter(|&i| i < self.n)
            .fold(F2Vec::ZERO, |acc, i| acc + self.rows[i])
    }

    /// `(self * other) g = self(other(g))`.
    pub fn compose(&self, other: &F2Matrix) -> F2Matrix {
        F2Matrix {
            n: self.n,
            rows: other.rows.iter().map(|r| self.apply(*r)).collect(),
        }
    }

    pub fn inverse(&self) -> Result<F2Matrix, Gf2Error> {
        let coords = Coordinates::new(&self.rows).map_err(|_| Gf2Error::Singular)?;
        // A^{-1} e_j is the coordinate vector of e_j against the rows.
        let rows = (0..self.n)
            .map(|j| coords.of(F2Vec::unit(j)).map(|m| F2Vec(m as u16)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Gf2Error::Singular)?;
        Ok(F2Matrix { n: self.n, rows })
    }

    /// Character of the representation `g -> chi(A g)`; bit `i` is `<chi, rows[i]>`.
    pub fn dual_apply(&self, chi: F2Vec) -> F2Vec {
        restrict_char(chi, &self.rows)
    }
}

/// Checked form of [`F2Matrix::dual_apply`].
pub fn apply_dual_map(a: &F2Matrix, chi: F2Vec) -> Result<F2Vec, Gf2Error> {
    if !a.is_invertible() {
        return Err(Gf2Error::Singular);
    }
    check_all(&[chi], a.n)?;
    Ok(a.dual_apply(chi))
}

/// Every invertible `n x n` matrix, in a fixed order. Sizes 1, 6, 168, 20160 for n = 1..4.
pub fn general_linear_group(n: usize) -> Vec<F2Matrix> {
    let mut out = Vec::new();
    let mut rows = Vec::with_capacity(n);
    fn extend(n: usize, rows: &mut Vec<F2Vec>, ech: &Echelon, out: &mut Vec<F2Matrix>) {
        if rows.len() == n {
            out.push(F2Matrix { n, rows: rows.clone() });
            return;
        }
        for bits in 1..(1u32 << n) {
            let mut next = ech.clone();
            if next.insert(bits as u16).is_some() {
                rows.push(F2Vec(bits as u16));
                extend(n, rows, &next, out);
                rows.pop();
            }
        }
    }
    extend(n, &mut rows, &Echelon::default(), &mut out);
    out
}
