//! Euler characteristic `chi = rank K^0 - rank K^1` of a representation sphere.
//!
//! The value is computed from the cofiber sequence
//! `G/Ker(chi0)_+ ^ S^W -> S^W -> S^{W + chi0}`, whose long exact sequence gives
//!
//! ```text
//! chi_n(W + chi0) = chi_n(W) - chi_{n-1}(W restricted to Ker(chi0))
//! chi_n(W + 1)    = -chi_n(W)
//! chi_n(0)        = 2^n
//! ```
//!
//! Only exactness is used here; concentration in one parity is applied
//! afterwards, in [`to_k_result`], and fails loudly if violated.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use itertools::Itertools;
use num_traits::{PrimInt, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, F2Vec};
use crate::rep::{canonicalize, CanonicalRep, RepMultiset, Sign};

/// Exact signed integer usable as an Euler characteristic.
pub trait ExactInt: PrimInt + Signed + Hash + fmt::Debug + fmt::Display + Send + Sync {}

impl<T> ExactInt for T where T: PrimInt + Signed + Hash + fmt::Debug + fmt::Display + Send + Sync {}

/// Most summands [`EulerOracle::chi_all_orders`] will permute.
pub const MAX_ORDER_SUMMANDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("integer overflow while evaluating the recursion")]
    Overflow,
    #[error("Euler characteristic {0} is not a signed power of two")]
    NonPowerOfTwo(String),
    #[error("Euler characteristic 2^{m} exceeds the rank bound 2^{n}")]
    RankExceeded { m: u32, n: usize },
    #[error("{got} summands exceeds the order-enumeration cap of {MAX_ORDER_SUMMANDS}")]
    TooManySummands { got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chi<T>(pub T);

impl<T: fmt::Display> fmt::Display for Chi<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `K^k = Z^{2^m}` for `k = epsilon (mod 2)`, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KResult {
    pub m: u32,
    pub epsilon: u8,
}

impl KResult {
    pub fn new(m: u32, epsilon: u8) -> Self {
        KResult {
            m,
            epsilon: epsilon % 2,
        }
    }

    /// `(-1)^epsilon 2^m`.
    pub fn chi(self) -> i64 {
        let mag = 1i64 << self.m;
        if self.epsilon == 1 {
            -mag
        } else {
            mag
        }
    }

    /// Free rank of `K^degree`.
    pub fn rank_in_degree(self, degree: i64) -> u64 {
        if degree.rem_euclid(2) as u8 == self.epsilon {
            1u64 << self.m
        } else {
            0
        }
    }

    pub fn flip(self) -> Self {
        KResult::new(self.m, 1 - self.epsilon)
    }
}

impl fmt::Display for KResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let group = |d: i64| match self.rank_in_degree(d) {
            0 => "0".to_string(),
            r => format!("Z^{r}"),
        };
        write!(
            f,
            "K^0 = {}, K^1 = {} (m={}, eps={})",
            group(0),
            group(1),
            self.m,
            self.epsilon
        )
    }
}

/// Converts `chi = (-1)^eps 2^m` to `(m, eps)`; any other value is an error.
pub fn to_k_result<T: ExactInt>(chi: Chi<T>, n: usize) -> Result<KResult, OracleError> {
    let c = chi.0;
    let mag = if c < T::zero() {
        T::zero().checked_sub(&c).ok_or(OracleError::Overflow)?
    } else {
        c
    };
    if mag.count_ones() != 1 {
        return Err(OracleError::NonPowerOfTwo(c.to_string()));
    }
    let m = mag.trailing_zeros();
    if m as usize > n {
        return Err(OracleError::RankExceeded { m, n });
    }
    Ok(KResult::new(m, u8::from(c < T::zero())))
}

fn pow2<T: ExactInt>(n: usize) -> Result<T, OracleError> {
    num_traits::checked_pow(T::one() + T::one(), n).ok_or(OracleError::Overflow)
}

fn apply_sign<T: ExactInt>(sign: Sign, v: T) -> Result<T, OracleError> {
    match sign {
        Sign::Plus => Ok(v),
        Sign::Minus => T::zero().checked_sub(&v).ok_or(OracleError::Overflow),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    n: u8,
    folded: bool,
    chars: Vec<u16>,
}

/// Recursive evaluator with an optional memo.
///
/// Not shared across threads: parallel callers hold one oracle per worker.
/// Results do not depend on the cache or on pair folding.
#[derive(Debug, Clone)]
pub struct EulerOracle<T> {
    memo: Option<HashMap<MemoKey, T>>,
    fold_pairs: bool,
}

impl<T: ExactInt> Default for EulerOracle<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: ExactInt> EulerOracle<T> {
    /// Memoized, with complex pairs and trivial summands folded away before
    /// each lookup.
    pub fn new() -> Self {
        EulerOracle {
            memo: Some(HashMap::new()),
            fold_pairs: true,
        }
    }

    /// Literal recursion on exact multiplicities, one summand at a time.
    pub fn literal() -> Self {
        EulerOracle {
            memo: Some(HashMap::new()),
            fold_pairs: false,
        }
    }

    pub fn with_options(memo: bool, fold_pairs: bool) -> Self {
        EulerOracle {
            memo: memo.then(HashMap::new),
            fold_pairs,
        }
    }

    pub fn cache_len(&self) -> usize {
        self.memo.as_ref().map_or(0, HashMap::len)
    }

    pub fn chi(&mut self, rep: &RepMultiset) -> Result<Chi<T>, OracleError> {
        if self.fold_pairs {
            self.chi_canonical(&canonicalize(rep))
        } else {
            self.literal_chi(rep).map(Chi)
        }
    }

    pub fn chi_canonical(&mut self, rep: &CanonicalRep) -> Result<Chi<T>, OracleError> {
        if self.fold_pairs {
            let v = self.folded_chi(rep.n, &rep.chars_vec())?;
            apply_sign(rep.sign, v).map(Chi)
        } else {
            self.literal_chi(&rep.to_multiset()).map(Chi)
        }
    }

    /// `chi` of a set of distinct nonzero characters on rank `n`.
    pub fn chi_set(&mut self, n: usize, chars: &[F2Vec]) -> Result<Chi<T>, OracleError> {
        let mut sorted = chars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.retain(|c| !c.is_zero());
        if self.fold_pairs {
            self.folded_chi(n, &sorted).map(Chi)
        } else {
            let rep = RepMultiset::from_chars(n, sorted).expect("characters fit the rank");
            self.literal_chi(&rep).map(Chi)
        }
    }

    pub fn k_groups(&mut self, rep: &RepMultiset) -> Result<KResult, OracleError> {
        let c = self.chi(rep)?;
        to_k_result(c, rep.rank())
    }

    pub fn k_groups_canonical(&mut self, rep: &CanonicalRep) -> Result<KResult, OracleError> {
        let c = self.chi_canonical(rep)?;
        to_k_result(c, rep.n)
    }

    // `chars` is sorted, distinct and nonzero.
    fn folded_chi(&mut self, n: usize, chars: &[F2Vec]) -> Result<T, OracleError> {
        if chars.is_empty() {
            return pow2(n);
        }
        let key = MemoKey {
            n: n as u8,
            folded: true,
            chars: chars.iter().map(|c| c.bits()).collect(),
        };
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&key)) {
            return Ok(*v);
        }
        // Peel the largest remaining character until the set is empty.
        let mut acc: T = pow2(n)?;
        for k in 0..chars.len() {
            let pivot = chars[k];
            let kernel = gf2::kernel_basis(pivot, n).expect("pivot is nonzero");
            let mut trivial = 0usize;
            let mut odd: Vec<F2Vec> = Vec::with_capacity(k);
            for mu in &chars[..k] {
                let r = gf2::restrict_char(*mu, &kernel);
                if r.is_zero() {
                    trivial += 1;
                } else {
                    odd.push(r);
                }
            }
            odd.sort_unstable();
            let folded: Vec<F2Vec> = odd
                .into_iter()
                .dedup_with_count()
                .filter(|(cnt, _)| cnt % 2 == 1)
                .map(|(_, c)| c)
                .collect();
            let sub = self.folded_chi(n - 1, &folded)?;
            let sub = apply_sign(Sign::from_parity(trivial % 2 == 1), sub)?;
            acc = acc.checked_sub(&sub).ok_or(OracleError::Overflow)?;
        }
        if let Some(m) = self.memo.as_mut() {
            m.insert(key, acc);
        }
        Ok(acc)
    }

    fn literal_chi(&mut self, rep: &RepMultiset) -> Result<T, OracleError> {
        let n = rep.rank();
        let trivial = rep.count(F2Vec::ZERO);
        let summands: Vec<F2Vec> = rep.summands().into_iter().filter(|c| !c.is_zero()).collect();
        let v = self.literal_nontrivial(n, &summands)?;
        apply_sign(Sign::from_parity(trivial % 2 == 1), v)
    }

    // `summands` sorted, nonzero, with repetition.
    fn literal_nontrivial(&mut self, n: usize, summands: &[F2Vec]) -> Result<T, OracleError> {
        if summands.is_empty() {
            return pow2(n);
        }
        let key = MemoKey {
            n: n as u8,
            folded: false,
            chars: summands.iter().map(|c| c.bits()).collect(),
        };
        if let Some(v) = self.memo.as_ref().and_then(|m| m.get(&key)) {
            return Ok(*v);
        }
        let mut acc: T = pow2(n)?;
        for k in 0..summands.len() {
            let kernel = gf2::kernel_basis(summands[k], n).expect("pivot is nonzero");
            let mut sub_rep = RepMultiset::new(n - 1).expect("rank fits");
            for mu in &summands[..k] {
                sub_rep
                    .add(gf2::restrict_char(*mu, &kernel), 1)
                    .expect("restriction fits");
            }
            let sub = self.literal_chi(&sub_rep)?;
            acc = acc.checked_sub(&sub).ok_or(OracleError::Overflow)?;
        }
        if let Some(m) = self.memo.as_mut() {
            m.insert(key, acc);
        }
        Ok(acc)
    }

    /// The recursion with an explicit pivot order: trivial summands are
    /// stripped first, then the last summand is the pivot. Uncached.
    pub fn chi_in_order(n: usize, order: &[F2Vec]) -> Result<Chi<T>, OracleError> {
        fn go<T: ExactInt>(n: usize, order: &[F2Vec]) -> Result<T, OracleError> {
            if let Some(pos) = order.iter().position(|c| c.is_zero()) {
                let mut rest = order.to_vec();
                rest.remove(pos);
                let v = go::<T>(n, &rest)?;
                return T::zero().checked_sub(&v).ok_or(OracleError::Overflow);
            }
            let Some((&pivot, rest)) = order.split_last() else {
                return pow2(n);
            };
            let kernel = gf2::kernel_basis(pivot, n).expect("pivot is nonzero");
            let restricted: Vec<F2Vec> = rest.iter().map(|mu| gf2::restrict_char(*mu, &kernel)).collect();
            let a = go::<T>(n, rest)?;
            let b = go::<T>(n - 1, &restricted)?;
            a.checked_sub(&b).ok_or(OracleError::Overflow)
        }
        go::<T>(n, order).map(Chi)
    }

    /// Re-runs the recursion for up to `max_orders` permutations of the
    /// summands, in lexicographic order of positions.
    pub fn chi_all_orders(rep: &RepMultiset, max_orders: usize) -> Result<Vec<Chi<T>>, OracleError> {
        let summands = rep.summands();
        if summands.len() > MAX_ORDER_SUMMANDS {
            return Err(OracleError::TooManySummands { got: summands.len() });
        }
        let len = summands.len();
        (0..len)
            .permutations(len)
            .take(max_orders)
            .map(|perm| {
                let order: Vec<F2Vec> = perm.iter().map(|&i| summands[i]).collect();
                Self::chi_in_order(rep.rank(), &order)
            })
            .collect()
    }
}
