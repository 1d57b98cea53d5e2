//! Algebraic identities the Euler characteristic must satisfy, as checks
//! that report the offending values, plus seeded generators for their inputs.
//!
//! Each `check_*` returns `Ok(())` when the identity holds.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::gf2::{self, F2Matrix, F2Vec};
use crate::oracle::EulerOracle;
use crate::rep::RepMultiset;
use crate::Oracle;

pub type LawResult = Result<(), String>;

fn chi(oracle: &mut Oracle, rep: &RepMultiset) -> Result<i64, String> {
    oracle.chi(rep).map(|c| c.0).map_err(|e| e.to_string())
}

fn chi_set(oracle: &mut Oracle, n: usize, chars: &[F2Vec]) -> Result<i64, String> {
    oracle.chi_set(n, chars).map(|c| c.0).map_err(|e| e.to_string())
}

fn plus(rep: &RepMultiset, chi: F2Vec, k: u32) -> RepMultiset {
    let mut out = rep.clone();
    out.add(chi, k).expect("character fits the rank");
    out
}

/// `chi(V + 1) = -chi(V)`.
pub fn check_suspension(oracle: &mut Oracle, rep: &RepMultiset) -> LawResult {
    let before = chi(oracle, rep)?;
    let after = chi(oracle, &plus(rep, F2Vec::ZERO, 1))?;
    if after == -before {
        Ok(())
    } else {
        Err(format!("chi(V) = {before}, chi(V + 1) = {after}"))
    }
}

/// `chi(V + 2 chi) = chi(V)`, checked on the literal recursion so the pair
/// folding inside the default oracle is not assumed.
pub fn check_complex_pair(rep: &RepMultiset, pair: F2Vec) -> LawResult {
    let mut literal = EulerOracle::<i64>::literal();
    let before = literal.chi(rep).map_err(|e| e.to_string())?.0;
    let after = literal.chi(&plus(rep, pair, 2)).map_err(|e| e.to_string())?.0;
    if after == before {
        Ok(())
    } else {
        Err(format!("chi(V) = {before}, chi(V + 2*{pair:?}) = {after}"))
    }
}

/// `chi(A V) = chi(V)` for invertible `A`.
pub fn check_gl_invariance(oracle: &mut Oracle, rep: &RepMultiset, a: &F2Matrix) -> LawResult {
    let moved = rep.map_chars(a).map_err(|e| e.to_string())?;
    let before = chi(oracle, rep)?;
    let after = chi(oracle, &moved)?;
    if after == before {
        Ok(())
    } else {
        Err(format!("chi(V) = {before}, chi(AV) = {after}"))
    }
}

/// The seven nonzero sums of an independent triple.
pub fn toggle_set(a: F2Vec, b: F2Vec, c: F2Vec) -> [F2Vec; 7] {
    [a, b, c, a + b, a + c, b + c, a + b + c]
}

/// Toggling a distinct character set by an independent triple negates chi.
pub fn check_toggle(oracle: &mut Oracle, n: usize, set: &[F2Vec], triple: [F2Vec; 3]) -> LawResult {
    if !gf2::is_independent(&triple) {
        return Err(format!("triple {triple:?} is dependent"));
    }
    let mut toggled: Vec<F2Vec> = set.to_vec();
    for t in toggle_set(triple[0], triple[1], triple[2]) {
        match toggled.iter().position(|&c| c == t) {
            Some(i) => {
                toggled.remove(i);
            }
            None => toggled.push(t),
        }
    }
    let before = chi_set(oracle, n, set)?;
    let after = chi_set(oracle, n, &toggled)?;
    if after == -before {
        Ok(())
    } else {
        Err(format!("chi(S) = {before}, chi(toggled) = {after}"))
    }
}

/// `chars` re-expressed in coordinates of a basis of their span.
pub fn in_own_span(chars: &[F2Vec]) -> (usize, Vec<F2Vec>) {
    let basis = gf2::span_basis(chars);
    let local = chars
        .iter()
        .map(|&c| F2Vec(gf2::coordinates_in_basis(c, &basis).expect("in span") as u16))
        .collect();
    (basis.len(), local)
}

/// `chi_n(S1 u S2) = chi_{d1}(S1) chi_{d2}(S2) 2^(n - d1 - d2)` when the
/// spans meet only in zero.
pub fn check_kunneth(oracle: &mut Oracle, n: usize, s1: &[F2Vec], s2: &[F2Vec]) -> LawResult {
    let union: Vec<F2Vec> = s1.iter().chain(s2).copied().collect();
    let (d1, l1) = in_own_span(s1);
    let (d2, l2) = in_own_span(s2);
    if gf2::rank(&union, n).map_err(|e| e.to_string())? != d1 + d2 {
        return Err("spans intersect".into());
    }
    let whole = chi_set(oracle, n, &union)?;
    let product = (chi_set(oracle, d1, &l1)? * chi_set(oracle, d2, &l2)?) << (n - d1 - d2);
    if whole == product {
        Ok(())
    } else {
        Err(format!("chi(S1 u S2) = {whole}, product = {product}"))
    }
}

/// The recursion gives the same value for the lexicographically first
/// `max_orders` pivot orders and for each extra order in `shuffled`.
pub fn check_order_independence(rep: &RepMultiset, max_orders: usize, shuffled: &[Vec<F2Vec>]) -> LawResult {
    let mut values: Vec<i64> = Oracle::chi_all_orders(rep, max_orders)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|c| c.0)
        .collect();
    for order in shuffled {
        values.push(Oracle::chi_in_order(rep.rank(), order).map_err(|e| e.to_string())?.0);
    }
    let memo = Oracle::new().chi(rep).map_err(|e| e.to_string())?.0;
    match values.iter().find(|&&v| v != memo) {
        None => Ok(()),
        Some(v) => Err(format!("memoized chi = {memo}, some order gives {v}")),
    }
}

/// `|chi| = 2^m` with `m <= n`.
pub fn check_power_of_two(oracle: &mut Oracle, n: usize, set: &[F2Vec]) -> LawResult {
    let v = chi_set(oracle, n, set)?;
    let a = v.unsigned_abs();
    if a.is_power_of_two() && a <= 1 << n {
        Ok(())
    } else {
        Err(format!("chi = {v} at rank {n}"))
    }
}

pub fn random_char<R: Rng>(rng: &mut R, n: usize) -> F2Vec {
    F2Vec(rng.gen_range(0..1u32 << n) as u16)
}

pub fn random_nonzero_char<R: Rng>(rng: &mut R, n: usize) -> F2Vec {
    F2Vec(rng.gen_range(1..1u32 << n) as u16)
}

/// Up to `max_len` summands with repeats and trivial summands allowed.
pub fn random_rep<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> RepMultiset {
    let len = rng.gen_range(0..=max_len);
    RepMultiset::from_chars(n, (0..len).map(|_| random_char(rng, n))).expect("characters fit")
}

/// Each nonzero character kept with probability one half.
pub fn random_set<R: Rng>(rng: &mut R, n: usize) -> Vec<F2Vec> {
    (1..1u32 << n)
        .filter(|_| rng.gen_bool(0.5))
        .map(|c| F2Vec(c as u16))
        .collect()
}

pub fn random_gl<R: Rng>(rng: &mut R, n: usize) -> F2Matrix {
    loop {
        let rows = (0..n).map(|_| random_char(rng, n)).collect();
        let a = F2Matrix::new(n, rows).expect("rows fit");
        if a.is_invertible() {
            return a;
        }
    }
}

/// Needs `n >= 3`.
pub fn random_independent_triple<R: Rng>(rng: &mut R, n: usize) -> [F2Vec; 3] {
    loop {
        let t = [random_char(rng, n), random_char(rng, n), random_char(rng, n)];
        if gf2::is_independent(&t) {
            return t;
        }
    }
}

/// Two character sets whose spans are complementary pieces of a random
/// splitting of `F_2^n` (one of them may be empty).
pub fn random_split_sets<R: Rng>(rng: &mut R, n: usize) -> (Vec<F2Vec>, Vec<F2Vec>) {
    let a = random_gl(rng, n);
    let d1 = rng.gen_range(0..=n);
    // Images of the unit vectors under A form a random basis; split it.
    let basis: Vec<F2Vec> = (0..n).map(|i| a.apply(F2Vec::unit(i))).collect();
    let mut pick = |part: &[F2Vec]| -> Vec<F2Vec> {
        (1..1u32 << part.len())
            .filter(|_| rng.gen_bool(0.5))
            .map(|mask| gf2::subset_sum(mask, part))
            .collect()
    };
    let s1 = pick(&basis[..d1]);
    let s2 = pick(&basis[d1..]);
    (s1, s2)
}

pub fn shuffled_orders<R: Rng>(rng: &mut R, rep: &RepMultiset, count: usize) -> Vec<Vec<F2Vec>> {
    let summands = rep.summands();
    (0..count)
        .map(|_| {
            let mut order = summands.clone();
            order.shuffle(rng);
            order
        })
        .collect()
}
