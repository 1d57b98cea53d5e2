//! Twisted K-groups with compact supports, untwisted by a representation shift.
//!
//! A twisting `tau = sum eps_ij beta(x_i x_j)` in `H^3((Z/2)^n; Z)` is paid for
//! by adding one quartet `1 + alpha_i + alpha_j + alpha_i alpha_j` per pair:
//! the quartet's `w_3 = beta w_2` is exactly `beta(x_i x_j)`.

use std::fmt;

use thiserror::Error;

use crate::charclass::{self, Lambda2Class};
use crate::oracle::{KResult, OracleError};
use crate::reducer::{self, ReduceError, ReduceOptions};
use crate::rep::{RepError, RepMultiset};
use crate::Oracle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwistError {
    #[error("twist pair {0}-{1} must satisfy 1 <= i < j <= {2}")]
    BadPair(usize, usize, usize),
    #[error("cannot parse twist term {0:?}; expected i-j")]
    Syntax(String),
    #[error("bundle is not orientable: w1 = {0}")]
    NotOrientable(String),
    #[error("the oracle and the reducer disagree on the shifted representation: {oracle:?} vs {reducer:?}")]
    EngineDisagreement { oracle: KResult, reducer: KResult },
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Twist {
    pub n: usize,
    pub pairs: Lambda2Class,
}

impl Twist {
    pub fn untwisted(n: usize) -> Self {
        Twist {
            n,
            pairs: Lambda2Class::empty(),
        }
    }

    pub fn new(n: usize, pairs: Lambda2Class) -> Result<Self, TwistError> {
        for &(i, j) in &pairs.pairs {
            if i == 0 || i >= j || j > n {
                return Err(TwistError::BadPair(i, j, n));
            }
        }
        Ok(Twist { n, pairs })
    }

    /// Parses `"1-2,2-3"`. The empty string is the trivial twist.
    pub fn parse(s: &str, n: usize) -> Result<Self, TwistError> {
        let mut pairs = Lambda2Class::empty();
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (i, j) = term
                .split_once('-')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| TwistError::Syntax(term.to_string()))?;
            if i == 0 || i >= j || j > n {
                return Err(TwistError::BadPair(i, j, n));
            }
            pairs = pairs.sum(&Lambda2Class::single(i, j));
        }
        Ok(Twist { n, pairs })
    }

    pub fn is_trivial(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Twists add in `Lambda^2`: symmetric difference of pairs.
    pub fn compose(&self, other: &Twist) -> Twist {
        Twist {
            n: self.n.max(other.n),
            pairs: self.pairs.sum(&other.pairs),
        }
    }
}

impl fmt::Display for Twist {
    /// Inverse of [`Twist::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.pairs.pairs.iter().map(|(i, j)| format!("{i}-{j}")).collect();
        f.write_str(&s.join(","))
    }
}

/// `V + sum_{(i,j) in tau} (1 + alpha_i + alpha_j + alpha_i alpha_j)`.
pub fn shift_rep(v: &RepMultiset, tau: &Twist) -> Result<RepMultiset, TwistError> {
    if tau.n != v.rank() {
        return Err(RepError::RankMismatch(v.rank(), tau.n).into());
    }
    let mut out = v.clone();
    for &(i, j) in &tau.pairs.pairs {
        out = out.direct_sum(&charclass::twisting_quartet(v.rank(), i, j))?;
    }
    Ok(out)
}

pub fn twisted_k_groups(v: &RepMultiset, tau: &Twist, oracle: &mut Oracle) -> Result<KResult, TwistError> {
    Ok(oracle.k_groups(&shift_rep(v, tau)?)?)
}

/// Runs both engines on the shifted representation and insists they agree.
pub fn twisted_k_groups_verified(v: &RepMultiset, tau: &Twist, oracle: &mut Oracle) -> Result<KResult, TwistError> {
    let shifted = shift_rep(v, tau)?;
    let by_oracle = oracle.k_groups(&shifted)?;
    let (by_reducer, _) = reducer::reduce_with(&shifted, ReduceOptions::default(), oracle)?;
    if by_oracle != by_reducer {
        return Err(TwistError::EngineDisagreement {
            oracle: by_oracle,
            reducer: by_reducer,
        });
    }
    Ok(by_oracle)
}

/// The twisting `w_3 = beta w_2` of an orientable bundle.
pub fn twist_of_bundle(rep: &RepMultiset) -> Result<Twist, TwistError> {
    let w1 = charclass::w_k(rep, 1).expect("degree 1 is in range");
    if !w1.is_zero() {
        return Err(TwistError::NotOrientable(w1.to_string()));
    }
    Twist::new(rep.rank(), charclass::bockstein_w2(rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charclass::spin_octet;
    use crate::gf2::F2Vec;
    use crate::rep::{canonicalize, parse_rep};

    #[test]
    fn parse_and_validate() {
        let t = Twist::parse("1-2,2-3", 3).unwrap();
        assert_eq!(t.pairs.pairs.iter().copied().collect::<Vec<_>>(), vec![(1, 2), (2, 3)]);
        assert_eq!(t.to_string(), "1-2,2-3");
        assert!(Twist::parse("", 3).unwrap().is_trivial());
        assert_eq!(Twist::parse("2-1", 3), Err(TwistError::BadPair(2, 1, 3)));
        assert_eq!(Twist::parse("1-1", 3), Err(TwistError::BadPair(1, 1, 3)));
        assert_eq!(Twist::parse("1-4", 3), Err(TwistError::BadPair(1, 4, 3)));
        assert_eq!(Twist::parse("0-2", 3), Err(TwistError::BadPair(0, 2, 3)));
        assert!(matches!(Twist::parse("1:2", 3), Err(TwistError::Syntax(_))));
    }

    #[test]
    fn shift_examples() {
        let v = parse_rep("a+bc", 3).unwrap();
        assert_eq!(shift_rep(&v, &Twist::untwisted(3)).unwrap(), v);

        let zero = RepMultiset::new(2).unwrap();
        let t = Twist::parse("1-2", 2).unwrap();
        assert_eq!(shift_rep(&zero, &t).unwrap(), parse_rep("1+a+b+ab", 2).unwrap());

        let twice = shift_rep(&shift_rep(&v, &t3()).unwrap(), &t3()).unwrap();
        assert_eq!(twice.dimension(), v.dimension() + 8);
        assert_eq!(canonicalize(&twice), canonicalize(&v));
    }

    fn t3() -> Twist {
        Twist::parse("1-3", 3).unwrap()
    }

    #[test]
    fn worked_twisted_value() {
        let mut o = Oracle::new();
        let zero = RepMultiset::new(2).unwrap();
        let t = Twist::parse("1-2", 2).unwrap();
        assert_eq!(twisted_k_groups(&zero, &t, &mut o).unwrap(), KResult::new(0, 0));
        assert_eq!(
            twisted_k_groups_verified(&zero, &t, &mut o).unwrap(),
            KResult::new(0, 0)
        );
    }

    #[test]
    fn bundle_twists() {
        let q = parse_rep("1+a+b+ab", 2).unwrap();
        assert_eq!(twist_of_bundle(&q).unwrap(), Twist::parse("1-2", 2).unwrap());
        let u = spin_octet(3, F2Vec(1), F2Vec(2), F2Vec(4));
        assert!(twist_of_bundle(&u).unwrap().is_trivial());
        assert!(matches!(
            twist_of_bundle(&parse_rep("a", 2).unwrap()),
            Err(TwistError::NotOrientable(_))
        ));
    }
}
