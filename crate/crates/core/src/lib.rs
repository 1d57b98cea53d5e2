//! Exact reduced equivariant K-groups of representation spheres `S^V` for
//! `G = (Z/2)^n`.
//!
//! Two independent engines compute the same answer: [`oracle`] evaluates the
//! Euler characteristic by a cofiber-sequence recursion, [`reducer`] rewrites the
//! representation into base cases and emits a replayable [`Trace`].

pub mod atlas;
pub mod charclass;
pub mod gf2;
pub mod laws;
pub mod oracle;
pub mod reducer;
pub mod rep;
pub mod twist;

pub use gf2::{F2Matrix, F2Vec};
pub use oracle::{Chi, EulerOracle, KResult, OracleError};
pub use reducer::{reduce, replay_trace, ReduceOptions, Trace};
pub use rep::{canonicalize, parse_rep, CanonicalRep, RepMultiset, Sign};

/// The oracle over machine integers; `2^16` is the largest magnitude reached.
pub type Oracle = EulerOracle<i64>;
/// Wide variant for cross-checks.
pub type WideOracle = EulerOracle<i128>;
/// Euler characteristic as produced by [`Oracle`].
pub type ChiValue = Chi<i64>;
