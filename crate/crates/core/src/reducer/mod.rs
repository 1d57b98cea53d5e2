//! Rewriting of a representation, encoded as a hypergraph over a basis of
//! characters, down to a disjoint union of rank-1 and rank-2 base cases.
//!
//! Moves:
//! - *spin toggle*: add the spin octet `1 + a + b + c + ab + ac + bc + abc`,
//!   cancel complex pairs and desuspend the trivial summand. On the set of
//!   characters this is a symmetric difference with the seven nonzero
//!   products and a sign flip.
//! - *base change*: re-express the same characters in another basis.
//!
//! Every move keeps `sign * chi(S)` fixed; [`MoveLog::checked`] verifies that
//! against the oracle after each move.

mod trace;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, Coordinates, F2Matrix, F2Vec};
use crate::oracle::{KResult, OracleError};
use crate::rep::{canonicalize, CanonicalRep, RepMultiset, Sign};
use crate::Oracle;

pub use trace::{replay_trace, ReplayError, Step, Trace, TraceParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("toggle triple {0:x}, {1:x}, {2:x} is dependent")]
    DependentTriple(F2Vec, F2Vec, F2Vec),
    #[error("vertex {v}: degree did not drop below {before} after a reduction pass")]
    DegreeNotReduced { v: usize, before: usize },
    #[error("vertex {v} still lies in a set of cardinality {card} after reduction")]
    LargeSetAtVertex { v: usize, card: u32 },
    #[error("vertex {0} out of range")]
    NoSuchVertex(usize),
    #[error("hypergraph is not a graph of maximum degree one: {0}")]
    NotSplittable(String),
    #[error("component with local sets {0:?} matches no base case")]
    UnrecognizedPattern(Vec<u32>),
    #[error("move {index}: sign * chi drifted from {expected} to {got}")]
    ChiDrift { index: usize, expected: i64, got: i64 },
    #[error("invalid base change: {0}")]
    BadBaseChange(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Local base cases of the split, with their `(m, eps)` over the local rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// `{v}` on rank 1.
    MarkedVertex,
    /// `{vw}` on rank 2.
    BareEdge,
    /// `{v, vw}` on rank 2.
    MarkedEdge,
    /// `{v, w, vw}` on rank 2.
    HardTriangle,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [
        Pattern::MarkedVertex,
        Pattern::BareEdge,
        Pattern::MarkedEdge,
        Pattern::HardTriangle,
    ];

    pub fn value(self) -> KResult {
        match self {
            Pattern::MarkedVertex => KResult::new(0, 0),
            Pattern::BareEdge => KResult::new(1, 0),
            Pattern::MarkedEdge => KResult::new(0, 0),
            Pattern::HardTriangle => KResult::new(0, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pattern::MarkedVertex => "marked-vertex",
            Pattern::BareEdge => "bare-edge",
            Pattern::MarkedEdge => "marked-edge",
            Pattern::HardTriangle => "hard-triangle",
        }
    }

    pub fn from_name(s: &str) -> Option<Pattern> {
        Pattern::ALL.into_iter().find(|p| p.name() == s)
    }

    /// Classifies local sets (masks over the component's own vertices).
    pub fn classify(rank: usize, sets: &[u32]) -> Option<Pattern> {
        let mut s = sets.to_vec();
        s.sort_unstable();
        match (rank, s.as_slice()) {
            (1, [0b1]) => Some(Pattern::MarkedVertex),
            (2, [0b11]) => Some(Pattern::BareEdge),
            (2, [0b01, 0b11]) | (2, [0b10, 0b11]) => Some(Pattern::MarkedEdge),
            (2, [0b01, 0b10, 0b11]) => Some(Pattern::HardTriangle),
            _ => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One step of a reduction certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Move {
    SpinToggle {
        a: F2Vec,
        b: F2Vec,
        c: F2Vec,
    },
    /// Row `i` holds the coordinates of the new basis vector `i` in the old basis.
    BaseChange {
        matrix: F2Matrix,
    },
    /// Replace the basis by one that still spans every character.
    Rebuild {
        basis: Vec<F2Vec>,
    },
    KunnethSplit {
        parts: Vec<Vec<usize>>,
    },
    BaseCase {
        component: usize,
        pattern: Pattern,
        local: KResult,
    },
}

/// Character set `S` over a basis of vertices, with the desuspension sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub ambient_n: usize,
    pub basis: Vec<F2Vec>,
    /// Distinct nonempty masks over basis positions.
    pub sets: BTreeSet<u32>,
    pub sign: Sign,
}

/// Locks the basis to the span of `S` and records each character's coordinates.
pub fn build_hypergraph(rep: &CanonicalRep) -> Hypergraph {
    let chars = rep.chars_vec();
    let basis = gf2::span_basis(&chars);
    let coords = Coordinates::new(&basis).expect("echelon basis is independent");
    let sets = chars
        .iter()
        .map(|c| coords.of(*c).expect("character lies in its own span"))
        .collect();
    Hypergraph {
        ambient_n: rep.n,
        basis,
        sets,
        sign: rep.sign,
    }
}

impl Hypergraph {
    /// Encodes `rep` over a caller-chosen independent basis spanning its characters.
    pub fn over_basis(rep: &CanonicalRep, basis: Vec<F2Vec>) -> Result<Hypergraph, gf2::Gf2Error> {
        let mut h = Hypergraph {
            ambient_n: rep.n,
            basis,
            sets: BTreeSet::new(),
            sign: rep.sign,
        };
        h.recompute_sets(&rep.chars_vec())?;
        Ok(h)
    }
}

fn octet(a: u32, b: u32, c: u32) -> [u32; 7] {
    [a, b, c, a ^ b, a ^ c, b ^ c, a ^ b ^ c]
}

impl Hypergraph {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The represented characters.
    pub fn chars(&self) -> BTreeSet<F2Vec> {
        self.sets.iter().map(|m| gf2::subset_sum(*m, &self.basis)).collect()
    }

    pub fn to_canonical(&self) -> CanonicalRep {
        CanonicalRep {
            n: self.ambient_n,
            chars: self.chars(),
            sign: self.sign,
        }
    }

    pub fn max_cardinality(&self) -> u32 {
        self.sets.iter().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    pub fn is_graph(&self) -> bool {
        self.max_cardinality() <= 2
    }

    pub fn is_marked(&self, v: usize) -> bool {
        self.sets.contains(&(1 << v))
    }

    /// Other endpoints of the edges at `v`, increasing.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.sets
            .iter()
            .filter(|m| m.count_ones() == 2 && (*m >> v) & 1 == 1)
            .map(|m| (m & !(1 << v)).trailing_zeros() as usize)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.sets
            .iter()
            .filter(|m| m.count_ones() == 2 && (*m >> v) & 1 == 1)
            .count()
    }

    fn largest_set_at(&self, v: usize) -> u32 {
        self.sets
            .iter()
            .filter(|m| (*m >> v) & 1 == 1)
            .map(|m| m.count_ones())
            .max()
            .unwrap_or(0)
    }

    fn recompute_sets(&mut self, chars: &[F2Vec]) -> Result<(), gf2::Gf2Error> {
        let coords = Coordinates::new(&self.basis)?;
        self.sets = chars.iter().map(|c| coords.of(*c)).collect::<Result<_, _>>()?;
        Ok(())
    }

    /// Checked application of a state-changing move (toggle, base change or
    /// rebuild). Split and base-case moves leave the state alone.
    pub(crate) fn apply(&mut self, mv: &Move) -> Result<(), String> {
        match mv {
            Move::SpinToggle { a, b, c } => {
                if !gf2::is_independent(&[*a, *b, *c]) {
                    return Err(format!("toggle triple {a:x}, {b:x}, {c:x} is dependent"));
                }
                let coords = Coordinates::new(&self.basis).map_err(|e| e.to_string())?;
                let (ca, cb, cc) = match (coords.of(*a), coords.of(*b), coords.of(*c)) {
                    (Ok(x), Ok(y), Ok(z)) => (x, y, z),
                    _ => return Err("toggle triple leaves the span of the basis".into()),
                };
                for m in octet(ca, cb, cc) {
                    if !self.sets.remove(&m) {
                        self.sets.insert(m);
                    }
                }
                self.sign = self.sign.flip();
                Ok(())
            }
            Move::BaseChange { matrix } => {
                let p = self.rank();
                if matrix.n != p || matrix.rows.len() != p {
                    return Err(format!("base change of size {} on a basis of size {p}", matrix.n));
                }
                if matrix.rows.iter().any(|r| !r.fits(p)) {
                    return Err("base change row exceeds the basis size".into());
                }
                if !matrix.is_invertible() {
                    return Err("base change matrix is singular".into());
                }
                let chars: Vec<F2Vec> = self.chars().into_iter().collect();
                self.basis = matrix
                    .rows
                    .iter()
                    .map(|r| gf2::subset_sum(u32::from(r.bits()), &self.basis))
                    .collect();
                self.recompute_sets(&chars).map_err(|e| e.to_string())
            }
            Move::Rebuild { basis } => {
                if basis.len() > self.ambient_n || basis.iter().any(|b| !b.fits(self.ambient_n)) {
                    return Err("rebuilt basis does not fit the ambient rank".into());
                }
                if !gf2::is_independent(basis) {
                    return Err("rebuilt basis is dependent".into());
                }
                let chars: Vec<F2Vec> = self.chars().into_iter().collect();
                let old = std::mem::replace(&mut self.basis, basis.clone());
                if self.recompute_sets(&chars).is_err() {
                    self.basis = old;
                    return Err("rebuilt basis does not span the characters".into());
                }
                Ok(())
            }
            Move::KunnethSplit { .. } | Move::BaseCase { .. } => Ok(()),
        }
    }

    /// `S <- S + {a, b, c, a+b, a+c, b+c, a+b+c}`, sign flipped. Extends the
    /// basis first (a `Rebuild` move) when the triple leaves its span.
    pub fn spin_toggle(&mut self, a: F2Vec, b: F2Vec, c: F2Vec, log: &mut MoveLog) -> Result<(), ReduceError> {
        if !gf2::is_independent(&[a, b, c]) {
            return Err(ReduceError::DependentTriple(a, b, c));
        }
        let coords = Coordinates::new(&self.basis).expect("basis is independent");
        if [a, b, c].iter().any(|x| !coords.contains(*x)) {
            let mut basis = self.basis.clone();
            for x in [a, b, c] {
                let mut extended = basis.clone();
                extended.push(x);
                if gf2::is_independent(&extended) {
                    basis = extended;
                }
            }
            log.push(self, Move::Rebuild { basis })?;
        }
        log.push(self, Move::SpinToggle { a, b, c })
    }

    fn toggle_vertices(&mut self, x: usize, y: usize, z: usize, log: &mut MoveLog) -> Result<(), ReduceError> {
        let (a, b, c) = (self.basis[x], self.basis[y], self.basis[z]);
        log.push(self, Move::SpinToggle { a, b, c })
    }

    /// Replaces basis vector `target` by `target + added`.
    fn replace_vertex(&mut self, target: usize, added: usize, log: &mut MoveLog) -> Result<(), ReduceError> {
        let matrix = F2Matrix::transvection(self.rank(), target, added);
        log.push(self, Move::BaseChange { matrix })
    }

    /// Toggles away every set of cardinality at least three. The set toggled
    /// is the largest (then smallest mask), split as first vertex, second
    /// vertex, product of the rest; all seven toggled sets but the set itself
    /// are strictly smaller, so the process terminates.
    pub fn to_graph(&mut self, log: &mut MoveLog) -> Result<(), ReduceError> {
        loop {
            let Some(&big) = self
                .sets
                .iter()
                .filter(|m| m.count_ones() >= 3)
                .max_by_key(|m| (m.count_ones(), std::cmp::Reverse(**m)))
            else {
                return Ok(());
            };
            let x = big.trailing_zeros() as usize;
            let rest = big & !(1 << x);
            let y = rest.trailing_zeros() as usize;
            let rest = rest & !(1 << y);
            let a = self.basis[x];
            let b = self.basis[y];
            let c = gf2::subset_sum(rest, &self.basis);
            log.push(self, Move::SpinToggle { a, b, c })?;
        }
    }

    /// Lowers the degree of `v` to at most one. See [`Hypergraph::reduce_vertex_avoiding`].
    pub fn reduce_vertex(&mut self, v: usize, log: &mut MoveLog) -> Result<(), ReduceError> {
        self.reduce_vertex_avoiding(v, None, log)
    }

    /// Lowers the number of edges at `v` other than `{v, keep}` to at most one.
    ///
    /// Each pass takes the edges `{v,w}`, `{v,u}` to the two lowest
    /// neighbours, toggles on `(v, w, u)` and replaces `w` by `w + u`: both
    /// edges disappear and `{v,u,w}` becomes the single edge `{v, w+u}`.
    /// Remaining large sets avoid `v` and are toggled away.
    pub fn reduce_vertex_avoiding(
        &mut self,
        v: usize,
        keep: Option<usize>,
        log: &mut MoveLog,
    ) -> Result<(), ReduceError> {
        if v >= self.rank() || keep.is_some_and(|k| k >= self.rank()) {
            return Err(ReduceError::NoSuchVertex(v.max(keep.unwrap_or(0))));
        }
        self.to_graph(log)?;
        loop {
            let others: Vec<usize> = self.neighbors(v).into_iter().filter(|&x| Some(x) != keep).collect();
            if others.len() < 2 {
                return Ok(());
            }
            let before = self.degree(v);
            let (w, u) = (others[0], others[1]);
            self.toggle_vertices(v, w, u, log)?;
            self.replace_vertex(w, u, log)?;
            let card = self.largest_set_at(v);
            if card > 2 {
                return Err(ReduceError::LargeSetAtVertex { v, card });
            }
            self.to_graph(log)?;
            if self.degree(v) >= before {
                return Err(ReduceError::DegreeNotReduced { v, before });
            }
        }
    }

    /// Connected components of a graph of maximum degree one. Vertices in no
    /// set are dropped into the free rank.
    pub fn split_components(&self) -> Result<Split, ReduceError> {
        if !self.is_graph() {
            return Err(ReduceError::NotSplittable(format!(
                "set of cardinality {}",
                self.max_cardinality()
            )));
        }
        if let Some(v) = (0..self.rank()).find(|&v| self.degree(v) > 1) {
            return Err(ReduceError::NotSplittable(format!(
                "vertex {v} has degree {}",
                self.degree(v)
            )));
        }
        let mut components = Vec::new();
        let mut seen = 0u32;
        for v in 0..self.rank() {
            if (seen >> v) & 1 == 1 {
                continue;
            }
            let mut verts = 1u32 << v;
            for w in self.neighbors(v) {
                verts |= 1 << w;
            }
            let sets: Vec<u32> = self.sets.iter().copied().filter(|m| m & verts != 0).collect();
            seen |= verts;
            if sets.is_empty() {
                continue;
            }
            components.push(Component::from_global(verts, &sets));
        }
        let used: usize = components.iter().map(Component::rank).sum();
        Ok(Split {
            components,
            free_rank: self.ambient_n - used,
        })
    }
}

/// A piece of the final split: its basis vertices and its sets in local
/// coordinates (bit `k` is `vertices[k]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub sets: Vec<u32>,
}

impl Component {
    pub(crate) fn from_global(verts: u32, sets: &[u32]) -> Self {
        let vertices: Vec<usize> = (0..32).filter(|i| (verts >> i) & 1 == 1).collect();
        let local = |m: u32| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, g)| (m >> **g) & 1 == 1)
                .fold(0u32, |acc, (k, _)| acc | (1 << k))
        };
        let mut sets: Vec<u32> = sets.iter().map(|m| local(*m)).collect();
        sets.sort_unstable();
        Component { vertices, sets }
    }

    pub fn rank(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub components: Vec<Component>,
    pub free_rank: usize,
}

pub fn eval_component(comp: &Component) -> Result<(Pattern, KResult), ReduceError> {
    Pattern::classify(comp.rank(), &comp.sets)
        .map(|p| (p, p.value()))
        .ok_or_else(|| ReduceError::UnrecognizedPattern(comp.sets.clone()))
}

/// Records moves, applying each to the hypergraph and optionally checking
/// `sign * chi(S)` against the value it had when the log was created.
#[derive(Debug)]
pub struct MoveLog<'o> {
    steps: Vec<Step>,
    check: Option<(&'o mut Oracle, i64)>,
}

impl Default for MoveLog<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'o> MoveLog<'o> {
    pub fn new() -> Self {
        MoveLog {
            steps: Vec::new(),
            check: None,
        }
    }

    /// A log that evaluates and records a checkpoint after every move.
    pub fn checked(oracle: &'o mut Oracle, start: &Hypergraph) -> Result<Self, ReduceError> {
        let target = signed_chi(oracle, start)?;
        Ok(MoveLog {
            steps: Vec::new(),
            check: Some((oracle, target)),
        })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn moves(&self) -> impl Iterator<Item = &Move> {
        self.steps.iter().map(|s| &s.mv)
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }

    pub fn push(&mut self, h: &mut Hypergraph, mv: Move) -> Result<(), ReduceError> {
        h.apply(&mv).map_err(ReduceError::BadBaseChange)?;
        let checkpoint = match self.check.as_mut() {
            Some((oracle, target)) => {
                let got = signed_chi(oracle, h)?;
                if got != *target {
                    return Err(ReduceError::ChiDrift {
                        index: self.steps.len(),
                        expected: *target,
                        got,
                    });
                }
                Some(got)
            }
            None => None,
        };
        self.steps.push(Step { mv, checkpoint });
        Ok(())
    }
}

pub(crate) fn signed_chi(oracle: &mut Oracle, h: &Hypergraph) -> Result<i64, OracleError> {
    oracle.chi_canonical(&h.to_canonical()).map(|c| c.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Record an oracle checkpoint after every move (slow).
    pub checkpoints: bool,
}

/// `(m, eps)` from a split: ranks add, parities add.
pub fn combine(sign: Sign, split_free_rank: usize, locals: &[KResult]) -> KResult {
    let m = split_free_rank as u32 + locals.iter().map(|k| k.m).sum::<u32>();
    let eps = u32::from(sign.is_negative()) + locals.iter().map(|k| u32::from(k.epsilon)).sum::<u32>();
    KResult::new(m, (eps % 2) as u8)
}

pub fn reduce(rep: &RepMultiset, opts: ReduceOptions) -> Result<(KResult, Trace), ReduceError> {
    let mut oracle = Oracle::new();
    reduce_with(rep, opts, &mut oracle)
}

/// [`reduce`] reusing a caller-owned oracle for checkpoints.
pub fn reduce_with(
    rep: &RepMultiset,
    opts: ReduceOptions,
    oracle: &mut Oracle,
) -> Result<(KResult, Trace), ReduceError> {
    let initial = canonicalize(rep);
    let mut h = build_hypergraph(&initial);
    let mut log = if opts.checkpoints {
        MoveLog::checked(oracle, &h)?
    } else {
        MoveLog::new()
    };
    let result = run(&mut h, &mut log)?;
    Ok((
        result,
        Trace {
            initial,
            steps: log.into_steps(),
            result,
        },
    ))
}

fn run(h: &mut Hypergraph, log: &mut MoveLog) -> Result<KResult, ReduceError> {
    h.to_graph(log)?;
    let p = h.rank();
    let mut done = vec![false; p];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for v in 0..p {
        if done[v] {
            continue;
        }
        h.reduce_vertex(v, log)?;
        done[v] = true;
        match h.neighbors(v).as_slice() {
            [] => {
                if h.is_marked(v) {
                    parts.push(vec![v]);
                }
            }
            &[w] if !h.is_marked(v) => {
                if h.degree(w) == 1 {
                    parts.push(sorted_pair(v, w));
                    done[w] = true;
                } else {
                    // {v,w} is the only set at v: with v' = v + w it becomes {v'}.
                    h.replace_vertex(v, w, log)?;
                    parts.push(vec![v]);
                }
            }
            &[w] => {
                h.reduce_vertex_avoiding(w, Some(v), log)?;
                let others: Vec<usize> = h.neighbors(w).into_iter().filter(|&x| x != v).collect();
                if let Some(&u) = others.first() {
                    // {v}, {v,w}, {w,u}: toggle on (v, w, u) leaves {v,u}, {v,w,u};
                    // with v' = v + u these are {v'} and {v',w}.
                    h.toggle_vertices(v, w, u, log)?;
                    h.replace_vertex(v, u, log)?;
                }
                parts.push(sorted_pair(v, w));
                done[w] = true;
            }
            more => return Err(ReduceError::DegreeNotReduced { v, before: more.len() }),
        }
    }

    let split = h.split_components()?;
    let mut found: Vec<Vec<usize>> = split.components.iter().map(|c| c.vertices.clone()).collect();
    found.sort();
    parts.sort();
    if found != parts {
        return Err(ReduceError::NotSplittable(format!(
            "peeled parts {parts:?} differ from components {found:?}"
        )));
    }
    log.push(
        h,
        Move::KunnethSplit {
            parts: split.components.iter().map(|c| c.vertices.clone()).collect(),
        },
    )?;
    let mut locals = Vec::with_capacity(split.components.len());
    for (i, comp) in split.components.iter().enumerate() {
        let (pattern, local) = eval_component(comp)?;
        log.push(
            h,
            Move::BaseCase {
                component: i,
                pattern,
                local,
            },
        )?;
        locals.push(local);
    }
    Ok(combine(h.sign, split.free_rank, &locals))
}

fn sorted_pair(a: usize, b: usize) -> Vec<usize> {
    vec![a.min(b), a.max(b)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::parse_rep;

    fn canon(expr: &str, n: usize) -> CanonicalRep {
        canonicalize(&parse_rep(expr, n).unwrap())
    }

    fn ch(s: &str) -> F2Vec {
        F2Vec(s.bytes().fold(0, |acc, b| acc ^ (1 << (b - b'a'))))
    }

    fn standard(rep: &CanonicalRep) -> Hypergraph {
        Hypergraph::over_basis(rep, (0..rep.n).map(F2Vec::unit).collect()).unwrap()
    }

    fn set_of(names: &[&str]) -> BTreeSet<F2Vec> {
        names.iter().map(|s| ch(s)).collect()
    }

    #[test]
    fn build_examples() {
        let h = build_hypergraph(&canon("a+b+ab", 2));
        assert_eq!(h.basis, vec![ch("a"), ch("b")]);
        assert_eq!(h.sets, [0b01, 0b10, 0b11].into_iter().collect());

        let h = build_hypergraph(&canon("a+b+c+abc", 3));
        assert_eq!(h.rank(), 3);
        assert_eq!(h.sets, [0b001, 0b010, 0b100, 0b111].into_iter().collect());

        let h = build_hypergraph(&canon("", 3));
        assert_eq!(h.rank(), 0);
        assert!(h.sets.is_empty());
    }

    #[test]
    fn toggle_examples() {
        let mut h = build_hypergraph(&canon("a+b+c+ab+ac+bc+abc", 3));
        let mut log = MoveLog::new();
        h.spin_toggle(ch("a"), ch("b"), ch("c"), &mut log).unwrap();
        assert!(h.chars().is_empty());
        assert_eq!(h.sign, Sign::Minus);

        let mut h = build_hypergraph(&canon("a+b+c+ab+bc", 3));
        h.spin_toggle(ch("a"), ch("b"), ch("c"), &mut log).unwrap();
        assert_eq!(h.chars(), set_of(&["ac", "abc"]));
        assert_eq!(h.sign, Sign::Minus);

        let start = build_hypergraph(&canon("a+bc", 3));
        let mut h = start.clone();
        h.spin_toggle(ch("a"), ch("b"), ch("c"), &mut log).unwrap();
        h.spin_toggle(ch("a"), ch("b"), ch("c"), &mut log).unwrap();
        assert_eq!(h.chars(), start.chars());
        assert_eq!(h.sign, start.sign);

        assert_eq!(
            h.spin_toggle(ch("a"), ch("b"), ch("ab"), &mut log),
            Err(ReduceError::DependentTriple(ch("a"), ch("b"), ch("ab")))
        );
    }

    #[test]
    fn toggle_extends_basis() {
        let mut h = build_hypergraph(&canon("a", 3));
        let mut log = MoveLog::new();
        h.spin_toggle(ch("a"), ch("b"), ch("c"), &mut log).unwrap();
        assert!(matches!(log.steps()[0].mv, Move::Rebuild { .. }));
        assert_eq!(h.rank(), 3);
        assert_eq!(h.chars(), set_of(&["b", "c", "ab", "ac", "bc", "abc"]));
    }

    #[test]
    fn to_graph_examples() {
        let mut h = build_hypergraph(&canon("a+b+c+abc", 3));
        let mut log = MoveLog::new();
        h.to_graph(&mut log).unwrap();
        assert_eq!(log.steps().len(), 1);
        assert_eq!(h.chars(), set_of(&["ab", "ac", "bc"]));

        let mut h = build_hypergraph(&canon("a+ab", 2));
        let before = h.clone();
        let mut log = MoveLog::new();
        h.to_graph(&mut log).unwrap();
        assert!(log.steps().is_empty());
        assert_eq!(h, before);

        // One set of cardinality four.
        let mut h = Hypergraph {
            ambient_n: 4,
            basis: (0..4).map(F2Vec::unit).collect(),
            sets: [0b1111].into_iter().collect(),
            sign: Sign::Plus,
        };
        let mut log = MoveLog::new();
        h.to_graph(&mut log).unwrap();
        assert_eq!(
            log.steps()[0].mv,
            Move::SpinToggle {
                a: ch("a"),
                b: ch("b"),
                c: ch("cd")
            }
        );
        // After the first toggle the largest sets have cardinality three.
        let mut replay = Hypergraph {
            ambient_n: 4,
            basis: (0..4).map(F2Vec::unit).collect(),
            sets: [0b1111].into_iter().collect(),
            sign: Sign::Plus,
        };
        replay.apply(&log.steps()[0].mv).unwrap();
        assert_eq!(replay.max_cardinality(), 3);
        assert!(h.is_graph());
    }

    #[test]
    fn reduce_vertex_star() {
        // v = a joined to b and c, no marks.
        let mut oracle = Oracle::new();
        let mut h = standard(&canon("ab+ac", 3));
        let mut log = MoveLog::checked(&mut oracle, &h).unwrap();
        assert_eq!(h.degree(0), 2);
        h.reduce_vertex(0, &mut log).unwrap();
        assert_eq!(h.degree(0), 1);
        // ab, ac independent on rank 3: chi = 2.
        assert!(log.steps().iter().all(|s| s.checkpoint == Some(2)));
    }

    #[test]
    fn reduce_vertex_identity_when_low_degree() {
        let mut h = build_hypergraph(&canon("a+ab", 2));
        let before = h.clone();
        let mut log = MoveLog::new();
        h.reduce_vertex(0, &mut log).unwrap();
        assert_eq!(h, before);
        assert!(log.steps().is_empty());
    }

    #[test]
    fn chain_configuration_splits() {
        // {v}, {v,w}, {w,u} with v = a, w = b, u = c.
        let rep = canon("a+ab+bc", 3);
        let mut h = standard(&rep);
        let mut oracle = Oracle::new();
        let mut log = MoveLog::checked(&mut oracle, &h).unwrap();
        let k = run(&mut h, &mut log).unwrap();
        assert_eq!(k, Oracle::new().k_groups_canonical(&rep).unwrap());
        let toggles: Vec<&Move> = log.moves().filter(|m| matches!(m, Move::SpinToggle { .. })).collect();
        assert_eq!(
            toggles,
            vec![&Move::SpinToggle {
                a: ch("a"),
                b: ch("b"),
                c: ch("c")
            }]
        );
        // v' = v + u carries {v'} and {v', w}; the toggle also marks w and u.
        assert_eq!(h.basis[0], ch("ac"));
        assert!(h.sets.contains(&0b001) && h.sets.contains(&0b011));
        let split = h.split_components().unwrap();
        let parts: Vec<Vec<usize>> = split.components.iter().map(|c| c.vertices.clone()).collect();
        assert_eq!(parts, vec![vec![0, 1], vec![2]]);
        assert_eq!(split.free_rank, 0);
    }

    #[test]
    fn split_examples() {
        let h = Hypergraph {
            ambient_n: 3,
            basis: (0..3).map(F2Vec::unit).collect(),
            sets: [0b001, 0b011, 0b100].into_iter().collect(),
            sign: Sign::Plus,
        };
        let s = h.split_components().unwrap();
        let ranks: Vec<usize> = s.components.iter().map(Component::rank).collect();
        assert_eq!(ranks, vec![2, 1]);
        assert_eq!(s.free_rank, 0);

        let s = build_hypergraph(&canon("", 3)).split_components().unwrap();
        assert!(s.components.is_empty());
        assert_eq!(s.free_rank, 3);

        let s = standard(&canon("b+c+bc", 3)).split_components().unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(eval_component(&s.components[0]).unwrap().0, Pattern::HardTriangle);
        assert_eq!(s.free_rank, 1);

        assert!(standard(&canon("ab+ac", 3)).split_components().is_err());
    }

    #[test]
    fn base_case_values() {
        let hard = Component {
            vertices: vec![0, 1],
            sets: vec![1, 2, 3],
        };
        assert_eq!(eval_component(&hard).unwrap().1, KResult::new(0, 1));
        let edge = Component {
            vertices: vec![0, 1],
            sets: vec![3],
        };
        assert_eq!(eval_component(&edge).unwrap().1, KResult::new(1, 0));
        let mark = Component {
            vertices: vec![4],
            sets: vec![1],
        };
        assert_eq!(eval_component(&mark).unwrap().1, KResult::new(0, 0));
        let bad = Component {
            vertices: vec![0, 1],
            sets: vec![1, 2],
        };
        assert!(eval_component(&bad).is_err());
        for p in Pattern::ALL {
            assert_eq!(Pattern::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn reduce_examples() {
        let (k, trace) = reduce(&parse_rep("a+b+ab", 2).unwrap(), ReduceOptions::default()).unwrap();
        assert_eq!(k, KResult::new(0, 1));
        assert!(!trace.steps.iter().any(|s| matches!(s.mv, Move::SpinToggle { .. })));
        assert!(trace.steps.iter().any(|s| matches!(
            s.mv,
            Move::BaseCase {
                pattern: Pattern::HardTriangle,
                ..
            }
        )));

        let ee6 = parse_rep("a+b+c+ab+ac+bc+abc", 3).unwrap();
        assert_eq!(reduce(&ee6, ReduceOptions::default()).unwrap().0, KResult::new(3, 1));
        let ee2 = parse_rep("a+b+c+ab+bc", 3).unwrap();
        assert_eq!(reduce(&ee2, ReduceOptions::default()).unwrap().0, KResult::new(1, 1));
    }

    #[test]
    fn reduce_is_deterministic() {
        let r = parse_rep("a+b+c+d+abcd+ab+cd", 4).unwrap();
        let x = reduce(&r, ReduceOptions::default()).unwrap();
        let y = reduce(&r, ReduceOptions::default()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn exhaustive_rank_three_with_checkpoints() {
        let mut oracle = Oracle::new();
        for mask in 0u32..128 {
            let chars = (1u16..8).filter(|c| (mask >> (c - 1)) & 1 == 1).map(F2Vec);
            let rep = CanonicalRep::from_set(3, chars).unwrap().to_multiset();
            let expected = oracle.k_groups(&rep).unwrap();
            let (got, _) = reduce_with(&rep, ReduceOptions { checkpoints: true }, &mut oracle).unwrap();
            assert_eq!(got, expected, "mask {mask:#x}");
        }
    }
}
